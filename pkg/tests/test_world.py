import logging

import numpy as np
import pytest

from argnet.bayesnet import enumerate_joint_oracle, make_roles, posterior
from argnet.world import build_world, compute_optimal_posterior, evidence_marginals, sample_evidence, sample_hypothesis

from conftest import contradiction_net


class CountingRng:
    def __init__(self, seed=0):
        self.rng = np.random.default_rng(seed)
        self.calls = 0

    def random(self, *args):
        self.calls += 1
        return self.rng.random(*args)


def test_sample_hypothesis_extremes():
    rng = np.random.default_rng(0)
    assert all(sample_hypothesis(1.0, rng) for _ in range(1000))
    assert not any(sample_hypothesis(0.0, rng) for _ in range(1000))


def test_sample_hypothesis_frequency():
    rng = np.random.default_rng(1)
    frac = np.mean([sample_hypothesis(0.5, rng) for _ in range(100_000)])
    assert abs(frac - 0.5) < 0.01


def test_sample_hypothesis_rejects_bad_probability():
    with pytest.raises(ValueError):
        sample_hypothesis(1.5, np.random.default_rng(0))


@pytest.mark.parametrize("mode", ["marginal", "joint"])
def test_world_uses_one_plus_n_draws(big, mode):
    rng = CountingRng()
    world = build_world(big, 0.5, rng, mode)
    assert rng.calls == 1 + 9
    assert len(world.evidence_list) == len(world.evidence_probabilities) == 9


@pytest.mark.parametrize("h", [True, False])
def test_evidence_probabilities_equal_posteriors(small, h):
    rng = np.random.default_rng(2)
    _, probs = sample_evidence(small, small.roles, h, rng)
    label = "yes" if h else "no"
    for e, p in zip(small.roles.evidence, probs):
        assert p == posterior(small, e.node, e.true_state, {"V": label})


def test_big_net_evidence_rate_matches_exact_marginal(big):
    expected = enumerate_joint_oracle(big, "one", "yes", {"A": "yes"})
    assert expected == pytest.approx(0.82, abs=1e-12)
    rng = np.random.default_rng(3)
    hits = [sample_evidence(big, big.roles, True, rng)[0][0] for _ in range(10_000)]
    assert abs(np.mean(hits) - expected) < 0.02


def test_asia_bronchitis_rate_given_lung_cancer(asia):
    # P(bronc | lung) = P(bronc | smoke) P(smoke | lung) + ...; the rate must match it.
    expected = enumerate_joint_oracle(asia, "bronc", "yes", {"lung": "yes"})
    rng = np.random.default_rng(4)
    idx = asia.roles.evidence_nodes.index("bronc")
    hits = [sample_evidence(asia, asia.roles, True, rng)[0][idx] for _ in range(10_000)]
    assert abs(np.mean(hits) - expected) < 0.02


def test_deterministic_marginal_always_true():
    net = contradiction_net()
    roles = make_roles(net, "X", ["E1"])
    rng = np.random.default_rng(0)
    assert all(sample_evidence(net, roles, True, rng)[0] == (True,) for _ in range(200))


def test_optimal_posterior_matches_oracle(big):
    value = compute_optimal_posterior(big, big.roles, (True,) * 9)
    evidence = {e: "yes" for e in big.roles.evidence_nodes}
    assert abs(value - enumerate_joint_oracle(big, "A", "yes", evidence)) <= 1e-10


def test_optimal_posterior_without_evidence_is_marginal(big):
    roles = make_roles(big, "A", [])
    assert compute_optimal_posterior(big, roles, ()) == posterior(big, "A", "yes", {})


def test_impossible_combination_gives_undefined_with_warning(caplog):
    net = contradiction_net()
    with caplog.at_level(logging.WARNING):
        assert compute_optimal_posterior(net, net.roles, (True, True)) is None
    assert "probability zero" in caplog.text


def test_marginal_mode_can_produce_impossible_worlds_joint_mode_cannot():
    net = contradiction_net()
    rng = np.random.default_rng(5)
    marginal_worlds = [build_world(net, 0.5, rng, "marginal") for _ in range(200)]
    assert any(w.optimal_posterior is None for w in marginal_worlds)
    joint_worlds = [build_world(net, 0.5, rng, "joint") for _ in range(200)]
    assert all(w.optimal_posterior is not None for w in joint_worlds)
    assert all(w.evidence_list[0] != w.evidence_list[1] for w in joint_worlds)


def test_joint_mode_keeps_marginal_probabilities(big):
    rng = np.random.default_rng(6)
    world = build_world(big, 0.5, rng, "joint")
    assert world.evidence_probabilities == evidence_marginals(big, big.roles, world.hypothesis_value)


def test_world_serializes(big):
    world = build_world(big, 0.5, np.random.default_rng(0))
    d = world.to_dict()
    assert d["evidence_nodes"] == list(big.roles.evidence_nodes)
    assert 0.0 <= d["optimal_posterior"] <= 1.0
