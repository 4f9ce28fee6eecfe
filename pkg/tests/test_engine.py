import numpy as np
import pytest

from argnet.agents import compute_posterior
from argnet.engine import (
    Reuse,
    SimConfig,
    SimulationError,
    derive_rng,
    kernel_available,
    run,
    run_config,
    setup,
    step,
)
from argnet.telemetry import manifest_json

BACKENDS = ["python"] + (["compiled"] if kernel_available() else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def test_kernel_is_built():
    # The compiled extension is part of the package build; the fallback is for
    # environments without a compiler.
    assert kernel_available()


def test_initial_draws_zero_gives_identical_priors(backend):
    sim = setup(SimConfig(initial_draws=0, number_of_agents=20), backend=backend)
    assert all(a.belief == a.initial_belief == 0.5 for a in sim.agents)


def test_initial_draws_one_knows_one(backend):
    sim = setup(SimConfig(initial_draws=1, number_of_agents=20), backend=backend)
    assert all(len(a.known) == 1 and a.draws_used == 1 for a in sim.agents)
    assert sim.initial_evidence == tuple((next(iter(a.known)),) for a in sim.agents)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(initial_draws=2, max_draws=1)
    with pytest.raises(ValueError):
        SimConfig(max_ticks=-1)
    with pytest.raises(ValueError):
        SimConfig(social_network="small-world", number_of_agents=4, k=2)
    with pytest.raises(ValueError):
        SimConfig(hypothesis_node="A")
    with pytest.raises(ValueError):
        setup(SimConfig(causal_structure="small-net", initial_draws=5, max_draws=5))


def test_null_network_without_curiosity_is_static(backend):
    sim = setup(SimConfig(social_network="null", number_of_agents=15, max_ticks=10), backend=backend)
    result = run(sim)
    assert all(r.beliefs == result.ticks[0].beliefs for r in result.ticks)
    assert len({r.mean for r in result.ticks}) == 1


def test_hand_trace_two_agents(backend):
    cfg = SimConfig(number_of_agents=2, initial_draws=0, chattiness=1.0, conviction_threshold=0.0, max_ticks=1)
    sim = setup(cfg, backend=backend)
    a = sim.agents[0]
    a.known[0] = sim.world.evidence_list[0]
    a.recency_list.append(0)
    a.draws_used = 1
    compute_posterior(a, 0, sim.model)
    assert a.belief != a.initial_belief
    record = step(sim)
    b = sim.agents[1]
    assert b.known == {0: sim.world.evidence_list[0]}
    assert record.tick == 1
    # Deliveries apply immediately, so B (acting after A) shares the piece back.
    piece = sim.transmissions[-9]
    assert (piece.uttered, piece.sent_to, piece.received_as_novel) == (2, 2, 1)


def test_determinism_same_seed(backend):
    cfg = SimConfig(social_network="small-world", share="recent", curiosity=0.2, max_draws=3, seed=99)
    _, r1 = run_config(cfg, backend=backend)
    _, r2 = run_config(cfg, backend=backend)
    assert manifest_json(r1.manifest) == manifest_json(r2.manifest)
    assert r1.ticks == r2.ticks and r1.transmissions == r2.transmissions


@pytest.mark.skipif(not kernel_available(), reason="compiled kernel not built")
@pytest.mark.parametrize("share", ["random", "impact", "recent"])
@pytest.mark.parametrize("topology", ["complete", "small-world", "wheel", "null"])
@pytest.mark.parametrize("schedule", ["ascending", "shuffle"])
def test_backends_bit_identical(share, topology, schedule):
    cfg = SimConfig(causal_structure="big-net", number_of_agents=25, social_network=topology, share=share,
                    curiosity=0.3, max_draws=4, initial_draws=1, conviction_threshold=0.1, max_ticks=15,
                    seed=4, schedule=schedule)
    _, py = run_config(cfg, backend="python")
    _, cc = run_config(cfg, backend="compiled")
    assert py.ticks == cc.ticks
    assert py.transmissions == cc.transmissions
    assert manifest_json(py.manifest) == manifest_json(cc.manifest)


def test_compiled_state_round_trips_through_agents():
    if not kernel_available():
        pytest.skip("compiled kernel not built")
    cfg = SimConfig(number_of_agents=12, share="recent", curiosity=0.5, max_draws=4, max_ticks=6, seed=8)
    py = setup(cfg, backend="python")
    cc = setup(cfg, backend="compiled")
    for _ in range(6):
        step(py)
        step(cc)
        assert [vars(a) for a in py.agents] == [vars(a) for a in cc.agents]


def test_provenance(backend):
    cfg = SimConfig(causal_structure="small-net", curiosity=0.5, max_draws=4, max_ticks=20, seed=3)
    sim = setup(cfg, backend=backend)
    run(sim)
    for agent in sim.agents:
        assert all(v == sim.world.evidence_list[i] for i, v in agent.known.items())
        assert set(agent.update_list) <= set(agent.known)
        assert sorted(agent.recency_list) == sorted(agent.known)


def test_full_information_stop_reaches_optimal_posterior(backend):
    cfg = SimConfig(chattiness=1.0, stop_at_full_information=True, stop_at_max_ticks=False, number_of_agents=30, seed=5)
    sim = setup(cfg, backend=backend)
    result = run(sim)
    assert result.stop_reason == "full-information"
    assert all(abs(b - sim.world.optimal_posterior) <= 1e-10 for b in result.ticks[-1].beliefs)


def test_max_ticks_zero_returns_setup_state(backend):
    result = run(setup(SimConfig(max_ticks=0), backend=backend))
    assert len(result.ticks) == 1 and result.ticks[0].tick == 0
    assert result.stop_reason == "max-ticks"


def test_tick_cap_bounds_runs(backend):
    cfg = SimConfig(stop_at_max_ticks=False, social_network="null", tick_cap=7)
    result = run(setup(cfg, backend=backend))
    assert result.stop_reason == "tick-cap" and result.ticks[-1].tick == 7


def test_mean_constant_on_null_network():
    cfg = SimConfig(social_network="null", number_of_agents=40, max_ticks=5)
    result = run(setup(cfg))
    assert {r.mean for r in result.ticks} == {result.ticks[0].mean}


def test_reuse_world_graph_and_initial_evidence(backend):
    cfg = SimConfig(social_network="small-world", number_of_agents=20)
    first = setup(cfg, stream=(0, 0), backend=backend)
    reuse = Reuse.from_simulation(first, world=True, graph=True, initial_evidence=True)
    second = setup(cfg, reuse, stream=(0, 1), backend=backend)
    assert second.world is first.world and second.graph is first.graph
    assert second.initial_evidence == first.initial_evidence
    fresh = setup(cfg, stream=(0, 1), backend=backend)
    assert fresh.world.evidence_list != first.world.evidence_list or fresh.graph.edges != first.graph.edges


def test_reuse_rejects_incompatible_parts():
    cfg = SimConfig(number_of_agents=10)
    first = setup(cfg)
    with pytest.raises(ValueError):
        setup(cfg.with_changes(number_of_agents=12), Reuse(graph=first.graph))
    other = setup(SimConfig(causal_structure="small-net"))
    with pytest.raises(ValueError):
        setup(cfg, Reuse(world=other.world))


def test_seed_splitting_is_pure():
    a = derive_rng(5, 2, 3).random(4)
    b = derive_rng(5, 2, 3).random(4)
    c = derive_rng(5, 3, 2).random(4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_zero_probability_abort_names_agent_and_evidence(tmp_path, backend):
    from argnet.bayesnet import serialize_network_json

    from conftest import contradiction_net

    path = tmp_path / "contradiction.json"
    path.write_text(serialize_network_json(contradiction_net()))
    base = SimConfig(causal_structure=str(path), number_of_agents=6, chattiness=1.0, max_ticks=5)
    errors = []
    for seed in range(40):
        try:
            sim = setup(base.with_changes(seed=seed), backend=backend)
            run(sim)
        except SimulationError as exc:
            errors.append(exc)
            continue
        # Runs only abort once someone holds both halves of the contradiction.
        held = set().union(*(a.known for a in sim.agents))
        assert sim.world.optimal_posterior is not None or held != {0, 1}
    assert errors
    for err in errors:
        assert "agent" in str(err) and set(err.evidence) == {"E1", "E2"}
        assert err.evidence["E1"] == err.evidence["E2"]  # the two can never agree


def test_zero_probability_errors_match_across_backends(tmp_path):
    if not kernel_available():
        pytest.skip("compiled kernel not built")
    from argnet.bayesnet import serialize_network_json

    from conftest import contradiction_net

    path = tmp_path / "contradiction.json"
    path.write_text(serialize_network_json(contradiction_net()))
    cfg = SimConfig(causal_structure=str(path), number_of_agents=6, chattiness=1.0, max_ticks=5)
    for seed in range(20):
        messages = []
        for backend in ("python", "compiled"):
            try:
                run(setup(cfg.with_changes(seed=seed), backend=backend))
                messages.append(None)
            except SimulationError as exc:
                messages.append(str(exc))
        assert messages[0] == messages[1]


def test_verbose_logs_ticks(caplog):
    import logging

    with caplog.at_level(logging.INFO, logger="argnet.engine"):
        run(setup(SimConfig(max_ticks=2, verbose=True)))
    assert "tick 2" in caplog.text


def test_config_dict_round_trip():
    cfg = SimConfig(hypothesis_node="A", evidence_nodes=("one", "two"), share="impact")
    assert SimConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        SimConfig.from_dict({"bogus-key": 1})
