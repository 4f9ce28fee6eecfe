"""Ground-truth worlds realized from a role-assigned network."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .bayesnet import NetworkDefinition, NetworkError, RoleAssignment, ZeroProbabilityEvidence, posterior

log = logging.getLogger(__name__)

SAMPLING_MODES = ("marginal", "joint")


@dataclass(frozen=True, eq=False)
class WorldState:
    network: NetworkDefinition
    hypothesis_value: bool
    evidence_list: tuple[bool, ...]
    evidence_probabilities: tuple[float, ...]
    optimal_posterior: float | None
    hypothesis_probability: float

    @property
    def roles(self) -> RoleAssignment:
        return self.network.roles

    @property
    def n(self) -> int:
        return len(self.evidence_list)

    def to_dict(self) -> dict:
        return {
            "network": self.network.name,
            "hypothesis": self.roles.hypothesis,
            "hypothesis_value": self.hypothesis_value,
            "hypothesis_probability": self.hypothesis_probability,
            "evidence_nodes": list(self.roles.evidence_nodes),
            "evidence_list": list(self.evidence_list),
            "evidence_probabilities": list(self.evidence_probabilities),
            "optimal_posterior": self.optimal_posterior,
        }


def state_label(net: NetworkDefinition, node: str, true_state: str, value: bool) -> str:
    """State label of a two-valued node for a boolean truth value."""
    if value:
        return true_state
    states = net.node(node).states
    return states[1] if states[0] == true_state else states[0]


def hypothesis_evidence(roles: RoleAssignment, net: NetworkDefinition, value: bool) -> dict[str, str]:
    return {roles.hypothesis: state_label(net, roles.hypothesis, roles.hypothesis_true_state, value)}


def sample_hypothesis(hypothesis_probability: float, rng: np.random.Generator) -> bool:
    if not 0.0 <= hypothesis_probability <= 1.0:
        raise ValueError(f"hypothesis probability {hypothesis_probability!r} is not in [0, 1]")
    return bool(rng.random() < hypothesis_probability)


def evidence_marginals(net: NetworkDefinition, roles: RoleAssignment, hypothesis_value: bool) -> tuple[float, ...]:
    """``P(E_i = true | H = hypothesis_value)`` for every evidence node."""
    given = hypothesis_evidence(roles, net, hypothesis_value)
    return tuple(posterior(net, e.node, e.true_state, given) for e in roles.evidence)


def sample_evidence(
    net: NetworkDefinition,
    roles: RoleAssignment,
    hypothesis_value: bool,
    rng: np.random.Generator,
    mode: str = "marginal",
) -> tuple[tuple[bool, ...], tuple[float, ...]]:
    """Draw one truth value per evidence node, in declared order.

    ``marginal`` draws each node independently from its conditional marginal
    given the hypothesis. ``joint`` draws the evidence jointly via the chain
    rule, each node conditioned on the hypothesis and the earlier draws, which
    never yields an impossible combination. Both use one draw per node.
    """
    if mode not in SAMPLING_MODES:
        raise ValueError(f"unknown evidence sampling mode {mode!r}")
    marginals = evidence_marginals(net, roles, hypothesis_value)
    values: list[bool] = []
    if mode == "marginal":
        for m in marginals:
            values.append(bool(rng.random() < m))
    else:
        given = hypothesis_evidence(roles, net, hypothesis_value)
        for e in roles.evidence:
            m = posterior(net, e.node, e.true_state, given)
            value = bool(rng.random() < m)
            values.append(value)
            given[e.node] = state_label(net, e.node, e.true_state, value)
    return tuple(values), marginals


def compute_optimal_posterior(
    net: NetworkDefinition, roles: RoleAssignment, evidence_list: tuple[bool, ...]
) -> float | None:
    """``P(H = true | all evidence)``, or ``None`` for an impossible combination."""
    evidence = {
        e.node: state_label(net, e.node, e.true_state, v) for e, v in zip(roles.evidence, evidence_list)
    }
    try:
        return posterior(net, roles.hypothesis, roles.hypothesis_true_state, evidence)
    except ZeroProbabilityEvidence:
        log.warning("sampled evidence combination has probability zero; optimal posterior undefined")
        return None


def build_world(
    net: NetworkDefinition,
    hypothesis_probability: float,
    rng: np.random.Generator,
    mode: str = "marginal",
) -> WorldState:
    if net.roles is None:
        raise NetworkError(f"network {net.name!r} has no hypothesis/evidence roles")
    roles = net.roles
    h = sample_hypothesis(hypothesis_probability, rng)
    values, marginals = sample_evidence(net, roles, h, rng, mode)
    return WorldState(
        network=net,
        hypothesis_value=h,
        evidence_list=values,
        evidence_probabilities=marginals,
        optimal_posterior=compute_optimal_posterior(net, roles, values),
        hypothesis_probability=hypothesis_probability,
    )
