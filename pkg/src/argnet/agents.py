"""Agent state and the per-agent behaviours: inquiry, updating, sharing, reception.

Every agent holds a subset of the world's evidence, and the values it holds
always equal the world's values. Its belief is therefore a function of *which*
pieces it knows. :class:`BeliefModel` precomputes that function once per world
as a table over all ``2**n`` subsets, so that identical knowledge always gives
bit-identical beliefs.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .bayesnet import ZeroProbabilityEvidence, joint_table, posterior
from .world import WorldState, state_label

SHARE_RULES = ("random", "impact", "recent")

# Largest evidence count for which the full subset table is built.
TABLE_LIMIT = 20


class Support(enum.Enum):
    FOR = "for"
    AGAINST = "against"
    NEUTRAL = "neutral"


def pick_index(rng, k: int) -> int:
    """Uniform integer in ``[0, k)`` from one uniform draw."""
    return min(int(rng.random() * k), k - 1)


class BeliefModel:
    """Posterior of the hypothesis for every subset of a world's evidence.

    Subsets are bitmasks: bit ``i`` set means evidence ``i`` is known at its
    world value. ``table[mask]`` is NaN for subsets of probability zero.
    """

    def __init__(self, world: WorldState, table_limit: int = TABLE_LIMIT):
        self.world = world
        self.net = world.network
        self.roles = world.roles
        self.n = world.n
        self._labels = {
            e.node: (state_label(self.net, e.node, e.true_state, True), state_label(self.net, e.node, e.true_state, False))
            for e in self.roles.evidence
        }
        self.table: np.ndarray | None = self._subset_table() if self.n <= table_limit else None
        self.initial_belief = self.belief_of_mask(0)
        self.singular = np.array([self.belief_of_mask(1 << i) for i in range(self.n)], dtype=np.float64)
        self.updates = self.singular - self.initial_belief

    def _subset_table(self) -> np.ndarray:
        names = [self.roles.hypothesis] + list(self.roles.evidence_nodes)
        g = joint_table(self.net, names)
        for axis, (e, value) in enumerate(zip(self.roles.evidence, self.world.evidence_list), start=1):
            w = self.net.node(e.node).index(state_label(self.net, e.node, e.true_state, value))
            unknown = g.sum(axis=axis)
            known = np.take(g, w, axis=axis)
            g = np.stack([unknown, known], axis=axis)
        # axis 0 is H; reverse the evidence axes so bit i addresses evidence i.
        g = np.transpose(g, [0] + list(range(self.n, 0, -1))).reshape(2, 1 << self.n)
        h = self.net.node(self.roles.hypothesis).index(self.roles.hypothesis_true_state)
        mass = g[0] + g[1]
        with np.errstate(invalid="ignore", divide="ignore"):
            table = np.where(mass > 0.0, g[h] / mass, np.nan)
        table.setflags(write=False)
        return table

    def evidence_of_mask(self, mask: int) -> dict[str, str]:
        return {
            e.node: self._labels[e.node][0 if self.world.evidence_list[i] else 1]
            for i, e in enumerate(self.roles.evidence)
            if mask >> i & 1
        }

    def belief_of_mask(self, mask: int) -> float:
        if self.table is not None:
            value = float(self.table[mask])
            if value != value:
                raise ZeroProbabilityEvidence(self.evidence_of_mask(mask))
            return value
        return posterior(self.net, self.roles.hypothesis, self.roles.hypothesis_true_state, self.evidence_of_mask(mask))

    def belief(self, known: Mapping[int, bool]) -> float:
        """``P(H = true | known)`` for values that need not match the world."""
        mask = 0
        for i, v in known.items():
            if v != self.world.evidence_list[i]:
                break
            mask |= 1 << i
        else:
            return self.belief_of_mask(mask)
        evidence = {self.roles.evidence[i].node: self._labels[self.roles.evidence[i].node][0 if v else 1] for i, v in known.items()}
        return posterior(self.net, self.roles.hypothesis, self.roles.hypothesis_true_state, evidence)


@dataclass
class AgentState:
    id: int
    initial_belief: float
    belief: float
    known: dict[int, bool] = field(default_factory=dict)
    update_list: dict[int, float] = field(default_factory=dict)
    recency_list: list[int] = field(default_factory=list)
    draws_used: int = 0

    @property
    def mask(self) -> int:
        m = 0
        for i in self.known:
            m |= 1 << i
        return m


@dataclass(frozen=True)
class DispositionConfig:
    chattiness: float = 0.5
    curiosity: float = 0.0
    conviction_threshold: float = 0.0
    share_rule: str = "random"
    max_draws: int = 1
    recency_top_probability: float = 0.9

    def __post_init__(self):
        for name in ("chattiness", "curiosity", "conviction_threshold", "recency_top_probability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name.replace('_', '-')} must be in [0, 1], got {value!r}")
        if self.share_rule not in SHARE_RULES:
            raise ValueError(f"unknown share rule {self.share_rule!r}; choose from {SHARE_RULES}")
        if self.max_draws < 0:
            raise ValueError("max-draws must be non-negative")


def new_agent(agent_id: int, model: BeliefModel) -> AgentState:
    return AgentState(agent_id, model.initial_belief, model.initial_belief)


def should_inquire(agent: AgentState, config: DispositionConfig, world: WorldState, rng) -> bool:
    if agent.draws_used >= config.max_draws:
        return False
    return bool(rng.random() < config.curiosity) and len(agent.known) < world.n


def compute_posterior(agent: AgentState, new_evidence_index: int, model: BeliefModel) -> AgentState:
    agent.belief = model.belief(agent.known)
    value = agent.known[new_evidence_index]
    if value == model.world.evidence_list[new_evidence_index]:
        singular = float(model.singular[new_evidence_index])
    else:
        singular = model.belief({new_evidence_index: value})
    agent.update_list[new_evidence_index] = singular - agent.initial_belief
    return agent


def collect_evidence(agent: AgentState, world: WorldState, model: BeliefModel, rng) -> int:
    unknown = [i for i in range(world.n) if i not in agent.known]
    idx = unknown[pick_index(rng, len(unknown))]
    agent.known[idx] = world.evidence_list[idx]
    agent.draws_used += 1
    agent.recency_list.append(idx)
    compute_posterior(agent, idx, model)
    return idx


def conviction_bounds(initial_belief: float, threshold: float) -> tuple[float, float]:
    return (initial_belief - initial_belief * threshold, initial_belief + (1.0 - initial_belief) * threshold)


def should_share(agent: AgentState, config: DispositionConfig, rng) -> bool:
    if not agent.known:
        return False
    if not rng.random() < config.chattiness:
        return False
    lower, upper = conviction_bounds(agent.initial_belief, config.conviction_threshold)
    return agent.belief < lower or agent.belief > upper


def select_share(agent: AgentState, config: DispositionConfig, rng) -> int:
    """Choose the piece an agent shares, consuming exactly one or two draws.

    ``random`` and ``impact`` always use one draw (``impact`` ignores it) so
    that every sharer consumes the same number of draws under every rule.
    ``recent`` uses a second draw to pick among the non-top entries.
    """
    rule = config.share_rule
    u = rng.random()
    if rule == "random":
        keys = sorted(agent.known)
        return keys[pick_index_from(u, len(keys))]
    if rule == "impact":
        best = None
        rising = agent.belief > agent.initial_belief
        for i in sorted(agent.update_list):
            v = agent.update_list[i]
            if best is None or (v > agent.update_list[best] if rising else v < agent.update_list[best]):
                best = i
        return best
    top = agent.recency_list[-1]
    second = rng.random()
    others = agent.recency_list[:-1]
    if u < config.recency_top_probability or not others:
        return top
    return others[pick_index_from(second, len(others))]


def pick_index_from(u: float, k: int) -> int:
    return min(int(u * k), k - 1)


def receive_share(receiver: AgentState, evidence_index: int, world_value: bool, model: BeliefModel) -> bool:
    if evidence_index in receiver.known:
        receiver.recency_list.remove(evidence_index)
        receiver.recency_list.append(evidence_index)
        return False
    receiver.recency_list.append(evidence_index)
    receiver.known[evidence_index] = world_value
    compute_posterior(receiver, evidence_index, model)
    return True


def supports_hypothesis(agent: AgentState) -> Support:
    if agent.belief > agent.initial_belief:
        return Support.FOR
    if agent.belief < agent.initial_belief:
        return Support.AGAINST
    return Support.NEUTRAL
