"""Discrete Bayesian network definitions and structural validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

ROW_TOLERANCE = 1e-9
# Rows closer to 1 than this are left as-is so a parse/serialize cycle is a fixpoint.
_RENORMALIZE_EPS = 1e-12

TRUE_LABELS = ("yes", "true", "True", "TRUE", "Yes", "YES", "T", "t", "1")


class NetworkError(ValueError):
    """Raised when a network definition violates a structural invariant."""


class ZeroProbabilityEvidence(ValueError):
    """Raised when a query conditions on an event of probability zero."""

    def __init__(self, evidence, message=None):
        self.evidence = dict(evidence)
        super().__init__(message or f"evidence has zero probability: {self.evidence}")


@dataclass(frozen=True)
class NodeSpec:
    name: str
    states: tuple[str, ...]

    @property
    def card(self) -> int:
        return len(self.states)

    def index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise NetworkError(f"node {self.name!r} has no state {state!r}") from None


@dataclass(frozen=True, eq=False)
class Cpt:
    """Conditional table of one node.

    ``table`` has one row per parent configuration, enumerated row-major in the
    declared parent order (last parent varies fastest), and one column per
    state of the node.
    """

    node: str
    parents: tuple[str, ...]
    table: np.ndarray


@dataclass(frozen=True)
class EvidenceRole:
    node: str
    true_state: str


@dataclass(frozen=True)
class RoleAssignment:
    hypothesis: str
    hypothesis_true_state: str
    evidence: tuple[EvidenceRole, ...]

    @property
    def evidence_nodes(self) -> tuple[str, ...]:
        return tuple(e.node for e in self.evidence)

    @property
    def n(self) -> int:
        return len(self.evidence)


def default_true_state(node: NodeSpec) -> str:
    """Pick the state that counts as ``true`` for a two-valued node."""
    for label in TRUE_LABELS:
        if label in node.states:
            return label
    return node.states[0]


@dataclass(frozen=True, eq=False)
class NetworkDefinition:
    """A validated discrete Bayesian network.

    Instances are immutable and hash by identity, which lets inference
    results be memoized per network.
    """

    name: str
    nodes: tuple[NodeSpec, ...]
    arcs: tuple[tuple[str, str], ...]
    cpts: dict[str, Cpt]
    roles: RoleAssignment | None = None
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index.update({node.name: i for i, node in enumerate(self.nodes)})

    def node(self, name: str) -> NodeSpec:
        try:
            return self.nodes[self._index[name]]
        except KeyError:
            raise NetworkError(f"unknown node {name!r}") from None

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise NetworkError(f"unknown node {name!r}") from None

    @property
    def names(self) -> list[str]:
        return [node.name for node in self.nodes]

    def parents(self, name: str) -> tuple[str, ...]:
        return self.cpts[name].parents

    def with_roles(self, roles: RoleAssignment | None) -> NetworkDefinition:
        if roles is not None:
            validate_roles(self, roles)
        return NetworkDefinition(self.name, self.nodes, self.arcs, self.cpts, roles)

    def structurally_equal(self, other: NetworkDefinition, atol: float = 0.0) -> bool:
        if self.nodes != other.nodes or sorted(self.arcs) != sorted(other.arcs):
            return False
        if self.roles != other.roles:
            return False
        for name, cpt in self.cpts.items():
            theirs = other.cpts.get(name)
            if theirs is None or theirs.parents != cpt.parents:
                return False
            if theirs.table.shape != cpt.table.shape:
                return False
            if np.max(np.abs(theirs.table - cpt.table), initial=0.0) > atol:
                return False
        return True


def parent_configurations(net: NetworkDefinition, name: str):
    """Yield parent-state tuples in the row order of ``name``'s CPT."""
    parents = net.parents(name)
    return product(*(net.node(p).states for p in parents))


def build_network(
    name: str,
    nodes: list[NodeSpec],
    arcs: list[tuple[str, str]],
    cpts: dict[str, tuple[list[str], list[list[float]]]],
    roles: RoleAssignment | None = None,
    row_tolerance: float = ROW_TOLERANCE,
) -> NetworkDefinition:
    """Validate raw parts and assemble a :class:`NetworkDefinition`.

    Raises:
        NetworkError: on duplicate names, unknown references, cycles, CPT
            shape mismatches or rows that do not sum to one within
            ``row_tolerance``.
    """
    seen: set[str] = set()
    for node in nodes:
        if not node.name:
            raise NetworkError("node name must be non-empty")
        if node.name in seen:
            raise NetworkError(f"duplicate node {node.name!r}")
        seen.add(node.name)
        if len(node.states) < 2:
            raise NetworkError(f"node {node.name!r} needs at least two states")
        if len(set(node.states)) != len(node.states):
            raise NetworkError(f"node {node.name!r} has duplicate state labels")

    by_name = {node.name: node for node in nodes}
    arc_set: set[tuple[str, str]] = set()
    for parent, child in arcs:
        for end in (parent, child):
            if end not in by_name:
                raise NetworkError(f"arc ({parent!r}, {child!r}) references unknown node {end!r}")
        if parent == child:
            raise NetworkError(f"self-loop on {parent!r}")
        if (parent, child) in arc_set:
            raise NetworkError(f"duplicate arc ({parent!r}, {child!r})")
        arc_set.add((parent, child))
    _check_acyclic([n.name for n in nodes], arc_set)

    built: dict[str, Cpt] = {}
    for node in nodes:
        if node.name not in cpts:
            raise NetworkError(f"node {node.name!r} has no CPT")
        parents, rows = cpts[node.name]
        parents = tuple(parents)
        in_arcs = {p for p, c in arc_set if c == node.name}
        if set(parents) != in_arcs or len(parents) != len(in_arcs):
            raise NetworkError(
                f"CPT parents of {node.name!r} {list(parents)} do not match its in-arcs {sorted(in_arcs)}"
            )
        n_rows = 1
        for p in parents:
            n_rows *= by_name[p].card
        table = np.array(rows, dtype=np.float64)
        if table.ndim != 2 or table.shape != (n_rows, node.card):
            raise NetworkError(
                f"CPT of {node.name!r} must have shape ({n_rows}, {node.card}), got {table.shape}"
            )
        built[node.name] = Cpt(node.name, parents, _normalize_rows(node.name, table, row_tolerance))
    for cpt_node in cpts:
        if cpt_node not in by_name:
            raise NetworkError(f"CPT given for unknown node {cpt_node!r}")

    net = NetworkDefinition(name, tuple(nodes), tuple(arcs), built)
    if roles is not None:
        validate_roles(net, roles)
        net = NetworkDefinition(name, tuple(nodes), tuple(arcs), built, roles)
    return net


def _normalize_rows(name: str, table: np.ndarray, tolerance: float) -> np.ndarray:
    if not np.all(np.isfinite(table)):
        raise NetworkError(f"CPT of {name!r} contains non-finite entries")
    if np.any(table < 0.0) or np.any(table > 1.0):
        raise NetworkError(f"CPT of {name!r} has entries outside [0, 1]")
    sums = table.sum(axis=1)
    for r, s in enumerate(sums):
        if abs(s - 1.0) > tolerance:
            raise NetworkError(f"CPT of {name!r} row {r} sums to {s!r}, not 1")
    table = table.copy()
    drift = np.abs(sums - 1.0) > _RENORMALIZE_EPS
    table[drift] = table[drift] / sums[drift, None]
    table.setflags(write=False)
    return table


def _check_acyclic(names: list[str], arcs: set[tuple[str, str]]) -> None:
    children: dict[str, list[str]] = {n: [] for n in names}
    indegree = {n: 0 for n in names}
    for parent, child in arcs:
        children[parent].append(child)
        indegree[child] += 1
    queue = [n for n in names if indegree[n] == 0]
    visited = 0
    while queue:
        node = queue.pop()
        visited += 1
        for child in children[node]:
            indegree[child] -= 1
            if indegree[child] == 0:
                queue.append(child)
    if visited != len(names):
        cyclic = sorted(n for n in names if indegree[n] > 0)
        raise NetworkError(f"arc graph has a cycle through {cyclic}")


def validate_roles(net: NetworkDefinition, roles: RoleAssignment) -> None:
    hyp = net.node(roles.hypothesis)
    if hyp.card != 2:
        raise NetworkError(f"hypothesis {hyp.name!r} must be two-valued")
    hyp.index(roles.hypothesis_true_state)
    seen = set()
    for ev in roles.evidence:
        node = net.node(ev.node)
        if node.name == hyp.name:
            raise NetworkError("the hypothesis cannot also be an evidence node")
        if node.name in seen:
            raise NetworkError(f"evidence node {node.name!r} listed twice")
        seen.add(node.name)
        if node.card != 2:
            raise NetworkError(f"evidence node {node.name!r} must be two-valued")
        node.index(ev.true_state)


def make_roles(
    net: NetworkDefinition,
    hypothesis: str,
    evidence: list[str],
    hypothesis_true_state: str | None = None,
    true_states: dict[str, str] | None = None,
) -> RoleAssignment:
    """Build a role assignment, picking default ``true`` labels when omitted."""
    true_states = true_states or {}
    hyp_state = hypothesis_true_state or default_true_state(net.node(hypothesis))
    roles = RoleAssignment(
        hypothesis,
        hyp_state,
        tuple(EvidenceRole(e, true_states.get(e) or default_true_state(net.node(e))) for e in evidence),
    )
    validate_roles(net, roles)
    return roles
