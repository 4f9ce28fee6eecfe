"""Undirected communication graphs between agents.

The wheel is a hub (agent 0) linked to every other agent plus a cycle over
agents ``1 .. n-1``. For small-world graphs ``k`` counts neighbours per
side, so the ring lattice has degree ``2k`` before rewiring.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

TOPOLOGIES = ("null", "complete", "wheel", "small-world")


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class TopologyConfig:
    kind: str = "complete"
    k: int = 2
    rewiring_probability: float = 0.2

    def validate(self, n: int) -> None:
        if self.kind not in TOPOLOGIES:
            raise TopologyError(f"unknown social network {self.kind!r}; choose from {TOPOLOGIES}")
        if n < 1:
            raise TopologyError("number of agents must be positive")
        if self.kind == "small-world":
            if self.k < 1:
                raise TopologyError("small-world networks need k >= 1")
            if 2 * self.k >= n:
                raise TopologyError(f"small-world networks need 2k < n (k={self.k}, n={n})")
            if not 0.0 <= self.rewiring_probability <= 1.0:
                raise TopologyError("rewiring probability must be in [0, 1]")


@dataclass(frozen=True, eq=False)
class Graph:
    agent_count: int
    edges: frozenset[tuple[int, int]]
    _adjacency: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    def __post_init__(self):
        adj: list[set[int]] = [set() for _ in range(self.agent_count)]
        for u, v in self.edges:
            if u == v or not (0 <= u < self.agent_count and 0 <= v < self.agent_count):
                raise TopologyError(f"invalid edge ({u}, {v})")
            adj[u].add(v)
            adj[v].add(u)
        object.__setattr__(self, "_adjacency", tuple(tuple(sorted(a)) for a in adj))

    @classmethod
    def from_pairs(cls, n: int, pairs) -> Graph:
        return cls(n, frozenset((min(u, v), max(u, v)) for u, v in pairs))

    def edge_list(self) -> list[list[int]]:
        """Sorted ``[u, v]`` pairs; the returned list is shared, do not modify it."""
        return self._edge_rows

    @cached_property
    def _edge_rows(self) -> list[list[int]]:
        return [list(e) for e in sorted(self.edges)]

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency as read-only (indptr, indices) with ascending neighbour ids."""
        return self._csr

    @cached_property
    def _csr(self) -> tuple[np.ndarray, np.ndarray]:
        degrees = np.fromiter((len(a) for a in self._adjacency), dtype=np.int64, count=self.agent_count)
        indptr = np.zeros(self.agent_count + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        indices = np.fromiter(
            (j for nbrs in self._adjacency for j in nbrs), dtype=np.int64, count=int(indptr[-1])
        )
        indptr.setflags(write=False)
        indices.setflags(write=False)
        return indptr, indices


def neighbors(graph: Graph, agent_id: int) -> tuple[int, ...]:
    if not 0 <= agent_id < graph.agent_count:
        raise IndexError(f"agent id {agent_id} out of range for {graph.agent_count} agents")
    return graph._adjacency[agent_id]


def _pick(rng: np.random.Generator, k: int) -> int:
    return min(int(rng.random() * k), k - 1)


def _small_world(n: int, k: int, p: float, rng: np.random.Generator) -> set[tuple[int, int]]:
    adj: list[set[int]] = [set() for _ in range(n)]
    lattice = []
    for u in range(n):
        for j in range(1, k + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
            lattice.append((u, v))
    for u, v in lattice:
        if rng.random() >= p:
            continue
        candidates = [w for w in range(n) if w != u and w not in adj[u]]
        if not candidates:
            continue
        w = candidates[_pick(rng, len(candidates))]
        adj[u].discard(v)
        adj[v].discard(u)
        adj[u].add(w)
        adj[w].add(u)
    return {(u, v) for u in range(n) for v in adj[u] if u < v}


def generate(config: TopologyConfig, n: int, rng: np.random.Generator) -> Graph:
    """Build the communication graph.

    Only small-world generation consumes random numbers: one per lattice
    edge, plus one more for each edge that is rewired.
    """
    config.validate(n)
    if config.kind == "small-world":
        return Graph(n, frozenset(_small_world(n, config.k, config.rewiring_probability, rng)))
    return _fixed_graph(config.kind, n)


@lru_cache(maxsize=64)
def _fixed_graph(kind: str, n: int) -> Graph:
    # Deterministic topologies are immutable, so one instance per size is shared.
    if kind == "null":
        edges: set[tuple[int, int]] = set()
    elif kind == "complete":
        edges = {(u, v) for u in range(n) for v in range(u + 1, n)}
    else:
        edges = {(0, v) for v in range(1, n)}
        rim = list(range(1, n))
        if len(rim) == 2:
            edges.add((1, 2))
        elif len(rim) >= 3:
            for a, b in zip(rim, rim[1:] + rim[:1]):
                edges.add((min(a, b), max(a, b)))
    return Graph(n, frozenset(edges))
