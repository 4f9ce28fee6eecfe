"""Exact inference by variable elimination.

Factors are dense numpy arrays with one axis per variable. Variables are
eliminated greedily by minimum degree in the interaction graph of the
remaining factors; ties go to the lowest declared node index so that the
summation order, and hence every floating point result, is reproducible.
"""

from __future__ import annotations

import threading
from collections.abc import Iterable, Mapping

import numpy as np

from .model import NetworkDefinition, ZeroProbabilityEvidence


class Factor:
    __slots__ = ("scope", "values")

    def __init__(self, scope: tuple[int, ...], values: np.ndarray):
        self.scope = scope
        self.values = values

    def aligned(self, scope: tuple[int, ...]) -> np.ndarray:
        """View of the values broadcastable against ``scope``."""
        order = sorted(range(len(self.scope)), key=lambda i: scope.index(self.scope[i]))
        vals = np.transpose(self.values, order)
        present = {self.scope[i] for i in order}
        shape = []
        it = iter(vals.shape)
        for var in scope:
            shape.append(next(it) if var in present else 1)
        return vals.reshape(shape)

    def __mul__(self, other: Factor) -> Factor:
        scope = self.scope + tuple(v for v in other.scope if v not in self.scope)
        return Factor(scope, self.aligned(scope) * other.aligned(scope))

    def sum_out(self, var: int) -> Factor:
        axis = self.scope.index(var)
        return Factor(self.scope[:axis] + self.scope[axis + 1 :], self.values.sum(axis=axis))

    def reduce(self, var: int, state: int) -> Factor:
        axis = self.scope.index(var)
        return Factor(
            self.scope[:axis] + self.scope[axis + 1 :], np.take(self.values, state, axis=axis)
        )


def cpt_factors(net: NetworkDefinition) -> list[Factor]:
    factors = []
    for i, node in enumerate(net.nodes):
        cpt = net.cpts[node.name]
        parents = tuple(net.index_of(p) for p in cpt.parents)
        shape = tuple(net.nodes[p].card for p in parents) + (node.card,)
        factors.append(Factor(parents + (i,), cpt.table.reshape(shape)))
    return factors


def _min_degree_next(factors: list[Factor], remaining: set[int]) -> int:
    best, best_deg = -1, None
    for var in sorted(remaining):
        neighbours: set[int] = set()
        for f in factors:
            if var in f.scope:
                neighbours.update(f.scope)
        neighbours.discard(var)
        deg = len(neighbours)
        if best_deg is None or deg < best_deg:
            best, best_deg = var, deg
    return best


def eliminate(
    net: NetworkDefinition,
    keep: Iterable[int],
    evidence: Mapping[int, int] | None = None,
) -> Factor:
    """Unnormalized joint over ``keep`` with ``evidence`` (index -> state) fixed.

    The returned factor's scope follows the order of ``keep``.
    """
    keep = tuple(keep)
    evidence = dict(evidence or {})
    factors = []
    for f in cpt_factors(net):
        for var, state in evidence.items():
            if var in f.scope:
                f = f.reduce(var, state)
        factors.append(f)

    remaining = set(range(len(net.nodes))) - set(keep) - set(evidence)
    while remaining:
        var = _min_degree_next(factors, remaining)
        remaining.discard(var)
        touching = [f for f in factors if var in f.scope]
        rest = [f for f in factors if var not in f.scope]
        if touching:
            prod = touching[0]
            for f in touching[1:]:
                prod = prod * f
            rest.append(prod.sum_out(var))
        factors = rest

    result = Factor((), np.array(1.0))
    for f in factors:
        result = result * f
    if result.scope != keep:
        result = Factor(keep, result.aligned(keep))
    return result


def _encode_evidence(net: NetworkDefinition, evidence: Mapping[str, str]) -> dict[int, int]:
    return {net.index_of(name): net.node(name).index(state) for name, state in evidence.items()}


_cache: dict[tuple, float] = {}
_cache_lock = threading.Lock()
_CACHE_LIMIT = 1 << 18


def posterior(
    net: NetworkDefinition,
    target: str,
    target_state: str,
    evidence: Mapping[str, str] | None = None,
) -> float:
    """Exact ``P(target = target_state | evidence)``.

    ``evidence`` maps node names to state labels. With no evidence the
    node's marginal is returned.

    Raises:
        ZeroProbabilityEvidence: if the evidence has probability zero.
    """
    evidence = dict(evidence or {})
    key = (id(net), target, target_state, frozenset(evidence.items()))
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None and hit[0] is net:
        return hit[1]

    t = net.index_of(target)
    t_state = net.node(target).index(target_state)
    ev = _encode_evidence(net, evidence)
    if t in ev:
        mass = float(eliminate(net, (), ev).values)
        if not mass > 0.0:
            raise ZeroProbabilityEvidence(evidence)
        value = 1.0 if ev[t] == t_state else 0.0
    else:
        column = eliminate(net, (t,), ev).values
        mass = float(column.sum())
        if not mass > 0.0:
            raise ZeroProbabilityEvidence(evidence)
        value = float(column[t_state] / mass)

    with _cache_lock:
        if len(_cache) >= _CACHE_LIMIT:
            _cache.clear()
        _cache[key] = (net, value)
    return value


def marginal(net: NetworkDefinition, target: str) -> np.ndarray:
    """Full marginal distribution of ``target``."""
    column = eliminate(net, (net.index_of(target),)).values
    return column / column.sum()


def joint_table(net: NetworkDefinition, names: list[str]) -> np.ndarray:
    """Exact joint distribution over ``names`` (axes in the given order)."""
    f = eliminate(net, tuple(net.index_of(n) for n in names))
    return f.values / f.values.sum()
