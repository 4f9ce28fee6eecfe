"""Brute-force enumeration over the full joint distribution.

Used only to check :func:`argnet.bayesnet.posterior`. The joint is built with a
single ``einsum`` over all CPTs, sharing no code with the elimination path.
"""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .model import NetworkDefinition, NetworkError, ZeroProbabilityEvidence

MAX_JOINT_STATES = 1 << 24


def full_joint(net: NetworkDefinition) -> np.ndarray:
    if not net.nodes:
        raise NetworkError("cannot enumerate an empty network")
    size = 1
    for node in net.nodes:
        size *= node.card
    if size > MAX_JOINT_STATES:
        raise NetworkError(f"joint state space of {size} exceeds {MAX_JOINT_STATES}")
    operands = []
    for i, node in enumerate(net.nodes):
        cpt = net.cpts[node.name]
        axes = [net.index_of(p) for p in cpt.parents] + [i]
        shape = [net.nodes[a].card for a in axes]
        operands += [cpt.table.reshape(shape), axes]
    return np.einsum(*operands, list(range(len(net.nodes))))


def enumerate_joint_oracle(
    net: NetworkDefinition,
    target: str,
    target_state: str,
    evidence: Mapping[str, str] | None = None,
) -> float:
    evidence = dict(evidence or {})
    joint = full_joint(net)
    index: list = [slice(None)] * len(net.nodes)
    for name, state in evidence.items():
        index[net.index_of(name)] = net.node(name).index(state)
    t = net.index_of(target)
    t_state = net.node(target).index(target_state)

    conditioned = joint[tuple(index)]
    mass = conditioned.sum()
    if not mass > 0.0:
        raise ZeroProbabilityEvidence(evidence)
    if target in evidence:
        return 1.0 if evidence[target] == target_state else 0.0
    index[t] = t_state
    return float(joint[tuple(index)].sum() / mass)
