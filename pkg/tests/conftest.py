from __future__ import annotations

import os
from pathlib import Path

import pytest

from argnet.bayesnet import build_network, load_network, make_roles, NodeSpec, preset

DATA = Path(__file__).parent / "data"
BNLEARN = DATA / "bnlearn"
MALFORMED = DATA / "malformed"
YES_NO = ("yes", "no")


def contradiction_net():
    """Two evidence nodes that copy / negate a latent node, so marginal sampling can
    produce a jointly impossible pair (E1=yes and E2=yes)."""
    nodes = [NodeSpec(n, YES_NO) for n in ("H", "X", "E1", "E2")]
    arcs = [("H", "X"), ("X", "E1"), ("X", "E2")]
    cpts = {
        "H": ([], [[0.5, 0.5]]),
        "X": (["H"], [[0.6, 0.4], [0.4, 0.6]]),
        "E1": (["X"], [[1.0, 0.0], [0.0, 1.0]]),
        "E2": (["X"], [[0.0, 1.0], [1.0, 0.0]]),
    }
    net = build_network("contradiction", nodes, arcs, cpts)
    return net.with_roles(make_roles(net, "H", ["E1", "E2"]))


def vole_path() -> Path | None:
    env = os.environ.get("ARGNET_VOLE_NETWORK")
    if env:
        return Path(env)
    for suffix in (".bif", ".json"):
        p = DATA / f"vole{suffix}"
        if p.is_file():
            return p
    return None


@pytest.fixture(scope="session")
def big():
    return preset("big-net")


@pytest.fixture(scope="session")
def small():
    return preset("small-net")


@pytest.fixture(scope="session")
def asia():
    return load_network(BNLEARN / "asia.bif")


@pytest.fixture(scope="session")
def asia_path():
    return str(BNLEARN / "asia.bif")
