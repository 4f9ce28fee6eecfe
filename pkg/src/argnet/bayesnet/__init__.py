"""Discrete Bayesian networks: definitions, file formats, exact inference."""

from __future__ import annotations

from pathlib import Path

from .bif import UnsupportedFeature, parse_network_bif, serialize_network_bif
from .inference import joint_table, marginal, posterior
from .jsonio import (
    NetworkSchemaError,
    NetworkSyntaxError,
    network_to_dict,
    parse_network_json,
    serialize_network_json,
)
from .model import (
    ROW_TOLERANCE,
    Cpt,
    EvidenceRole,
    NetworkDefinition,
    NetworkError,
    NodeSpec,
    RoleAssignment,
    ZeroProbabilityEvidence,
    build_network,
    default_true_state,
    make_roles,
)
from .oracle import enumerate_joint_oracle
from .presets import PRESETS, big_net, preset, small_net

# Default roles for repository networks that the case studies use.
KNOWN_ROLES = {
    "asia": ("lung", ["asia", "smoke", "tub", "bronc", "xray", "dysp"]),
    "vole": ("H0", ["E1", "E2", "E3", "E4", "E5", "E6", "E7"]),
}


def load_network(path: str | Path, row_tolerance: float = ROW_TOLERANCE) -> NetworkDefinition:
    """Read a ``.json`` or ``.bif`` network file.

    Known repository networks (by file stem) get default roles when the file
    carries none.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        net = parse_network_json(text, row_tolerance)
    else:
        net = parse_network_bif(text, row_tolerance)
    if net.roles is None and path.stem.lower() in KNOWN_ROLES:
        hyp, evidence = KNOWN_ROLES[path.stem.lower()]
        net = net.with_roles(make_roles(net, hyp, evidence))
    return net


__all__ = [
    "Cpt",
    "ROW_TOLERANCE",
    "EvidenceRole",
    "KNOWN_ROLES",
    "NetworkDefinition",
    "NetworkError",
    "NetworkSchemaError",
    "NetworkSyntaxError",
    "NodeSpec",
    "PRESETS",
    "RoleAssignment",
    "UnsupportedFeature",
    "ZeroProbabilityEvidence",
    "big_net",
    "build_network",
    "default_true_state",
    "enumerate_joint_oracle",
    "joint_table",
    "load_network",
    "make_roles",
    "marginal",
    "network_to_dict",
    "parse_network_bif",
    "parse_network_json",
    "posterior",
    "preset",
    "serialize_network_bif",
    "serialize_network_json",
    "small_net",
]
