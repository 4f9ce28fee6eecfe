"""JSON network format.

Example (a two-node network, ``rain -> wet``)::

    {
      "name": "lawn",
      "nodes": [{"name": "rain", "states": ["yes", "no"]},
                {"name": "wet",  "states": ["yes", "no"]}],
      "arcs": [["rain", "wet"]],
      "cpts": {
        "rain": {"parents": [], "rows": [[0.2, 0.8]]},
        "wet":  {"parents": ["rain"], "rows": [[0.9, 0.1], [0.1, 0.9]]}
      },
      "roles": {"hypothesis": "rain", "hypothesis_true_state": "yes",
                "evidence": [{"node": "wet", "true_state": "yes"}]}
    }

Rows enumerate parent configurations row-major in the declared parent order:
with parents ``[a, b]`` of states ``[yes, no]`` the rows are
``(a=yes, b=yes), (a=yes, b=no), (a=no, b=yes), (a=no, b=no)``.
"""

from __future__ import annotations

import json

import jsonschema

from .model import (
    ROW_TOLERANCE,
    EvidenceRole,
    NetworkDefinition,
    NetworkError,
    NodeSpec,
    RoleAssignment,
    build_network,
    default_true_state,
)


class NetworkSyntaxError(NetworkError):
    """Malformed input text, with a 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


SCHEMA = {
    "type": "object",
    "required": ["nodes", "arcs", "cpts"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "states"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "states": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
        "arcs": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "string"},
                "minItems": 2,
                "maxItems": 2,
            },
        },
        "cpts": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["parents", "rows"],
                "additionalProperties": False,
                "properties": {
                    "parents": {"type": "array", "items": {"type": "string"}},
                    "rows": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "number"}},
                    },
                },
            },
        },
        "roles": {
            "type": "object",
            "required": ["hypothesis", "evidence"],
            "additionalProperties": False,
            "properties": {
                "hypothesis": {"type": "string"},
                "hypothesis_true_state": {"type": "string"},
                "evidence": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["node"],
                        "additionalProperties": False,
                        "properties": {
                            "node": {"type": "string"},
                            "true_state": {"type": "string"},
                        },
                    },
                },
            },
        },
    },
}


class NetworkSchemaError(NetworkError):
    pass


def parse_network_json(text: str, row_tolerance: float = ROW_TOLERANCE) -> NetworkDefinition:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise NetworkSchemaError(f"schema violation at {where}: {exc.message}") from None

    nodes = [NodeSpec(n["name"], tuple(n["states"])) for n in doc["nodes"]]
    arcs = [tuple(a) for a in doc["arcs"]]
    cpts = {name: (c["parents"], c["rows"]) for name, c in doc["cpts"].items()}
    net = build_network(doc.get("name", "network"), nodes, arcs, cpts, row_tolerance=row_tolerance)

    if "roles" in doc:
        r = doc["roles"]
        hyp = r["hypothesis"]
        roles = RoleAssignment(
            hyp,
            r.get("hypothesis_true_state") or default_true_state(net.node(hyp)),
            tuple(
                EvidenceRole(e["node"], e.get("true_state") or default_true_state(net.node(e["node"])))
                for e in r["evidence"]
            ),
        )
        net = net.with_roles(roles)
    return net


def network_to_dict(net: NetworkDefinition) -> dict:
    doc = {
        "name": net.name,
        "nodes": [{"name": n.name, "states": list(n.states)} for n in net.nodes],
        "arcs": [list(a) for a in net.arcs],
        "cpts": {
            n.name: {
                "parents": list(net.cpts[n.name].parents),
                "rows": net.cpts[n.name].table.tolist(),
            }
            for n in net.nodes
        },
    }
    if net.roles is not None:
        doc["roles"] = {
            "hypothesis": net.roles.hypothesis,
            "hypothesis_true_state": net.roles.hypothesis_true_state,
            "evidence": [{"node": e.node, "true_state": e.true_state} for e in net.roles.evidence],
        }
    return doc


def serialize_network_json(net: NetworkDefinition) -> str:
    return json.dumps(network_to_dict(net), indent=2) + "\n"
