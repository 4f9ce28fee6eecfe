"""Built-in networks whose full CPTs are known: Big Net and Small Net.

Every node is two-valued with states ``("yes", "no")``. Rows are given
exactly as published, so no ``1 - p`` rounding creeps in.
"""

from __future__ import annotations

from .model import EvidenceRole, NetworkDefinition, NetworkError, NodeSpec, RoleAssignment, build_network

YES_NO = ("yes", "no")

# child -> (parent, row given parent=yes, row given parent=no)
_BIG_NET = {
    "B": ("A", (0.9, 0.1), (0.1, 0.9)),
    "C": ("A", (0.5, 0.5), (0.5, 0.5)),
    "D": ("A", (0.1, 0.9), (0.9, 0.1)),
    "one": ("B", (0.9, 0.1), (0.1, 0.9)),
    "two": ("B", (0.8, 0.2), (0.2, 0.8)),
    "three": ("B", (0.7, 0.3), (0.3, 0.7)),
    "four": ("C", (0.9, 0.1), (0.1, 0.9)),
    "five": ("C", (0.8, 0.2), (0.2, 0.8)),
    "six": ("C", (0.7, 0.3), (0.3, 0.7)),
    "seven": ("D", (0.9, 0.1), (0.1, 0.9)),
    "eight": ("D", (0.8, 0.2), (0.2, 0.8)),
    "nine": ("D", (0.7, 0.3), (0.3, 0.7)),
}

_SMALL_NET = {
    "CS": ("V", (0.9, 0.1), (0.1, 0.9)),
    "VT": ("V", (0.8, 0.2), (0.2, 0.8)),
    "I": ("CS", (0.7, 0.3), (0.3, 0.7)),
    "M": ("CS", (0.8, 0.2), (0.2, 0.8)),
    "RS": ("VT", (0.2, 0.8), (0.8, 0.2)),
    "WHO": ("VT", (0.8, 0.2), (0.2, 0.8)),
}


def _chain(name: str, root: str, children: dict, evidence: list[str]) -> NetworkDefinition:
    nodes = [NodeSpec(root, YES_NO)] + [NodeSpec(c, YES_NO) for c in children]
    arcs = [(parent, child) for child, (parent, _, _) in children.items()]
    cpts = {root: ([], [[0.5, 0.5]])}
    for child, (parent, given_yes, given_no) in children.items():
        cpts[child] = ([parent], [list(given_yes), list(given_no)])
    roles = RoleAssignment(root, "yes", tuple(EvidenceRole(e, "yes") for e in evidence))
    return build_network(name, nodes, arcs, cpts, roles)


def big_net() -> NetworkDefinition:
    return _chain(
        "big-net",
        "A",
        _BIG_NET,
        ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine"],
    )


def small_net() -> NetworkDefinition:
    return _chain("small-net", "V", _SMALL_NET, ["I", "M", "RS", "WHO"])


PRESETS = {"big-net": big_net, "small-net": small_net}


def preset(name: str) -> NetworkDefinition:
    try:
        return PRESETS[name]()
    except KeyError:
        raise NetworkError(
            f"unknown preset {name!r}; built-in presets are {sorted(PRESETS)}. "
            "Repository networks such as asia, alarm or vole must be loaded from a "
            "BIF or JSON file (see load_network)."
        ) from None
