import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from argnet.bayesnet import (
    NetworkError,
    NetworkSchemaError,
    NetworkSyntaxError,
    UnsupportedFeature,
    load_network,
    network_to_dict,
    parse_network_bif,
    parse_network_json,
    preset,
    serialize_network_bif,
    serialize_network_json,
)

from conftest import BNLEARN, MALFORMED

REPO_NETS = sorted(BNLEARN.glob("*.bif"))
MALFORMED_FILES = sorted(MALFORMED.glob("*.bif"))


def test_big_net_json_fixture_counts(big):
    net = parse_network_json(serialize_network_json(big))
    assert len(net.nodes) == 13 and len(net.arcs) == 12
    assert net.roles == big.roles


def test_single_root_json():
    doc = {"name": "one", "nodes": [{"name": "A", "states": ["yes", "no"]}], "arcs": [],
           "cpts": {"A": {"parents": [], "rows": [[0.5, 0.5]]}}}
    net = parse_network_json(json.dumps(doc))
    assert net.names == ["A"] and net.roles is None


def test_json_cycle_rejected():
    doc = {
        "nodes": [{"name": "A", "states": ["y", "n"]}, {"name": "B", "states": ["y", "n"]}],
        "arcs": [["A", "B"], ["B", "A"]],
        "cpts": {"A": {"parents": ["B"], "rows": [[0.5, 0.5], [0.5, 0.5]]},
                 "B": {"parents": ["A"], "rows": [[0.5, 0.5], [0.5, 0.5]]}},
    }
    with pytest.raises(NetworkError, match="cycle"):
        parse_network_json(json.dumps(doc))


def test_json_syntax_error_is_positioned():
    with pytest.raises(NetworkSyntaxError) as exc:
        parse_network_json('{"nodes": [\n  {"name": "A",, }]}')
    assert exc.value.line == 2


def test_json_schema_violation():
    with pytest.raises(NetworkSchemaError):
        parse_network_json(json.dumps({"nodes": [], "arcs": [], "cpts": {}, "extra": 1}))


def test_json_roles_default_true_state():
    doc = network_to_dict(preset("small-net"))
    doc["roles"] = {"hypothesis": "V", "evidence": [{"node": "WHO"}]}
    net = parse_network_json(json.dumps(doc))
    assert net.roles.hypothesis_true_state == "yes"
    assert net.roles.evidence[0].true_state == "yes"


def test_asia_counts(asia):
    assert len(asia.nodes) == 8 and len(asia.arcs) == 8
    assert asia.names == ["asia", "tub", "smoke", "lung", "bronc", "either", "xray", "dysp"]
    assert asia.name == "unknown"


@pytest.mark.parametrize("path", REPO_NETS, ids=lambda p: p.stem)
def test_bif_round_trip_fixpoint(path):
    first = parse_network_bif(path.read_text(), row_tolerance=1e-6)
    text = serialize_network_bif(first)
    second = parse_network_bif(text, row_tolerance=1e-6)
    assert second.structurally_equal(first)
    assert second.name == first.name
    assert serialize_network_bif(second) == text


@pytest.mark.parametrize("path", REPO_NETS, ids=lambda p: p.stem)
def test_json_round_trip_fixpoint(path):
    first = load_network(path, row_tolerance=1e-6)
    text = serialize_network_json(first)
    second = parse_network_json(text, row_tolerance=1e-6)
    assert second.structurally_equal(first)
    assert serialize_network_json(second) == text


def test_bif_roles_survive_round_trip(asia):
    assert asia.roles is not None
    again = parse_network_bif(serialize_network_bif(asia))
    assert again.roles == asia.roles


def test_child_state_label_with_slash():
    net = load_network(BNLEARN / "child.bif")
    assert any("/" in s for node in net.nodes for s in node.states)


@pytest.mark.parametrize("path", MALFORMED_FILES, ids=lambda p: p.stem)
def test_malformed_bif_rejected_with_position(path):
    with pytest.raises(NetworkSyntaxError) as exc:
        parse_network_bif(path.read_text())
    err = exc.value
    assert err.line >= 1 and err.column >= 1
    assert str(err).startswith(f"line {err.line}, column {err.column}:")


def test_continuous_variables_are_unsupported():
    with pytest.raises(UnsupportedFeature, match="unsupported feature"):
        parse_network_bif((MALFORMED / "06_continuous_variable.bif").read_text())


def test_row_summing_to_point_nine_is_rejected():
    with pytest.raises(NetworkSyntaxError, match="sums to 0.9"):
        parse_network_bif((MALFORMED / "04_row_sums_to_point_nine.bif").read_text())


def test_bif_comments_properties_and_default_rows():
    text = """
    // leading comment
    network demo { property author = someone ; }
    /* block
       comment */
    variable A { type discrete [ 2 ] { yes, no }; property note = x ; }
    variable B { type discrete [ 2 ] { "on", "off" }; }
    probability ( A ) { table 0.3, 0.7; }
    probability ( B | A ) { default 0.5, 0.5; (yes) 0.9, 0.1; }
    """
    net = parse_network_bif(text)
    assert net.name == "demo"
    assert net.node("B").states == ("on", "off")
    assert net.cpts["B"].table.tolist() == [[0.9, 0.1], [0.5, 0.5]]


def test_conditional_table_form_is_row_major():
    text = """
    network t { }
    variable A { type discrete [ 2 ] { a0, a1 }; }
    variable B { type discrete [ 2 ] { b0, b1 }; }
    probability ( A ) { table 0.5, 0.5; }
    probability ( B | A ) { table 0.9, 0.1, 0.2, 0.8; }
    """
    net = parse_network_bif(text)
    assert net.cpts["B"].table.tolist() == [[0.9, 0.1], [0.2, 0.8]]


probabilities = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(probabilities, min_size=3, max_size=3), st.integers(min_value=2, max_value=3))
def test_random_networks_round_trip(ps, card):
    from argnet.bayesnet import NodeSpec, build_network

    states = tuple(f"s{i}" for i in range(card))

    def row(p):
        rest = (1.0 - p) / (card - 1)
        return [p] + [rest] * (card - 1)

    nodes = [NodeSpec("R", states), NodeSpec("C", states)]
    cpts = {"R": ([], [row(ps[0])]), "C": (["R"], [row(ps[(i % 2) + 1]) for i in range(card)])}
    net = build_network("rand", nodes, [("R", "C")], cpts)
    for text, parse in ((serialize_network_bif(net), parse_network_bif), (serialize_network_json(net), parse_network_json)):
        again = parse(text)
        assert again.structurally_equal(net)
