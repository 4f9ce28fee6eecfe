"""Reader and writer for the discrete subset of BIF 0.15.

Supported: ``network``, ``variable`` blocks with ``type discrete``, and
``probability`` blocks using ``table``, labeled entry rows and ``default``.
``//`` and ``/* */`` comments are skipped. A ``table`` inside a conditional
block lists the node's states fastest, parent configurations row-major in
the declared parent order.

Roles survive a round trip as network properties::

    network asia {
      property role.hypothesis = lung yes ;
      property role.evidence = smoke yes ;
    }
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product

from .jsonio import NetworkSyntaxError
from .model import (
    ROW_TOLERANCE,
    EvidenceRole,
    NetworkDefinition,
    NetworkError,
    NodeSpec,
    RoleAssignment,
    build_network,
)


class UnsupportedFeature(NetworkSyntaxError):
    pass


@dataclass
class _Tok:
    kind: str  # "word", "punct", "property", "eof"
    text: str
    line: int
    col: int


_PUNCT = set("{}()[],;|")
_WORD = re.compile(r'"[^"\n]*"|(?:[^\s{}()\[\],;|"/]|/(?![/*]))+')


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k: int):
        nonlocal i, line, col
        for ch in text[i : i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = text[i]
        if ch.isspace():
            advance(1)
        elif text.startswith("//", i):
            end = text.find("\n", i)
            advance((n if end < 0 else end) - i)
        elif text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise NetworkSyntaxError("unterminated comment", line, col)
            advance(end + 2 - i)
        elif ch in _PUNCT:
            toks.append(_Tok("punct", ch, line, col))
            advance(1)
        else:
            m = _WORD.match(text, i)
            if not m:
                raise NetworkSyntaxError(f"unexpected character {ch!r}", line, col)
            word = m.group(0)
            toks.append(_Tok("word", word.strip('"'), line, col))
            advance(len(word))
            if word == "property":
                start_line, start_col = line, col
                end = text.find(";", i)
                if end < 0:
                    raise NetworkSyntaxError("property without terminating ';'", start_line, start_col)
                toks[-1] = _Tok("property", text[i:end].strip(), toks[-1].line, toks[-1].col)
                advance(end + 1 - i)
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None) -> NetworkSyntaxError:
        tok = tok or self.peek()
        return NetworkSyntaxError(msg, tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text or tok.kind not in ("punct", "word"):
            shown = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected {text!r}, found {shown}", tok)
        return tok

    def word(self, what: str) -> _Tok:
        tok = self.next()
        if tok.kind != "word":
            shown = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected {what}, found {shown}", tok)
        return tok

    def number(self) -> float:
        tok = self.word("a probability")
        try:
            return float(tok.text)
        except ValueError:
            raise self.error(f"invalid number {tok.text!r}", tok) from None

    def numbers_until_semicolon(self) -> list[float]:
        values = [self.number()]
        while self.peek().text == ",":
            self.next()
            values.append(self.number())
        self.expect(";")
        return values

    def names_in_parens(self) -> list[str]:
        self.expect("(")
        names = [self.word("a state label").text]
        while self.peek().text == ",":
            self.next()
            names.append(self.word("a state label").text)
        self.expect(")")
        return names


def parse_network_bif(text: str, row_tolerance: float = ROW_TOLERANCE) -> NetworkDefinition:
    p = _Parser(text)
    name = "network"
    properties: list[tuple[str, _Tok]] = []
    variables: dict[str, NodeSpec] = {}
    var_toks: dict[str, _Tok] = {}
    order: list[str] = []
    probs: dict[str, tuple[list[str], list[list[float]]]] = {}
    prob_toks: dict[str, _Tok] = {}
    seen_network = False

    while p.peek().kind != "eof":
        tok = p.next()
        if tok.text == "network" and tok.kind == "word":
            if seen_network:
                raise p.error("duplicate network block", tok)
            seen_network = True
            name = p.word("a network name").text
            p.expect("{")
            while p.peek().text != "}":
                t = p.next()
                if t.kind != "property":
                    raise p.error(f"unexpected {t.text or 'end of input'!r} in network block", t)
                properties.append((t.text, t))
            p.expect("}")
        elif tok.text == "variable" and tok.kind == "word":
            vtok = p.word("a variable name")
            if vtok.text in variables:
                raise p.error(f"variable {vtok.text!r} declared twice", vtok)
            p.expect("{")
            states = None
            while p.peek().text != "}":
                t = p.next()
                if t.kind == "property":
                    continue
                if t.text != "type":
                    raise p.error(f"unexpected {t.text or 'end of input'!r} in variable block", t)
                kind = p.word("a variable type")
                if kind.text != "discrete":
                    raise UnsupportedFeature(
                        f"unsupported feature: {kind.text} variables", kind.line, kind.col
                    )
                p.expect("[")
                count_tok = p.word("a state count")
                try:
                    count = int(count_tok.text)
                except ValueError:
                    raise p.error(f"invalid state count {count_tok.text!r}", count_tok) from None
                p.expect("]")
                p.expect("{")
                states = [p.word("a state label").text]
                while p.peek().text == ",":
                    p.next()
                    states.append(p.word("a state label").text)
                p.expect("}")
                p.expect(";")
                if len(states) != count:
                    raise p.error(
                        f"variable {vtok.text!r} declares {count} states but lists {len(states)}",
                        count_tok,
                    )
            p.expect("}")
            if states is None:
                raise p.error(f"variable {vtok.text!r} has no type declaration", vtok)
            variables[vtok.text] = NodeSpec(vtok.text, tuple(states))
            var_toks[vtok.text] = vtok
            order.append(vtok.text)
        elif tok.text == "probability" and tok.kind == "word":
            before = set(probs)
            _parse_probability(p, tok, variables, probs, row_tolerance)
            prob_toks.update({child: tok for child in set(probs) - before})
        else:
            raise p.error(f"unexpected {tok.text!r} at top level", tok)

    nodes = [variables[v] for v in order]
    arcs = [(parent, child) for child in order if child in probs for parent in probs[child][0]]
    for v in order:
        if v not in probs:
            t = var_toks[v]
            raise NetworkSyntaxError(f"variable {v!r} has no probability block", t.line, t.col)
    try:
        net = build_network(name, nodes, arcs, probs, row_tolerance=row_tolerance)
    except NetworkSyntaxError:
        raise
    except NetworkError as exc:
        # Structural errors (e.g. cycles) are reported at the first block they name.
        msg = str(exc)
        where = next((prob_toks[v] for v in order if repr(v) in msg and v in prob_toks), None)
        where = where or next(iter(prob_toks.values()), None) or _Tok("eof", "", 1, 1)
        raise NetworkSyntaxError(msg, where.line, where.col) from None
    roles = _roles_from_properties(net, properties)
    return net.with_roles(roles) if roles else net


def _parse_probability(p: _Parser, tok: _Tok, variables, probs, row_tolerance: float) -> None:
    p.expect("(")
    child_tok = p.word("a variable name")
    parents: list[_Tok] = []
    if p.peek().text == "|":
        p.next()
        parents.append(p.word("a parent name"))
        while p.peek().text == ",":
            p.next()
            parents.append(p.word("a parent name"))
    p.expect(")")
    for t in [child_tok, *parents]:
        if t.text not in variables:
            raise p.error(f"probability block references undeclared variable {t.text!r}", t)
    if child_tok.text in probs:
        raise p.error(f"second probability block for {child_tok.text!r}", child_tok)
    child = variables[child_tok.text]
    parent_specs = [variables[t.text] for t in parents]
    configs = list(product(*(ps.states for ps in parent_specs)))
    rows: dict[tuple[str, ...], list[float]] = {}
    row_toks: dict[tuple[str, ...], _Tok] = {}
    default: list[float] | None = None
    default_tok = tok
    table: list[float] | None = None

    p.expect("{")
    while p.peek().text != "}":
        t = p.peek()
        if t.kind == "eof":
            raise p.error("unterminated probability block", t)
        if t.kind == "property":
            p.next()
        elif t.text == "table":
            t_table = p.next()
            table = p.numbers_until_semicolon()
            if len(table) != len(configs) * child.card:
                raise p.error(
                    f"table for {child.name!r} has {len(table)} entries, expected "
                    f"{len(configs) * child.card}",
                    t,
                )
        elif t.text == "default":
            p.next()
            default = p.numbers_until_semicolon()
            default_tok = t
            if len(default) != child.card:
                raise p.error(f"default row for {child.name!r} needs {child.card} entries", t)
        elif t.text == "(":
            labels = p.names_in_parens()
            key = tuple(labels)
            if len(labels) != len(parent_specs):
                raise p.error(f"entry for {child.name!r} lists {len(labels)} parent states", t)
            for label, ps in zip(labels, parent_specs):
                if label not in ps.states:
                    raise p.error(f"{label!r} is not a state of {ps.name!r}", t)
            if key in rows:
                raise p.error(f"duplicate entry {labels} for {child.name!r}", t)
            values = p.numbers_until_semicolon()
            if len(values) != child.card:
                raise p.error(f"entry for {child.name!r} needs {child.card} probabilities", t)
            rows[key] = values
            row_toks[key] = t
        else:
            raise p.error(f"unexpected {t.text!r} in probability block", t)
    p.expect("}")

    if table is not None:
        k = child.card
        table_rows = [table[r * k : (r + 1) * k] for r in range(len(configs))]
        for cfg, row in zip(configs, table_rows):
            rows.setdefault(cfg, row)
            row_toks.setdefault(cfg, t_table)
    out = []
    for cfg in configs:
        row = rows.get(cfg, default)
        if row is None:
            raise p.error(f"probability block for {child.name!r} has no row for {list(cfg)}", tok)
        where = row_toks.get(cfg, default_tok)
        if any(not 0.0 <= v <= 1.0 for v in row):
            raise p.error(f"probability outside [0, 1] in row {list(cfg)} of {child.name!r}", where)
        if abs(sum(row) - 1.0) > row_tolerance:
            raise p.error(f"row {list(cfg)} of {child.name!r} sums to {sum(row)!r}, not 1", where)
        out.append(row)
    probs[child.name] = ([ps.name for ps in parent_specs], out)


def _roles_from_properties(net: NetworkDefinition, properties) -> RoleAssignment | None:
    hyp = None
    evidence = []
    for text, tok in properties:
        key, _, value = text.partition("=")
        key = key.strip()
        if key not in ("role.hypothesis", "role.evidence"):
            continue
        parts = value.split()
        if len(parts) != 2:
            raise NetworkSyntaxError(f"{key} property needs '<node> <true-state>'", tok.line, tok.col)
        if key == "role.hypothesis":
            hyp = tuple(parts)
        else:
            evidence.append(EvidenceRole(parts[0], parts[1]))
    if hyp is None:
        if evidence:
            raise NetworkError("role.evidence given without role.hypothesis")
        return None
    return RoleAssignment(hyp[0], hyp[1], tuple(evidence))


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_network_bif(net: NetworkDefinition) -> str:
    lines = [f"network {net.name} {{"]
    if net.roles is not None:
        lines.append(f"  property role.hypothesis = {net.roles.hypothesis} {net.roles.hypothesis_true_state} ;")
        for e in net.roles.evidence:
            lines.append(f"  property role.evidence = {e.node} {e.true_state} ;")
    lines.append("}")
    for node in net.nodes:
        lines.append(f"variable {node.name} {{")
        lines.append(f"  type discrete [ {node.card} ] {{ {', '.join(node.states)} }};")
        lines.append("}")
    for node in net.nodes:
        cpt = net.cpts[node.name]
        if cpt.parents:
            lines.append(f"probability ( {node.name} | {', '.join(cpt.parents)} ) {{")
            configs = product(*(net.node(p).states for p in cpt.parents))
            for cfg, row in zip(configs, cpt.table):
                lines.append(f"  ({', '.join(cfg)}) {', '.join(_fmt(v) for v in row)};")
        else:
            lines.append(f"probability ( {node.name} ) {{")
            lines.append(f"  table {', '.join(_fmt(v) for v in cpt.table[0])};")
        lines.append("}")
    return "\n".join(lines) + "\n"
