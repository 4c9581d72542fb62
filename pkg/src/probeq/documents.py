"""JSON documents for automata and circuits.

Rationals are written as "p" or "p/q" strings. Matrices are lists of
``[row, col, weight]`` entries with zeros omitted. Printing is canonical:
sorted keys, sorted entries and reduced rationals, so
``print_document(parse_document(t)) == t`` for canonical text ``t``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Union

from .circuits import ADD, CONST, MUL, SUB, ArithmeticCircuit, Gate
from .cost import EPS, CostAutomaton, validate
from .errors import ParseError, ProbeqError, ValidationError
from .numerics import ZERO, QMatrix
from .vpa import VisiblyAlphabet, WeightedVPA
from .weighted import WeightedAutomaton

VERSION = 1
KINDS = ("weighted", "cost", "vpa", "circuit")
Model = Union[WeightedAutomaton, CostAutomaton, WeightedVPA, ArithmeticCircuit]


@dataclass(frozen=True)
class Document:
    kind: str
    model: Model
    version: int = VERSION


def parse_rational(x: Any, where: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise ParseError(f"expected a rational string, got {json.dumps(x)}", where)
    s = x.strip() if isinstance(x, str) else str(x)
    if any(ch in s for ch in ".eE") or not s:
        raise ParseError(f"{json.dumps(x)} is not an exact rational (write p or p/q)", where)
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{json.dumps(x)} is not a rational", where) from None


def format_rational(x) -> str:
    return str(Fraction(x))


def _field(obj: Dict, key: str, where: str, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"missing field {key!r}", where)
    val = obj[key]
    if kind is not None and not isinstance(val, kind) or isinstance(val, bool) and kind is int:
        raise ParseError(f"field {key!r} has the wrong type", f"{where}.{key}" if where else key)
    return val


def _index(x: Any, n: int, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError("state index must be an integer", where)
    if not 0 <= x < n:
        raise ValidationError(f"state index {x} out of range 0..{n - 1}", where)
    return x


def _symbols(xs: Any, where: str) -> List[str]:
    if not isinstance(xs, list) or not all(isinstance(x, str) and x for x in xs):
        raise ParseError("expected a list of non-empty symbol strings", where)
    if len(set(xs)) != len(xs):
        raise ValidationError("duplicate symbols", where)
    return xs


def _vector(xs: Any, n: int, where: str) -> List[Fraction]:
    if not isinstance(xs, list):
        raise ParseError("expected a list of rationals", where)
    if len(xs) != n:
        raise ValidationError(f"expected {n} entries, got {len(xs)}", where)
    return [parse_rational(x, f"{where}[{i}]") for i, x in enumerate(xs)]


def _matrix(entries: Any, n: int, where: str) -> QMatrix:
    if not isinstance(entries, list):
        raise ParseError("expected a list of [row, col, weight] entries", where)
    rows = [[ZERO] * n for _ in range(n)]
    seen = set()
    for k, e in enumerate(entries):
        loc = f"{where}[{k}]"
        if not isinstance(e, list) or len(e) != 3:
            raise ParseError("entry must be [row, col, weight]", loc)
        i, j = _index(e[0], n, loc), _index(e[1], n, loc)
        if (i, j) in seen:
            raise ValidationError(f"duplicate entry for ({i}, {j})", loc)
        seen.add((i, j))
        rows[i][j] = parse_rational(e[2], loc)
    return QMatrix(rows) if n else QMatrix.zeros(0, 0)


def _entries(m: QMatrix) -> List[list]:
    return [[i, j, format_rational(x)] for i in range(m.rows) for j, x in enumerate(m.row(i)) if x]


def _parse_weighted(obj: Dict) -> WeightedAutomaton:
    n = _field(obj, "states", "", int)
    alphabet = _symbols(_field(obj, "alphabet", ""), "alphabet")
    trans = _field(obj, "transitions", "", dict)
    extra = set(trans) - set(alphabet)
    if extra:
        raise ValidationError(f"transitions for symbols outside the alphabet: {sorted(extra)}", "transitions")
    mats = {a: _matrix(trans.get(a, []), n, f"transitions.{a}") for a in alphabet}
    return WeightedAutomaton(
        tuple(alphabet), mats,
        QMatrix.row_vector(_vector(_field(obj, "initial", ""), n, "initial")) if n else QMatrix.zeros(1, 0),
        QMatrix.col_vector(_vector(_field(obj, "final", ""), n, "final")) if n else QMatrix.zeros(0, 1),
    )


def _print_weighted(a: WeightedAutomaton) -> Dict:
    return {
        "states": a.n,
        "alphabet": list(a.alphabet),
        "initial": [format_rational(x) for x in a.initial.row(0)],
        "final": [format_rational(x) for x in a.final.entries()],
        "transitions": {s: _entries(a.transitions[s]) for s in a.alphabet},
    }


def _parse_cost(obj: Dict) -> CostAutomaton:
    n = _field(obj, "states", "", int)
    s = _field(obj, "counters", "", int)
    alphabet = _symbols(_field(obj, "alphabet", ""), "alphabet")
    if EPS in alphabet:
        raise ValidationError(f"{EPS!r} is reserved for epsilon transitions", "alphabet")
    arcs = []
    seen = set()
    raw = _field(obj, "transitions", "", list)
    for k, e in enumerate(raw):
        loc = f"transitions[{k}]"
        if not isinstance(e, list) or len(e) != 5:
            raise ParseError("transition must be [src, symbol, dst, weight, cost]", loc)
        src, sym, dst, w, cost = e
        src, dst = _index(src, n, loc), _index(dst, n, loc)
        if sym != EPS and sym not in alphabet:
            raise ValidationError(f"unknown symbol {sym!r}", loc)
        if not isinstance(cost, list) or not all(isinstance(c, int) and not isinstance(c, bool) for c in cost):
            raise ParseError("cost must be a list of integers", loc)
        if len(cost) != s:
            raise ValidationError(f"cost vector has {len(cost)} entries, expected {s}", loc)
        if any(c not in (-1, 0, 1) for c in cost):
            raise ValidationError(f"cost vector {cost} outside {{-1,0,1}}^{s}", loc)
        key = (src, sym, dst, tuple(cost))
        if key in seen:
            raise ValidationError("duplicate transition", loc)
        seen.add(key)
        arcs.append((src, sym, dst, parse_rational(w, loc), cost))
    a = CostAutomaton.build(n, s, alphabet, arcs,
                            _vector(_field(obj, "initial", ""), n, "initial"),
                            _vector(_field(obj, "final", ""), n, "final"))
    for i, row in enumerate(a.epsilon):
        total = sum((e.norm1() for e in row), ZERO)
        if total >= 1:
            raise ValidationError(f"epsilon row {i} has total weight {total}; it must be below 1",
                                  f"transitions (epsilon row {i})")
    rep = validate(a)
    if not rep.ok:
        raise ValidationError("; ".join(rep.violations), "transitions")
    return a


def _print_cost(a: CostAutomaton) -> Dict:
    arcs = [[i, sym, j, format_rational(w), list(v)] for i, sym, j, w, v in a.arcs() if w]
    arcs.sort(key=lambda e: (e[1] == EPS, e[1], e[0], e[2], e[4]))
    return {
        "states": a.n,
        "counters": a.s,
        "alphabet": list(a.alphabet),
        "initial": [format_rational(x) for x in a.initial.row(0)],
        "final": [format_rational(x) for x in a.final.entries()],
        "transitions": arcs,
    }


def _parse_vpa(obj: Dict) -> WeightedVPA:
    n = _field(obj, "states", "", int)
    calls = _symbols(_field(obj, "calls", ""), "calls")
    rets = _symbols(_field(obj, "returns", ""), "returns")
    ints = _symbols(_field(obj, "internals", ""), "internals")
    try:
        alphabet = VisiblyAlphabet(tuple(calls), tuple(rets), tuple(ints))
    except ProbeqError as e:
        raise ValidationError(str(e), "calls/returns/internals") from None
    stack = _symbols(_field(obj, "stack", ""), "stack")

    def nested(key: str, syms: List[str]) -> Dict:
        table = _field(obj, key, "", dict)
        out = {}
        for a, per in table.items():
            if a not in syms:
                raise ValidationError(f"{a!r} is not declared in this symbol class", f"{key}.{a}")
            if not isinstance(per, dict):
                raise ParseError("expected an object keyed by stack symbol", f"{key}.{a}")
            for g, ents in per.items():
                if g not in stack:
                    raise ValidationError(f"unknown stack symbol {g!r}", f"{key}.{a}.{g}")
                out[(a, g)] = _matrix(ents, n, f"{key}.{a}.{g}")
        return out

    internal_raw = _field(obj, "internal", "", dict)
    for a in internal_raw:
        if a not in ints:
            raise ValidationError(f"{a!r} is not an internal symbol", f"internal.{a}")
    return WeightedVPA(
        n, alphabet, tuple(stack), nested("call", calls), nested("return", rets),
        {a: _matrix(internal_raw.get(a, []), n, f"internal.{a}") for a in ints},
        QMatrix.row_vector(_vector(_field(obj, "initial", ""), n, "initial")),
        QMatrix.col_vector(_vector(_field(obj, "final", ""), n, "final")),
    )


def _print_vpa(v: WeightedVPA) -> Dict:
    def nested(table, syms):
        out = {}
        for a in syms:
            per = {g: _entries(table[(a, g)]) for g in v.stack if not table[(a, g)].is_zero()}
            if per:
                out[a] = per
        return out

    return {
        "states": v.n,
        "calls": list(v.alphabet.calls),
        "returns": list(v.alphabet.returns),
        "internals": list(v.alphabet.internals),
        "stack": list(v.stack),
        "initial": [format_rational(x) for x in v.initial.row(0)],
        "final": [format_rational(x) for x in v.final.entries()],
        "call": nested(v.call, v.alphabet.calls),
        "return": nested(v.ret, v.alphabet.returns),
        "internal": {a: _entries(v.internal[a]) for a in v.alphabet.internals
                     if not v.internal[a].is_zero()},
    }


def _parse_circuit(obj: Dict) -> ArithmeticCircuit:
    raw = _field(obj, "gates", "", list)
    if not raw:
        raise ValidationError("circuit has no gates", "gates")
    gates = []
    for k, g in enumerate(raw):
        loc = f"gates[{k}]"
        if not isinstance(g, list) or not g or not isinstance(g[0], str):
            raise ParseError("gate must be [op, ...]", loc)
        op = g[0]
        if op == CONST:
            if len(g) != 2:
                raise ParseError('constant gate must be ["const", value]', loc)
            gates.append(Gate(CONST, value=parse_rational(g[1], loc)))
        elif op in (ADD, MUL, SUB):
            if len(g) != 3:
                raise ParseError(f'gate must be ["{op}", left, right]', loc)
            left, right = (_index(x, k, loc) for x in g[1:])
            gates.append(Gate(op, left, right))
        else:
            raise ParseError(f"unknown gate kind {op!r}", loc)
    out = _field(obj, "output", "", int)
    _index(out, len(gates), "output")
    return ArithmeticCircuit(gates, out)


def _print_circuit(c: ArithmeticCircuit) -> Dict:
    gates = [[CONST, format_rational(g.value)] if g.kind == CONST else [g.kind, g.left, g.right]
             for g in c.gates]
    return {"gates": gates, "output": c.output}


_PARSERS = {"weighted": _parse_weighted, "cost": _parse_cost, "vpa": _parse_vpa, "circuit": _parse_circuit}
_PRINTERS = {"weighted": _print_weighted, "cost": _print_cost, "vpa": _print_vpa, "circuit": _print_circuit}
_TYPES = {"weighted": WeightedAutomaton, "cost": CostAutomaton, "vpa": WeightedVPA,
          "circuit": ArithmeticCircuit}


def parse_document(text: str) -> Document:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"line {e.lineno} column {e.colno}") from None
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object", "document")
    kind = _field(obj, "kind", "", str)
    if kind not in KINDS:
        raise ParseError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", "kind")
    version = _field(obj, "version", "", int)
    if version != VERSION:
        raise ParseError(f"unsupported version {version}", "version")
    try:
        model = _PARSERS[kind](obj)
    except (ParseError, ValidationError):
        raise
    except ProbeqError as e:
        raise ValidationError(str(e), kind) from None
    except ValueError as e:
        raise ValidationError(str(e), kind) from None
    return Document(kind, model, version)


def document_for(model: Model) -> Document:
    for kind, t in _TYPES.items():
        if isinstance(model, t):
            return Document(kind, model)
    raise TypeError(f"no document kind for {type(model).__name__}")


def print_document(doc: Union[Document, Model]) -> str:
    if not isinstance(doc, Document):
        doc = document_for(doc)
    body = _PRINTERS[doc.kind](doc.model)
    body["kind"] = doc.kind
    body["version"] = doc.version
    return _layout(body)


def _compact(x) -> str:
    return json.dumps(x, sort_keys=True, ensure_ascii=False, separators=(", ", ": "))


def _layout(body: Dict) -> str:
    """One top-level field per line; lists of records get one record per line."""
    lines = []
    keys = sorted(body)
    for n, key in enumerate(keys):
        val = body[key]
        sep = "," if n + 1 < len(keys) else ""
        if isinstance(val, list) and val and all(isinstance(x, list) for x in val):
            inner = ",\n".join("  " + _compact(x) for x in val)
            lines.append(f" {_compact(key)}: [\n{inner}\n ]{sep}")
        else:
            lines.append(f" {_compact(key)}: {_compact(val)}{sep}")
    return "{\n" + "\n".join(lines) + "\n}\n"


def load(path: str) -> Document:
    """Read a document from a path; "-" reads standard input."""
    import sys

    if path == "-":
        return parse_document(sys.stdin.read())
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())
