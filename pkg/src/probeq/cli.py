"""Command-line interface.

Every command prints one JSON report on stdout (documents for the
translation commands) and exits with 0 for zero/equivalent/equal, 1 for
non-zero/inequivalent/unequal, 2 for usage or input errors and 3 when a
budget is exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib import resources
from typing import List, Optional, Sequence

from . import circuits, cost, isolating, reductions, weighted
from .documents import Document, parse_document, print_document
from .errors import BudgetError, ParseError, ProbeqError, ValidationError
from .rng import DEFAULT_SEED
from .verdict import Verdict
from .vpa import vpa_weight

EXIT_POSITIVE, EXIT_NEGATIVE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
FIXTURES = ("fig2-B", "fig2-C", "sq10", "sq10-plus1")


class UsageError(Exception):
    pass


def fixture_text(name: str) -> str:
    return resources.files("probeq.fixtures").joinpath(f"{name}.json").read_text(encoding="utf-8")


def read_document(path: str) -> Document:
    """A file path, "-" for stdin, or the name of a bundled fixture."""
    if path == "-":
        return parse_document(sys.stdin.read())
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            return parse_document(fh.read())
    name = path[:-5] if path.endswith(".json") else path
    if name in FIXTURES:
        return parse_document(fixture_text(name))
    raise UsageError(f"no such file or fixture: {path}")


def parse_word(text: str) -> tuple:
    """Symbols separated by spaces or commas; without separators, one character per symbol."""
    text = text.strip()
    if not text:
        return ()
    if any(c in text for c in " ,"):
        return tuple(t for t in text.replace(",", " ").split() if t)
    return tuple(text)


def parse_window(text: str) -> List[tuple]:
    out = []
    for part in text.split(","):
        try:
            lo, hi = part.split(":")
            out.append((int(lo), int(hi)))
        except ValueError:
            raise UsageError(f"window must look like lo:hi[,lo:hi...], got {text!r}") from None
    return out


def parse_point(text: str) -> tuple:
    try:
        return tuple(Fraction(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"point must be comma-separated rationals, got {text!r}") from None


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def emit(report: dict) -> None:
    sys.stdout.write(json.dumps(_jsonable(report), sort_keys=True) + "\n")


def verdict_report(command: str, v: Verdict) -> dict:
    rep = {"command": command, "verdict": v.kind, "seed": v.seed, "trials": v.trials}
    if v.witness is not None:
        rep["witness"] = list(v.witness)
    if v.point is not None:
        rep["point"] = list(v.point)
    if v.info:
        rep["info"] = v.info
    return rep


def _expect(doc: Document, *kinds: str) -> None:
    if doc.kind not in kinds:
        raise UsageError(f"expected a {' or '.join(kinds)} document, got {doc.kind}")


def cmd_equiv(args) -> Verdict:
    b, c = read_document(args.a), read_document(args.b)
    _expect(b, "weighted")
    _expect(c, "weighted")
    if args.mode == "deterministic":
        return weighted.equivalence(b.model, c.model)
    return isolating.randomized_equivalence(b.model, c.model, args.trials, args.seed)


def cmd_zeroness(args) -> Verdict:
    a = read_document(args.a)
    _expect(a, "weighted", "cost")
    if a.kind == "cost":
        if args.mode == "deterministic":
            return cost.deterministic_zeroness(a.model, args.budget or cost.DEFAULT_GRID_BUDGET)
        return cost.randomized_zeroness(a.model, args.trials, args.seed)
    if args.mode == "deterministic":
        return weighted.tzeng_zeroness(a.model)
    return isolating.randomized_zeroness(a.model, args.trials, args.seed)


def cmd_cost_equiv(args) -> Verdict:
    b, c = read_document(args.a), read_document(args.b)
    _expect(b, "cost")
    _expect(c, "cost")
    return cost.cost_equivalence(b.model, c.model, args.mode, args.trials, args.seed,
                                 args.budget or cost.DEFAULT_GRID_BUDGET)


def cmd_vpa_equiv(args) -> Verdict:
    a, b = read_document(args.a), read_document(args.b)
    _expect(a, "vpa")
    _expect(b, "vpa")
    return reductions.vpa_equivalence(a.model, b.model, args.trials, args.seed, args.k_override)


def cmd_acit(args) -> Verdict:
    c1, c2 = read_document(args.a), read_document(args.b)
    _expect(c1, "circuit")
    _expect(c2, "circuit")
    if args.mode == "deterministic":
        budget = args.budget or circuits.DEFAULT_EVAL_BUDGET
        x = circuits.circuit_eval_exact(c1.model, budget)
        y = circuits.circuit_eval_exact(c2.model, budget)
        return Verdict("equal" if x == y else "unequal")
    return circuits.acit_test(c1.model, c2.model, args.trials, args.seed)


def cmd_circuit_to_vpa(args) -> int:
    c = read_document(args.a)
    _expect(c, "circuit")
    circ = c.model
    if circ.kinds() & {circuits.SUB}:
        raise UsageError("circuit uses subtraction; only + and * circuits translate")
    lc = circuits.normalize_circuit(circ, depth=args.depth)
    v, _, _ = reductions.circuit_to_vpa(lc)
    sys.stdout.write(print_document(v))
    return EXIT_POSITIVE


def cmd_vpa_to_circuit(args) -> int:
    a = read_document(args.a)
    _expect(a, "vpa")
    k = args.k if args.k is not None else a.model.n ** 2
    sys.stdout.write(print_document(reductions.sum_circuit(a.model, k)))
    return EXIT_POSITIVE


def _value(doc: Document, args):
    m = doc.model
    if doc.kind == "weighted":
        return weighted.weight(m, parse_word(args.word or ""))
    if doc.kind == "vpa":
        return vpa_weight(m, parse_word(args.word or ""))
    if doc.kind == "circuit":
        return circuits.circuit_eval_exact(m, args.budget or circuits.DEFAULT_EVAL_BUDGET)
    if args.point is None:
        raise UsageError("cost automata need --point r1,...,rs for evaluation")
    return weighted.weight(cost.substitute(m, parse_point(args.point)), parse_word(args.word or ""))


def cmd_eval(args) -> int:
    docs = [read_document(p) for p in args.docs]
    if len(docs) > 2:
        raise UsageError("eval takes one or two documents")
    values = [_value(d, args) for d in docs]
    rep = {"command": "eval", "values": values}
    if args.word is not None:
        rep["word"] = list(parse_word(args.word))
    if args.point is not None:
        rep["point"] = list(parse_point(args.point))
    emit(rep)
    differs = values[0] != values[1] if len(values) == 2 else values[0] != 0
    return EXIT_NEGATIVE if differs else EXIT_POSITIVE


def cmd_distribution(args) -> int:
    a = read_document(args.a)
    _expect(a, "cost")
    window = parse_window(args.window) if args.window else None
    at = parse_point(args.point) if args.point else None
    res = cost.distribution(a.model, parse_word(args.word or ""), window,
                            Fraction(args.tol), at)
    emit({
        "command": "distribution",
        "word": list(parse_word(args.word or "")),
        "window": [list(w) for w in res.window],
        "coefficients": [[list(v), c] for v, c in sorted(res.coefficients.items())],
        "tail_bound": res.tail_bound,
        "excluded_mass": res.excluded_mass,
        "terms": res.terms,
    })
    return EXIT_POSITIVE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("randomized", "deterministic"), default="randomized")
    common.add_argument("--trials", type=int, default=40)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--budget", type=int, default=None)

    p = argparse.ArgumentParser(prog="probeq", description="Equivalence checking for weighted, cost and visibly pushdown automata.")
    sub = p.add_subparsers(dest="command", required=True)

    def two(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("a")
        sp.add_argument("b")
        sp.set_defaults(fn=fn)
        return sp

    two("equiv", cmd_equiv, "equivalence of two weighted automata")
    two("cost-equiv", cmd_cost_equiv, "equivalence of two cost automata")
    vp = two("vpa-equiv", cmd_vpa_equiv, "equivalence of two weighted VPAs on well-matched words")
    vp.add_argument("--k-override", type=int, default=None,
                    help="sum over L_k for this k instead of the computed index (testing only)")
    two("acit", cmd_acit, "do two arithmetic circuits compute the same number")

    z = sub.add_parser("zeroness", parents=[common], help="zeroness of a weighted or cost automaton")
    z.add_argument("a")
    z.set_defaults(fn=cmd_zeroness)

    cv = sub.add_parser("circuit-to-vpa", parents=[common], help="translate a {+,*} circuit to a VPA")
    cv.add_argument("a")
    cv.add_argument("--depth", type=int, default=None, help="odd layering depth (padded if larger)")
    cv.set_defaults(fn=cmd_circuit_to_vpa)

    vc = sub.add_parser("vpa-to-circuit", parents=[common], help="circuit summing a VPA over L_k")
    vc.add_argument("a")
    vc.add_argument("--k", type=int, default=None, help="level (default n^2)")
    vc.set_defaults(fn=cmd_vpa_to_circuit)

    ev = sub.add_parser("eval", parents=[common], help="weight of a word (or circuit value)")
    ev.add_argument("docs", nargs="+")
    ev.add_argument("--word", default=None)
    ev.add_argument("--point", default=None, help="counter values for cost automata, e.g. 3 or 2,5")
    ev.set_defaults(fn=cmd_eval)

    d = sub.add_parser("distribution", parents=[common], help="coefficients of a cost automaton's series")
    d.add_argument("a")
    d.add_argument("--word", default="")
    d.add_argument("--window", default=None, help="lo:hi per counter, comma separated")
    d.add_argument("--tol", default="1/1000000")
    d.add_argument("--point", default=None, help="bound the series weighted at this point")
    d.set_defaults(fn=cmd_distribution)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_POSITIVE
    try:
        out = args.fn(args)
        if isinstance(out, Verdict):
            emit(verdict_report(args.command, out))
            return EXIT_POSITIVE if out.positive else EXIT_NEGATIVE
        return out
    except BudgetError as e:
        sys.stderr.write(f"budget exceeded: {e}\n")
        return EXIT_BUDGET
    except (UsageError, ParseError, ValidationError, ProbeqError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
