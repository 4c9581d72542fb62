"""Weighted cost automata.

Transitions carry a weight and an elementary cost vector in {-1, 0, 1}^s;
epsilon transitions are allowed provided every state's outgoing epsilon
weight (in absolute value, summed over costs) is below 1. A word w denotes
the series

    A(w) = alpha M(eps)* M(s1) M(eps)* ... M(sm) M(eps)* eta

over Z^s, which is a rational function in the counter variables. Zeroness is
tested by substituting sample points for the variables, which turns A into
an ordinary weighted automaton.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import (AlphabetError, BudgetError, CounterArityError, DimError, Singular,
                     ValidationError)
from .numerics import ONE, ZERO, LaurentPoly, QMatrix, rat
from .rng import coerce_seed, stream
from .verdict import Verdict, Word
from .weighted import WeightedAutomaton, as_word, tzeng_zeroness, weight

EPS = "eps"
DEFAULT_TRIALS = 40
DEFAULT_GRID_BUDGET = 100_000

LMatrix = Tuple[Tuple[LaurentPoly, ...], ...]


@dataclass(frozen=True, eq=False)
class CostAutomaton:
    n: int
    s: int
    alphabet: Tuple[str, ...]
    transitions: Mapping[str, LMatrix]
    epsilon: LMatrix
    initial: QMatrix
    final: QMatrix

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "transitions", dict(self.transitions))
        if EPS in self.alphabet:
            raise AlphabetError(f"{EPS!r} is reserved for epsilon transitions")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise AlphabetError("alphabet symbols must be distinct")
        if set(self.transitions) != set(self.alphabet):
            raise AlphabetError("transition keys must match the alphabet")
        if self.initial.shape != (1, self.n) or self.final.shape != (self.n, 1):
            raise DimError("initial must be 1×n and final n×1")
        for key, m in list(self.transitions.items()) + [(EPS, self.epsilon)]:
            if len(m) != self.n or any(len(r) != self.n for r in m):
                raise DimError(f"M({key}) must be {self.n}×{self.n}")
            for r in m:
                for e in r:
                    if e.arity != self.s:
                        raise CounterArityError(f"M({key}) has an entry of arity {e.arity}, expected {self.s}")

    @classmethod
    def build(cls, n: int, s: int, alphabet: Sequence[str],
              arcs: Iterable[Tuple[int, str, int, object, Sequence[int]]],
              initial: Sequence, final: Sequence) -> "CostAutomaton":
        """Build from ``(src, symbol, dst, weight, cost)`` arcs; ``symbol`` may be ``EPS``."""
        acc: Dict[str, List[List[Dict]]] = {a: [[{} for _ in range(n)] for _ in range(n)]
                                          for a in list(alphabet) + [EPS]}
        for src, sym, dst, w, cost in arcs:
            if sym not in acc:
                raise AlphabetError(f"unknown symbol {sym!r}")
            cell = acc[sym][src][dst]
            key = tuple(cost)
            cell[key] = cell.get(key, ZERO) + rat(w)
        mats = {a: tuple(tuple(LaurentPoly(c, s) for c in row) for row in m) for a, m in acc.items()}
        eps = mats.pop(EPS)
        return cls(n, s, tuple(alphabet), mats, eps,
                   QMatrix.row_vector(initial), QMatrix.col_vector(final))

    def matrix(self, a: str) -> LMatrix:
        if a == EPS:
            return self.epsilon
        return self.transitions[a]

    def arcs(self):
        """Yield ``(src, symbol, dst, weight, cost)`` in canonical order."""
        for a in list(self.alphabet) + [EPS]:
            m = self.matrix(a)
            for i in range(self.n):
                for j in range(self.n):
                    for v, c in sorted(m[i][j].items()):
                        yield (i, a, j, c, v)

    def __repr__(self) -> str:
        return f"CostAutomaton(n={self.n}, s={self.s}, alphabet={self.alphabet})"


def matrix_norm(m: LMatrix, point: Optional[Sequence] = None) -> Fraction:
    """Infinity norm: max row sum of entry l1 norms (weighted by |r|^v when ``point`` is given)."""
    best = ZERO
    for row in m:
        if point is None:
            t = sum((e.norm1() for e in row), ZERO)
        else:
            t = sum((e.weighted_norm(point) for e in row), ZERO)
        best = max(best, t)
    return best


@dataclass
class ValidationReport:
    epsilon_norm: Fraction
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(a: CostAutomaton) -> ValidationReport:
    """Check the cost-vector support and the epsilon norm condition exactly."""
    bad = []
    for sym in list(a.alphabet) + [EPS]:
        m = a.matrix(sym)
        for i in range(a.n):
            for j in range(a.n):
                for v, _ in m[i][j].items():
                    if any(x not in (-1, 0, 1) for x in v):
                        bad.append(f"M({sym})[{i}][{j}] has cost vector {list(v)} outside {{-1,0,1}}^{a.s}")
    norm = ZERO
    for i, row in enumerate(a.epsilon):
        t = sum((e.norm1() for e in row), ZERO)
        norm = max(norm, t)
        if t >= 1:
            bad.append(f"epsilon row {i} has total weight {t} (must be < 1)")
    return ValidationReport(norm, bad)


def _require_valid(a: CostAutomaton) -> None:
    rep = validate(a)
    if not rep.ok:
        raise ValidationError("; ".join(rep.violations))


def evaluate_matrix(m: LMatrix, point: Sequence) -> QMatrix:
    return QMatrix._raw(tuple(tuple(e(point) for e in row) for row in m))


def epsilon_star(a: CostAutomaton, point: Sequence) -> QMatrix:
    """(I - M_r(eps))^-1; raises Singular when the point is a pole."""
    m = evaluate_matrix(a.epsilon, point)
    return (QMatrix.identity(a.n) - m).inverse()


def substitute(a: CostAutomaton, point: Sequence) -> WeightedAutomaton:
    """Counter-free automaton B with B(w) = A(w)(r) for every word w.

    alpha_B = alpha E, M_B(s) = M_r(s) E, eta_B = eta with E = (I - M_r(eps))^-1.
    """
    _require_valid(a)
    point = tuple(rat(x) for x in point)
    if len(point) != a.s:
        raise CounterArityError(f"point has {len(point)} coordinates, automaton has {a.s} counters")
    if any(x == 0 for x in point):
        raise ValueError("substitution point coordinates must be non-zero")
    e = epsilon_star(a, point)
    trans = {sym: evaluate_matrix(a.transitions[sym], point) @ e for sym in a.alphabet}
    return WeightedAutomaton(a.alphabet, trans, a.initial @ e, a.final)


@dataclass(frozen=True)
class SubstitutionPlan:
    degree_bound: int
    sample_upper: int
    point: Optional[Tuple[int, ...]] = None


def plan(a: CostAutomaton, point: Optional[Sequence[int]] = None) -> SubstitutionPlan:
    # rational-function degree bound 2n(s+1)|w| at |w| = n; samples drawn from {1..4d}
    d = 2 * a.n * (a.s + 1) * a.n
    upper = max(4 * d, 1)
    if point is not None:
        point = tuple(point)
        if any(not 1 <= x <= upper for x in point):
            raise ValueError(f"point {point} outside the sample range 1..{upper}")
    return SubstitutionPlan(d, upper, point)


def _point_zeroness(a: CostAutomaton, point: Tuple[int, ...]) -> Optional[Word]:
    """Witness word at this point, None if B is zero; raises Singular at poles."""
    b = substitute(a, point)
    res = tzeng_zeroness(b)
    return None if res.positive else res.witness


def randomized_zeroness(a: CostAutomaton, trials: int = DEFAULT_TRIALS, rng=None) -> Verdict:
    _require_valid(a)
    seed = coerce_seed(rng)
    p = plan(a)
    singular = 0
    for t in range(trials):
        r = stream(seed, "cost", t)
        point = tuple(r.randint(1, p.sample_upper) for _ in range(a.s))
        try:
            u = _point_zeroness(a, point)
        except Singular:
            singular += 1
            continue
        if u is not None:
            return Verdict("nonzero", witness=u, point=point, seed=seed, trials=trials,
                           info={"trial": t})
    return Verdict("probably-zero", seed=seed, trials=trials, info={"singular_points": singular})


def deterministic_zeroness(a: CostAutomaton, budget: int = DEFAULT_GRID_BUDGET) -> Verdict:
    """Exhaustive evaluation on the grid {1..4d}^s; poles are skipped."""
    _require_valid(a)
    p = plan(a)
    size = p.sample_upper ** a.s
    if size > budget:
        raise BudgetError(f"grid of {size} points exceeds budget {budget}")
    for point in itertools.product(range(1, p.sample_upper + 1), repeat=a.s):
        try:
            u = _point_zeroness(a, point)
        except Singular:
            continue
        if u is not None:
            return Verdict("nonzero", witness=u, point=point)
    return Verdict("zero")


def cost_difference(b: CostAutomaton, c: CostAutomaton) -> CostAutomaton:
    if set(b.alphabet) != set(c.alphabet):
        raise AlphabetError(f"alphabets differ: {b.alphabet} vs {c.alphabet}")
    if b.s != c.s:
        raise CounterArityError(f"counter counts differ: {b.s} vs {c.s}")
    n = b.n + c.n
    z = LaurentPoly.zero(b.s)

    def block(x: LMatrix, y: LMatrix) -> LMatrix:
        rows = [tuple(r) + (z,) * c.n for r in x]
        rows += [(z,) * b.n + tuple(r) for r in y]
        return tuple(rows)

    trans = {sym: block(b.transitions[sym], c.transitions[sym]) for sym in b.alphabet}
    eps = block(b.epsilon, c.epsilon)
    initial = QMatrix.row_vector(b.initial.row(0) + tuple(-x for x in c.initial.row(0)))
    final = QMatrix.col_vector(b.final.entries() + c.final.entries())
    return CostAutomaton(n, b.s, b.alphabet, trans, eps, initial, final)


def cost_equivalence(b: CostAutomaton, c: CostAutomaton, mode: str = "randomized",
                     trials: int = DEFAULT_TRIALS, rng=None,
                     budget: int = DEFAULT_GRID_BUDGET) -> Verdict:
    a = cost_difference(b, c)
    if mode == "randomized":
        res = randomized_zeroness(a, trials, rng)
    elif mode == "deterministic":
        res = deterministic_zeroness(a, budget)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if res.positive:
        kind = "probably-equivalent" if res.probabilistic else "equivalent"
        return Verdict(kind, seed=res.seed, trials=res.trials, info=res.info)
    u, r = res.witness, res.point
    if weight(substitute(b, r), u) == weight(substitute(c, r), u):
        raise AssertionError(f"witness {u} at {r} failed re-verification")
    return Verdict("inequivalent", witness=u, point=r, seed=res.seed, trials=res.trials,
                   info=res.info)


@dataclass(frozen=True)
class SeriesWindow:
    """Coefficients of a truncated series on a box, with certified error terms.

    ``tail_bound`` bounds the (weighted) l1 mass dropped by truncating the
    Neumann series; ``excluded_mass`` is the mass of the truncated series
    lying outside the window.
    """

    window: Tuple[Tuple[int, int], ...]
    coefficients: Dict[Tuple[int, ...], Fraction]
    tail_bound: Fraction
    excluded_mass: Fraction
    terms: int
    weight_point: Tuple[Fraction, ...]

    def coefficient(self, v: Sequence[int]) -> Fraction:
        return self.coefficients.get(tuple(v), ZERO)

    def evaluate(self, point: Sequence) -> Fraction:
        return LaurentPoly(self.coefficients, len(self.window))(point)


def _vec_lmat(v: Sequence[LaurentPoly], m: LMatrix, s: int) -> List[LaurentPoly]:
    out = [LaurentPoly.zero(s) for _ in range(len(m[0]))]
    for k, x in enumerate(v):
        if not x:
            continue
        for j, y in enumerate(m[k]):
            if y:
                out[j] = out[j] + x * y
    return out


def _truncation_bound(q: Fraction, k: int, mus: Sequence[Fraction], scale: Fraction) -> Fraction:
    # telescoping over the |w|+1 star factors, each within q^(k+1)/(1-q) of its truncation
    m = len(mus)
    head = q ** (k + 1) / (1 - q)
    star = 1 / (1 - q)
    prod = ONE
    for mu in mus:
        prod *= mu
    return scale * (m + 1) * head * star**m * prod


def distribution(a: CostAutomaton, w, window: Optional[Sequence[Tuple[int, int]]] = None,
                 tol=Fraction(1, 10**6), at: Optional[Sequence] = None) -> SeriesWindow:
    """Coefficients of A(w) on ``window`` via a truncated Neumann series for M(eps)*.

    The truncation depth is the least K for which the certified bound falls
    below ``tol``. With ``at`` the bound is on the series weighted by |r|^v,
    which is what controls evaluation at r.
    """
    _require_valid(a)
    tol = rat(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    w = as_word(w)
    at = tuple(rat(x) for x in at) if at is not None else (ONE,) * a.s
    q = matrix_norm(a.epsilon, at)
    if q >= 1:
        raise ValueError(f"epsilon norm {q} at {at} is not below 1; series does not converge there")
    mus = [matrix_norm(a.transitions[sym], at) for sym in w]
    scale = sum((abs(x) for x in a.initial.row(0)), ZERO) * max((abs(x) for x in a.final.entries()), default=ZERO)
    k = 0
    while _truncation_bound(q, k, mus, scale) >= tol:
        k += 1
    bound = _truncation_bound(q, k, mus, scale)

    s = a.s

    def star(vec: List[LaurentPoly]) -> List[LaurentPoly]:
        acc, cur = list(vec), list(vec)
        for _ in range(k):
            cur = _vec_lmat(cur, a.epsilon, s)
            acc = [x + y for x, y in zip(acc, cur)]
        return acc

    vec = [LaurentPoly.constant(x, s) for x in a.initial.row(0)]
    vec = star(vec)
    for sym in w:
        vec = star(_vec_lmat(vec, a.transitions[sym], s))
    series = LaurentPoly.zero(s)
    for x, e in zip(vec, a.final.entries()):
        if e:
            series = series + x.scale(e)

    if window is None:
        if series.is_zero():
            window = tuple((0, 0) for _ in range(s))
        else:
            keys = list(series.terms())
            window = tuple((min(v[i] for v in keys), max(v[i] for v in keys)) for i in range(s))
    window = tuple((int(lo), int(hi)) for lo, hi in window)
    if len(window) != s:
        raise DimError(f"window has {len(window)} axes, automaton has {s} counters")
    inside, outside = {}, {}
    for v, c in series.items():
        if all(lo <= x <= hi for x, (lo, hi) in zip(v, window)):
            inside[v] = c
        else:
            outside[v] = c
    excluded = LaurentPoly._raw(outside, s).weighted_norm(at)
    return SeriesWindow(window, inside, bound, excluded, k, at)
