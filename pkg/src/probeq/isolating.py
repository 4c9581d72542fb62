"""Randomized zeroness with counterexample extraction via the Isolating Lemma.

Each (position, symbol) pair gets an integer weight drawn uniformly from
``{1, ..., 2|Σ|n}``. The univariate polynomial

    P(x) = sum over words u with |u| <= n of A(u) * x^wt(u)

is non-zero with probability >= 1/2 whenever A is non-zero. When the minimum
weight word with A(u) != 0 is unique, its letters are recovered by bumping
one weight at a time and watching the coefficient at the minimum degree.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

from .errors import DimError
from .numerics import ZERO, UniPoly
from .rng import coerce_seed, stream
from .verdict import Verdict, Word
from .weighted import (WeightedAutomaton, difference, dot, tzeng_zeroness, vec_mat,
                       weight)

DEFAULT_TRIALS = 40


@dataclass(frozen=True)
class WeightAssignment:
    n: int
    alphabet: Tuple[str, ...]
    weights: Dict[Tuple[int, str], int]

    @property
    def upper(self) -> int:
        return 2 * len(self.alphabet) * self.n

    def __getitem__(self, key: Tuple[int, str]) -> int:
        return self.weights[key]

    def word_weight(self, u: Word) -> int:
        return sum(self.weights[(i + 1, s)] for i, s in enumerate(u))

    def bumped(self, i: int, s: str) -> "WeightAssignment":
        w = dict(self.weights)
        w[(i, s)] += 1
        return WeightAssignment(self.n, self.alphabet, w)


@dataclass(frozen=True)
class IsoResult:
    polynomial: UniPoly
    min_degree: Optional[int]
    assignment: WeightAssignment
    seed: Optional[int] = None


@dataclass(frozen=True)
class RetryNeeded:
    """Extraction could not isolate a word under this assignment; resample."""

    reason: str = ""


def sample_weights(a: WeightedAutomaton, rng: random.Random) -> WeightAssignment:
    upper = 2 * len(a.alphabet) * a.n
    weights = {}
    for i in range(1, a.n + 1):
        for s in a.alphabet:
            weights[(i, s)] = rng.randint(1, upper)
    return WeightAssignment(a.n, a.alphabet, weights)


def iso_polynomial(a: WeightedAutomaton, wa: WeightAssignment,
                   max_degree: Optional[int] = None) -> UniPoly:
    """alpha (sum_{i<=n} prod_{j<=i} sum_s M(s) x^w[j,s]) eta, by prefix propagation.

    Terms of degree above ``max_degree`` are dropped when it is given; weights
    are positive, so this never changes lower coefficients.
    """
    if wa.n != a.n or set(wa.alphabet) != set(a.alphabet):
        raise DimError("weight assignment does not match the automaton")
    eta = a.final.entries()
    coeffs: Dict[int, object] = {}
    # degree -> row vector alpha * (partial product), for the current prefix length
    layer: Dict[int, tuple] = {0: a.initial.row(0)}
    for j in range(0, a.n + 1):
        for deg, vec in layer.items():
            c = dot(vec, eta)
            if c:
                coeffs[deg] = coeffs.get(deg, ZERO) + c
        if j == a.n:
            break
        nxt: Dict[int, list] = {}
        for deg, vec in layer.items():
            for s in a.alphabet:
                d = deg + wa.weights[(j + 1, s)]
                if max_degree is not None and d > max_degree:
                    continue
                v = vec_mat(vec, a.transitions[s])
                if not any(v):
                    continue
                acc = nxt.get(d)
                nxt[d] = v if acc is None else tuple(x + y for x, y in zip(acc, v))
        layer = {d: v for d, v in nxt.items() if any(v)}
        if not layer:
            break
    return UniPoly(coeffs)


def extract_counterexample(a: WeightedAutomaton, wa: WeightAssignment,
                           p: UniPoly) -> Union[Word, RetryNeeded]:
    m = p.min_degree()
    if m is None:
        raise ValueError("extraction needs a non-zero polynomial")
    base = p.coefficient(m)
    selected: List[List[str]] = []
    for i in range(1, a.n + 1):
        hits = []
        for s in a.alphabet:
            q = iso_polynomial(a, wa.bumped(i, s), max_degree=m)
            if q.coefficient(m) != base:
                hits.append(s)
        selected.append(hits)
    word: List[str] = []
    for hits in selected:
        if not hits:
            break
        if len(hits) > 1:
            return RetryNeeded(f"position {len(word) + 1} selects {hits}")
        word.append(hits[0])
    u = tuple(word)
    if any(selected[len(u):]):
        return RetryNeeded("letters selected after the end of the word")
    if wa.word_weight(u) != m:
        return RetryNeeded("candidate does not sit at the minimum degree")
    wu = weight(a, u)
    if wu == 0 or wu != base:
        return RetryNeeded("candidate failed verification")
    return u


def iso_trial(a: WeightedAutomaton, seed: int, index: int = 0) -> IsoResult:
    wa = sample_weights(a, stream(seed, "iso", index))
    p = iso_polynomial(a, wa)
    return IsoResult(p, p.min_degree(), wa, seed)


def randomized_zeroness(a: WeightedAutomaton, trials: int = DEFAULT_TRIALS, rng=None) -> Verdict:
    """One-sided randomized zeroness; a non-zero verdict always carries a verified witness."""
    seed = coerce_seed(rng)
    saw_nonzero = False
    for t in range(trials):
        res = iso_trial(a, seed, t)
        if res.polynomial.is_zero():
            continue
        saw_nonzero = True
        u = extract_counterexample(a, res.assignment, res.polynomial)
        if isinstance(u, RetryNeeded):
            continue
        return Verdict("nonzero", witness=u, seed=seed, trials=trials, info={"trial": t})
    if saw_nonzero:
        # P != 0 certifies non-zeroness even though isolation kept failing
        res = tzeng_zeroness(a)
        return Verdict("nonzero", witness=res.witness, seed=seed, trials=trials,
                       info={"fallback": "basis"})
    return Verdict("probably-zero", seed=seed, trials=trials)


def randomized_equivalence(b: WeightedAutomaton, c: WeightedAutomaton,
                           trials: int = DEFAULT_TRIALS, rng=None) -> Verdict:
    res = randomized_zeroness(difference(b, c), trials, rng)
    if res.positive:
        return Verdict("probably-equivalent", seed=res.seed, trials=trials)
    u = res.witness
    if weight(b, u) == weight(c, u):
        raise AssertionError(f"witness {u} failed re-verification")
    return Verdict("inequivalent", witness=u, seed=res.seed, trials=trials, info=res.info)
