"""Q-weighted automata: word weights, difference automata and the
deterministic basis-driven zeroness / equivalence test."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence, Tuple

from .errors import AlphabetError, BudgetError, DimError, SymbolError
from .numerics import ZERO, QMatrix, RowSpace, block_diag
from .verdict import Verdict, Word

DEFAULT_BUDGET = 1_000_000


def as_word(w) -> Word:
    """Sequences of symbols pass through; a plain string is read one character per symbol."""
    if isinstance(w, str):
        return tuple(w)
    return tuple(w)


@dataclass(frozen=True, eq=False)
class WeightedAutomaton:
    alphabet: Tuple[str, ...]
    transitions: Mapping[str, QMatrix]
    initial: QMatrix
    final: QMatrix

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "transitions", dict(self.transitions))
        if len(set(self.alphabet)) != len(self.alphabet):
            raise AlphabetError("alphabet symbols must be distinct")
        if set(self.transitions) != set(self.alphabet):
            raise AlphabetError("transition keys must match the alphabet")
        n = self.initial.cols
        if self.initial.rows != 1:
            raise DimError("initial vector must be 1×n")
        if self.final.shape != (n, 1):
            raise DimError(f"final vector must be {n}×1, got {self.final.shape}")
        for a, m in self.transitions.items():
            if m.shape != (n, n):
                raise DimError(f"M({a}) must be {n}×{n}, got {m.shape}")

    @property
    def n(self) -> int:
        return self.initial.cols

    @classmethod
    def build(cls, alphabet: Sequence[str], transitions: Mapping[str, Sequence[Sequence]],
              initial: Sequence, final: Sequence) -> "WeightedAutomaton":
        return cls(
            tuple(alphabet),
            {a: QMatrix(transitions[a]) for a in alphabet},
            QMatrix.row_vector(initial),
            QMatrix.col_vector(final),
        )

    @classmethod
    def zero(cls, n: int, alphabet: Sequence[str]) -> "WeightedAutomaton":
        return cls(tuple(alphabet), {a: QMatrix.zeros(n, n) for a in alphabet},
                   QMatrix.zeros(1, n), QMatrix.zeros(n, 1))

    def matrix(self, a: str) -> QMatrix:
        try:
            return self.transitions[a]
        except KeyError:
            raise SymbolError(f"symbol {a!r} not in alphabet {self.alphabet}") from None

    def weight(self, w):
        return weight(self, w)

    def __repr__(self) -> str:
        return f"WeightedAutomaton(n={self.n}, alphabet={self.alphabet})"


def vec_mat(v: Sequence, m: QMatrix) -> Tuple:
    """Row vector (as a tuple) times matrix."""
    out = [ZERO] * m.cols
    for k, x in enumerate(v):
        if x:
            for j, y in enumerate(m.row(k)):
                if y:
                    out[j] += x * y
    return tuple(out)


def dot(u: Sequence, v: Sequence):
    return sum((x * y for x, y in zip(u, v) if x and y), ZERO)


def forward_vector(a: WeightedAutomaton, w) -> Tuple:
    v = a.initial.row(0)
    for s in as_word(w):
        v = vec_mat(v, a.matrix(s))
    return v


def weight(a: WeightedAutomaton, w):
    """alpha · M(w) · eta."""
    return dot(forward_vector(a, w), a.final.entries())


def difference(b: WeightedAutomaton, c: WeightedAutomaton) -> WeightedAutomaton:
    """Automaton whose weight on every word is B(w) - C(w)."""
    if b.alphabet != c.alphabet:
        if set(b.alphabet) != set(c.alphabet):
            raise AlphabetError(f"alphabets differ: {b.alphabet} vs {c.alphabet}")
    alphabet = b.alphabet
    initial = QMatrix.row_vector(b.initial.row(0) + tuple(-x for x in c.initial.row(0)))
    final = QMatrix.col_vector(b.final.entries() + c.final.entries())
    trans = {s: block_diag(b.transitions[s], c.transitions[s]) for s in alphabet}
    return WeightedAutomaton(alphabet, trans, initial, final)


def words_upto(alphabet: Sequence[str], max_len: int) -> Iterator[Word]:
    """All words of length <= max_len in length-then-lexicographic order."""
    for k in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=k)


def tzeng_zeroness(a: WeightedAutomaton) -> Verdict:
    """Deterministic zeroness test with the shortest, lexicographically least witness.

    Words are explored breadth-first in length-lex order; a word is expanded
    only when alpha·M(u) is independent of the vectors seen so far. Every
    skipped word has a weight that is a linear combination of weights of
    earlier words, so the first independent word with non-zero weight is also
    the first non-zero word overall.
    """
    eta = a.final.entries()
    space = RowSpace(a.n)
    queue = deque([((), a.initial.row(0))])
    while queue:
        u, vec = queue.popleft()
        if not space.insert(vec):
            continue
        if dot(vec, eta) != 0:
            if weight(a, u) == 0:
                raise AssertionError(f"witness {u} failed re-verification")
            return Verdict("nonzero", witness=u)
        for s in a.alphabet:
            queue.append((u + (s,), vec_mat(vec, a.transitions[s])))
    return Verdict("zero")


def brute_force_zeroness(a: WeightedAutomaton, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Exhaustive check over every word of length <= n-1."""
    k = len(a.alphabet)
    max_len = a.n - 1
    total = max_len + 1 if k == 1 else (k ** (max_len + 1) - 1) // (k - 1) if k else 1
    if total > budget:
        raise BudgetError(f"{total} words exceed budget {budget}")
    for u in words_upto(a.alphabet, max_len):
        if weight(a, u) != 0:
            return Verdict("nonzero", witness=u)
    return Verdict("zero")


def equivalence(b: WeightedAutomaton, c: WeightedAutomaton) -> Verdict:
    res = tzeng_zeroness(difference(b, c))
    if res.positive:
        return Verdict("equivalent")
    u = res.witness
    if weight(b, u) == weight(c, u):
        raise AssertionError(f"witness {u} failed re-verification")
    return Verdict("inequivalent", witness=u)
