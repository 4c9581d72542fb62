"""Weighted visibly pushdown automata over well-matched words."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import AlphabetError, DimError, NotWellMatched, SymbolError
from .numerics import ONE, ZERO, QMatrix
from .verdict import Word

Sparse = Dict[int, Dict[int, object]]


@dataclass(frozen=True)
class VisiblyAlphabet:
    calls: Tuple[str, ...]
    returns: Tuple[str, ...]
    internals: Tuple[str, ...]

    def __post_init__(self):
        for f in ("calls", "returns", "internals"):
            object.__setattr__(self, f, tuple(getattr(self, f)))
        allsyms = self.calls + self.returns + self.internals
        if len(set(allsyms)) != len(allsyms):
            raise AlphabetError("call, return and internal symbols must be pairwise disjoint and distinct")
        if not allsyms:
            raise AlphabetError("visibly pushdown alphabet is empty")

    def kind(self, a: str) -> str:
        if a in self.calls:
            return "call"
        if a in self.returns:
            return "return"
        if a in self.internals:
            return "internal"
        raise SymbolError(f"symbol {a!r} not in alphabet")


# Parse trees: None is the empty word, a str is an internal symbol,
# ("nest", call, body, ret) and ("cat", left, right) are inner nodes.
Tree = Union[None, str, tuple]


@dataclass(frozen=True)
class WellMatchedWord:
    symbols: Word
    tree: Tree

    def __len__(self) -> int:
        return len(self.symbols)


def linearize(t: Tree) -> Word:
    out: List[str] = []

    def go(t):
        if t is None:
            return
        if isinstance(t, str):
            out.append(t)
        elif t[0] == "nest":
            out.append(t[1])
            go(t[2])
            out.append(t[3])
        else:
            go(t[1])
            go(t[2])

    go(t)
    return tuple(out)


def parse_well_matched(word: Sequence[str], alphabet: VisiblyAlphabet) -> WellMatchedWord:
    """Single stack pass; concatenations associate to the left."""
    symbols = tuple(word)
    # each frame: (call symbol, items collected at this nesting level)
    stack: List[Tuple[Optional[str], List[Tree]]] = [(None, [])]
    for pos, a in enumerate(symbols):
        k = alphabet.kind(a)
        if k == "internal":
            stack[-1][1].append(a)
        elif k == "call":
            stack.append((a, []))
        else:
            if len(stack) == 1:
                raise NotWellMatched(f"unmatched return {a!r} at position {pos}")
            call, items = stack.pop()
            stack[-1][1].append(("nest", call, _concat(items), a))
    if len(stack) != 1:
        raise NotWellMatched(f"{len(stack) - 1} unmatched call(s)")
    return WellMatchedWord(symbols, _concat(stack[0][1]))


def _concat(items: List[Tree]) -> Tree:
    if not items:
        return None
    t = items[0]
    for x in items[1:]:
        t = ("cat", t, x)
    return t


def to_sparse(m: QMatrix) -> Sparse:
    out: Sparse = {}
    for i in range(m.rows):
        row = {j: x for j, x in enumerate(m.row(i)) if x}
        if row:
            out[i] = row
    return out


def sparse_mul(a: Sparse, b: Sparse, mod: Optional[int] = None) -> Sparse:
    out: Sparse = {}
    for i, row in a.items():
        acc: Dict[int, object] = {}
        for k, x in row.items():
            brow = b.get(k)
            if not brow:
                continue
            for j, y in brow.items():
                acc[j] = acc.get(j, 0) + x * y
        if mod is not None:
            acc = {j: v % mod for j, v in acc.items()}
        acc = {j: v for j, v in acc.items() if v}
        if acc:
            out[i] = acc
    return out


def sparse_add(a: Sparse, b: Sparse, mod: Optional[int] = None) -> Sparse:
    out: Sparse = {i: dict(r) for i, r in a.items()}
    for i, row in b.items():
        acc = out.setdefault(i, {})
        for j, y in row.items():
            v = acc.get(j, 0) + y
            if mod is not None:
                v %= mod
            if v:
                acc[j] = v
            else:
                acc.pop(j, None)
        if not acc:
            del out[i]
    return out


def sparse_identity(n: int, one=ONE) -> Sparse:
    return {i: {i: one} for i in range(n)}


def sparse_to_qmatrix(s: Sparse, n: int) -> QMatrix:
    rows = [[ZERO] * n for _ in range(n)]
    for i, r in s.items():
        for j, x in r.items():
            rows[i][j] = Fraction(x)
    return QMatrix(rows)


@dataclass(frozen=True, eq=False)
class WeightedVPA:
    n: int
    alphabet: VisiblyAlphabet
    stack: Tuple[str, ...]
    call: Mapping[Tuple[str, str], QMatrix]
    ret: Mapping[Tuple[str, str], QMatrix]
    internal: Mapping[str, QMatrix]
    initial: QMatrix
    final: QMatrix

    def __post_init__(self):
        object.__setattr__(self, "stack", tuple(self.stack))
        if len(set(self.stack)) != len(self.stack):
            raise AlphabetError("stack symbols must be distinct")
        n = self.n
        zero = QMatrix.zeros(n, n)
        call = {(a, g): self.call.get((a, g), zero) for a in self.alphabet.calls for g in self.stack}
        ret = {(b, g): self.ret.get((b, g), zero) for b in self.alphabet.returns for g in self.stack}
        internal = {a: self.internal.get(a, zero) for a in self.alphabet.internals}
        extra = (set(self.call) - set(call)) | (set(self.ret) - set(ret)) | (set(self.internal) - set(internal))
        if extra:
            raise AlphabetError(f"transitions for unknown symbols: {sorted(map(str, extra))}")
        for key, m in list(call.items()) + list(ret.items()) + list(internal.items()):
            if m.shape != (n, n):
                raise DimError(f"matrix for {key} must be {n}×{n}")
        if self.initial.shape != (1, n) or self.final.shape != (n, 1):
            raise DimError("initial must be 1×n and final n×1")
        object.__setattr__(self, "call", call)
        object.__setattr__(self, "ret", ret)
        object.__setattr__(self, "internal", internal)
        object.__setattr__(self, "_sparse", None)

    def sparse(self) -> "SparseVPA":
        """Sparse copy of the automaton (cached); zero matrices are dropped."""
        if self._sparse is None:
            def nz(d):
                return {k: sm for k, sm in ((k, to_sparse(m)) for k, m in d.items()) if sm}

            sp = SparseVPA(
                self.n, self.alphabet, self.stack,
                nz(self.call), nz(self.ret), nz(self.internal),
                {j: x for j, x in enumerate(self.initial.row(0)) if x},
                {j: x for j, x in enumerate(self.final.entries()) if x},
            )
            object.__setattr__(self, "_sparse", sp)
        return self._sparse

    def __repr__(self) -> str:
        return f"WeightedVPA(n={self.n}, |Γ|={len(self.stack)})"


def word_matrix(v: WeightedVPA, t: Tree, memo: Optional[dict] = None) -> Sparse:
    """M_A(u) by structural recursion on the parse; repeated subwords are shared."""
    sv = v if isinstance(v, SparseVPA) else v.sparse()
    calls, rets, ints = sv.call, sv.ret, sv.internal
    kinds = v.alphabet
    if memo is None:
        memo = {}

    def go(t) -> Tuple[Word, Sparse]:
        if t is None:
            return (), sparse_identity(v.n)
        if isinstance(t, str):
            if kinds.kind(t) != "internal":
                raise SymbolError(f"{t!r} is not an internal symbol")
            return (t,), ints.get(t, {})
        if t[0] == "cat":
            wl, ml = go(t[1])
            wr, mr = go(t[2])
            key = wl + wr
            if key not in memo:
                memo[key] = sparse_mul(ml, mr)
            return key, memo[key]
        _, a, body, b = t
        wb, mb = go(body)
        key = (a,) + wb + (b,)
        if key not in memo:
            acc: Sparse = {}
            if kinds.kind(a) != "call" or kinds.kind(b) != "return":
                raise SymbolError(f"{a!r}/{b!r} is not a call/return pair")
            for g in v.stack:
                c = calls.get((a, g))
                r = rets.get((b, g))
                if not c or not r:
                    continue
                acc = sparse_add(acc, sparse_mul(sparse_mul(c, mb), r))
            memo[key] = acc
        return key, memo[key]

    return go(t)[1]


def vpa_weight(v: WeightedVPA, w) -> Fraction:
    """alpha · M_A(w) · eta for a well-matched word (or its parse)."""
    if not isinstance(w, WellMatchedWord):
        w = parse_well_matched(w, v.alphabet)
    for a in w.symbols:
        v.alphabet.kind(a)
    m = word_matrix(v, w.tree)
    sv = v if isinstance(v, SparseVPA) else v.sparse()
    total = ZERO
    for i, x in sv.initial.items():
        row = m.get(i, {})
        total += x * sum((y * sv.final[j] for j, y in row.items() if j in sv.final), ZERO)
    return total


@dataclass(frozen=True, eq=False)
class SparseVPA:
    """Same semantics as WeightedVPA; absent keys stand for zero matrices."""

    n: int
    alphabet: VisiblyAlphabet
    stack: Tuple[str, ...]
    call: Dict[Tuple[str, str], Sparse]
    ret: Dict[Tuple[str, str], Sparse]
    internal: Dict[str, Sparse]
    initial: Dict[int, object]
    final: Dict[int, object]

    def sparse(self) -> "SparseVPA":
        return self

    def dense(self) -> WeightedVPA:
        n = self.n
        return WeightedVPA(
            n, self.alphabet, self.stack,
            {k: sparse_to_qmatrix(m, n) for k, m in self.call.items()},
            {k: sparse_to_qmatrix(m, n) for k, m in self.ret.items()},
            {k: sparse_to_qmatrix(m, n) for k, m in self.internal.items()},
            QMatrix.row_vector([self.initial.get(j, ZERO) for j in range(n)]),
            QMatrix.col_vector([self.final.get(j, ZERO) for j in range(n)]),
        )


def sparse_kron(a: Sparse, b: Sparse, nb: int) -> Sparse:
    out: Sparse = {}
    for i, ra in a.items():
        for k, rb in b.items():
            out[i * nb + k] = {j * nb + l: x * y for j, x in ra.items() for l, y in rb.items()}
    return out


def sparse_product(a, b) -> SparseVPA:
    """Product automaton in sparse form; only non-zero stack pairs are kept."""
    a, b = a.sparse(), b.sparse()
    if a.alphabet != b.alphabet:
        raise AlphabetError("product needs identical visibly pushdown alphabets")
    nb = b.n
    call: Dict[Tuple[str, str], Sparse] = {}
    ret: Dict[Tuple[str, str], Sparse] = {}
    used = set()
    for (x, g), ma in a.call.items():
        for (y, h), mb in b.call.items():
            if x == y:
                call[(x, f"{g}|{h}")] = sparse_kron(ma, mb, nb)
                used.add(f"{g}|{h}")
    for (x, g), ma in a.ret.items():
        for (y, h), mb in b.ret.items():
            if x == y and f"{g}|{h}" in used:
                ret[(x, f"{g}|{h}")] = sparse_kron(ma, mb, nb)
    internal = {x: sparse_kron(a.internal[x], b.internal[x], nb)
                for x in a.internal if x in b.internal}
    stack = tuple(sorted(used))
    call = {k: m for k, m in call.items() if m}
    ret = {k: m for k, m in ret.items() if m and k[1] in used}
    return SparseVPA(
        a.n * nb, a.alphabet, stack, call, ret, internal,
        {i * nb + k: x * y for i, x in a.initial.items() for k, y in b.initial.items()},
        {i * nb + k: x * y for i, x in a.final.items() for k, y in b.final.items()},
    )


def product(a: WeightedVPA, b: WeightedVPA) -> WeightedVPA:
    """Synchronous product: state (i, j) -> i * n_B + j, stack symbol (g, h)."""
    if a.alphabet != b.alphabet:
        raise AlphabetError("product needs identical visibly pushdown alphabets")
    stack = tuple(f"{g}|{h}" for g in a.stack for h in b.stack)
    pairs = [(g, h) for g in a.stack for h in b.stack]
    call = {}
    ret = {}
    for x in a.alphabet.calls:
        for (g, h), name in zip(pairs, stack):
            call[(x, name)] = a.call[(x, g)].kron(b.call[(x, h)])
    for x in a.alphabet.returns:
        for (g, h), name in zip(pairs, stack):
            ret[(x, name)] = a.ret[(x, g)].kron(b.ret[(x, h)])
    internal = {x: a.internal[x].kron(b.internal[x]) for x in a.alphabet.internals}
    return WeightedVPA(a.n * b.n, a.alphabet, stack, call, ret, internal,
                       a.initial.kron(b.initial), a.final.kron(b.final))


def well_matched_level(w, alphabet: VisiblyAlphabet) -> int:
    """Least k with w in L_k (L_0 = internals + eps, L_(i+1) = c L_i r + L_i L_i).

    Computed from the nesting structure alone, independently of the parser:
    a nest c u r needs level(u) + 1 and a sequence of top-level factors is
    the shallowest ordered binary concatenation tree over them.
    """
    syms = tuple(w)

    def seq(i: int, depth: int) -> Tuple[int, int]:
        # parse factors until an unmatched return; return (level, next index)
        levels = []
        while i < len(syms):
            k = alphabet.kind(syms[i])
            if k == "internal":
                levels.append(0)
                i += 1
            elif k == "call":
                inner, j = seq(i + 1, depth + 1)
                if j >= len(syms) or alphabet.kind(syms[j]) != "return":
                    raise NotWellMatched("unmatched call")
                levels.append(inner + 1)
                i = j + 1
            else:
                if depth == 0:
                    raise NotWellMatched("unmatched return")
                break
        return _combine(levels), i

    lvl, end = seq(0, 0)
    if end != len(syms):
        raise NotWellMatched("unmatched return")
    return lvl


def _combine(levels: List[int]) -> int:
    """Least level of an ordered concatenation of factors at the given levels.

    Concatenating words in L_i and L_j lands in L_(max(i, j) + 1). A height h
    is feasible iff the factors, in order, fit as aligned blocks of size 2^l
    into [0, 2^h); earliest-fit placement decides this.
    """
    if not levels:
        return 0
    h = max(levels)
    while True:
        pos = 0
        for lv in levels:
            size = 1 << lv
            pos = -(-pos // size) * size + size
        if pos <= 1 << h:
            return h
        h += 1


def sample_well_matched(alphabet: VisiblyAlphabet, max_depth: int, rng: random.Random,
                        stop: float = 0.5) -> WellMatchedWord:
    """Random derivation in L_max_depth with geometric stopping."""

    def gen(k: int) -> Tree:
        if k == 0 or rng.random() < stop:
            opts = list(alphabet.internals) + [None]
            return rng.choice(opts)
        if alphabet.calls and alphabet.returns and rng.random() < 0.5:
            return ("nest", rng.choice(alphabet.calls), gen(k - 1), rng.choice(alphabet.returns))
        return ("cat", gen(k - 1), gen(k - 1))

    t = gen(max_depth)
    return parse_well_matched(linearize(t), alphabet)


def well_matched_words(alphabet: VisiblyAlphabet, max_len: int) -> Iterator[Word]:
    """Every well-matched word of length <= max_len, shortest first."""
    syms = alphabet.calls + alphabet.returns + alphabet.internals

    def extend(prefix: Word, height: int, remaining: int):
        if height == 0:
            yield prefix
        if remaining == 0 or height > remaining:
            return
        for a in syms:
            k = alphabet.kind(a)
            if k == "call":
                if height + 1 <= remaining - 1:
                    yield from extend(prefix + (a,), height + 1, remaining - 1)
            elif k == "return":
                if height > 0:
                    yield from extend(prefix + (a,), height - 1, remaining - 1)
            else:
                yield from extend(prefix + (a,), height, remaining - 1)

    words = sorted(set(extend((), 0, max_len)), key=lambda w: (len(w), w))
    yield from words
