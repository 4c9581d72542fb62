"""Reductions between visibly pushdown automata and arithmetic circuits.

Circuits become VPAs whose canonical word carries the circuit value; VPAs
become circuits that sum squared weight differences over L_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Dict, List, Optional, Tuple

from .circuits import (ADD, MUL, ArithmeticCircuit, CircuitBuilder, LayeredCircuit,
                       acit_test, check_layered, normalize_circuit, sample_prime)
from .errors import AlphabetError, BadPrime, NotNormalized
from .numerics import ONE, ZERO, QMatrix
from .rng import coerce_seed, stream
from .verdict import Verdict
from .vpa import (Sparse, SparseVPA, VisiblyAlphabet, WeightedVPA, sparse_add, sparse_identity,
                  sparse_mul, sparse_product)

CIRCUIT_ALPHABET = VisiblyAlphabet(("c",), ("r",), ("i",))
HALF = Fraction(1, 2)


def circuit_to_vpa(lc: LayeredCircuit) -> Tuple[WeightedVPA, Tuple[str, ...], int]:
    """VPA with weight(w_d) = value / M_d and weight 0 on every other word.

    One state per gate plus a sink state reached after reading an input 1.
    A + gate reads ``i`` and moves to either child with weight 1/2; a * gate
    reads ``c``, pushes its right child and moves to its left child; the sink
    pops a gate on ``r`` and continues there. Only the sink is final.
    """
    problems = check_layered(lc)
    if problems:
        raise NotNormalized("; ".join(problems))
    c = lc.circuit
    gates = c.reachable()
    index = {g: k for k, g in enumerate(gates)}
    n = len(gates) + 1
    top = n - 1
    stack = tuple(f"g{k}" for k in range(len(gates)))
    im = [[ZERO] * n for _ in range(n)]
    calls: Dict[str, List[List[Fraction]]] = {}
    rets: Dict[str, QMatrix] = {}
    for g in gates:
        s = index[g]
        gate = c.gates[g]
        if gate.kind == ADD:
            im[s][index[gate.left]] += HALF
            im[s][index[gate.right]] += HALF
        elif gate.kind == MUL:
            rows = calls.setdefault(stack[index[gate.right]], [[ZERO] * n for _ in range(n)])
            rows[s][index[gate.left]] += ONE
        elif gate.value == 1:
            im[s][top] = ONE
    for k, name in enumerate(stack):
        rm = [[ZERO] * n for _ in range(n)]
        rm[top][k] = ONE
        rets[("r", name)] = QMatrix(rm)
    v = WeightedVPA(
        n, CIRCUIT_ALPHABET, stack,
        {("c", g): QMatrix(rows) for g, rows in calls.items()},
        rets,
        {"i": QMatrix(im)},
        QMatrix.unit_row(n, index[c.output]),
        QMatrix.unit_row(n, top).transpose(),
    )
    return v, lc.canonical_word(), lc.scale


def acit_to_vpa_equivalence(c1: ArithmeticCircuit, c2: ArithmeticCircuit
                            ) -> Tuple[WeightedVPA, WeightedVPA]:
    """Layer both circuits to a common depth and translate each to a VPA."""
    l1, l2 = common_layering(c1, c2)
    return circuit_to_vpa(l1)[0], circuit_to_vpa(l2)[0]


def common_layering(c1: ArithmeticCircuit, c2: ArithmeticCircuit
                    ) -> Tuple[LayeredCircuit, LayeredCircuit]:
    d = max(normalize_circuit(c1).d, normalize_circuit(c2).d)
    return normalize_circuit(c1, depth=d), normalize_circuit(c2, depth=d)


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _support(m: Sparse) -> Dict[int, int]:
    return {i: sum(1 << j for j in row) for i, row in m.items()}


def summary_relation(v: SparseVPA) -> List[int]:
    """Z[p] is a bitmask over q: some well-matched word may lead from p to q.

    Over-approximates the support of M_A(u) (cancellations are ignored).
    """
    n = v.n
    z = [1 << p for p in range(n)]
    for m in v.internal.values():
        for p, mask in _support(m).items():
            z[p] |= mask
    csum: Dict[str, Dict[int, int]] = {}
    rsum: Dict[str, Dict[int, int]] = {}
    for (_, g), m in v.call.items():
        acc = csum.setdefault(g, {})
        for p, mask in _support(m).items():
            acc[p] = acc.get(p, 0) | mask
    for (_, g), m in v.ret.items():
        acc = rsum.setdefault(g, {})
        for p, mask in _support(m).items():
            acc[p] = acc.get(p, 0) | mask
    nests = [(csum[g], rsum[g]) for g in csum if g in rsum]
    changed = True
    while changed:
        changed = False
        for p in range(n):
            new = z[p]
            for q in _bits(z[p]):
                new |= z[q]
            for cs, rs in nests:
                for x in _bits(cs.get(p, 0)):
                    for y in _bits(z[x]):
                        new |= rs.get(y, 0)
            if new != z[p]:
                z[p] = new
                changed = True
    return z


def trim(v) -> SparseVPA:
    """Drop states that lie on no weighted run from alpha to eta.

    Weights of well-matched words are unchanged: every run contributing to
    alpha M_A(w) eta, including runs inside nested calls, stays inside the
    kept states.
    """
    v = v.sparse()
    z = summary_relation(v)
    call_edges: Dict[int, int] = {}
    for cm in v.call.values():
        for p, mask in _support(cm).items():
            call_edges[p] = call_edges.get(p, 0) | mask
    fwd = 0
    todo = list(v.initial)
    while todo:
        p = todo.pop()
        if fwd >> p & 1:
            continue
        fwd |= 1 << p
        todo.extend(_bits((z[p] | call_edges.get(p, 0)) & ~fwd))
    target = sum(1 << q for q in v.final)
    ret_src: Dict[int, int] = {}
    for rm in v.ret.values():
        for y, mask in _support(rm).items():
            ret_src[y] = ret_src.get(y, 0) | mask
    back = 0
    changed = True
    while changed:
        changed = False
        for p in range(v.n):
            if back >> p & 1:
                continue
            if z[p] & (target | back) or ret_src.get(p, 0) & back:
                back |= 1 << p
                changed = True
    keep = [p for p in range(v.n) if fwd >> p & 1 and back >> p & 1]
    return restrict(v, keep)


def restrict(v: SparseVPA, keep: List[int]) -> SparseVPA:
    pos = {p: k for k, p in enumerate(keep)}

    def sub(m: Sparse) -> Sparse:
        out = {}
        for i, row in m.items():
            if i in pos:
                r = {pos[j]: x for j, x in row.items() if j in pos}
                if r:
                    out[pos[i]] = r
        return out

    def subs(d):
        return {k: sm for k, sm in ((k, sub(m)) for k, m in d.items()) if sm}

    call, ret = subs(v.call), subs(v.ret)
    used = {g for _, g in call} & {g for _, g in ret}
    return SparseVPA(
        len(keep), v.alphabet, tuple(g for g in v.stack if g in used),
        {k: m for k, m in call.items() if k[1] in used},
        {k: m for k, m in ret.items() if k[1] in used},
        subs(v.internal),
        {pos[j]: x for j, x in v.initial.items() if j in pos},
        {pos[j]: x for j, x in v.final.items() if j in pos},
    )


class _ModSpace:
    """Row space over Z/p for sparse vectors (dicts)."""

    def __init__(self, p: int):
        self.p = p
        self.pivots: Dict[object, Dict[object, int]] = {}

    def __len__(self) -> int:
        return len(self.pivots)

    def insert(self, vec: Dict[object, int]) -> bool:
        p = self.p
        v = {k: x % p for k, x in vec.items() if x % p}
        while v:
            # eliminate pivot columns until one is left over
            hit = next((k for k in v if k in self.pivots), None)
            if hit is None:
                break
            f = v[hit]
            for k, x in self.pivots[hit].items():
                y = (v.get(k, 0) - f * x) % p
                if y:
                    v[k] = y
                else:
                    v.pop(k, None)
        if not v:
            return False
        col = min(v, key=repr)
        inv = pow(v[col], -1, p)
        row = {k: x * inv % p for k, x in v.items()}
        for other in self.pivots.values():
            f = other.get(col)
            if f:
                for k, x in row.items():
                    y = (other.get(k, 0) - f * x) % p
                    if y:
                        other[k] = y
                    else:
                        other.pop(k, None)
        self.pivots[col] = row
        return True


def _mod_sparse(m: Sparse, p: int) -> Sparse:
    out = {}
    for i, row in m.items():
        r = {}
        for j, x in row.items():
            x = Fraction(x)
            q = x.denominator % p
            if q == 0:
                raise BadPrime(f"{p} divides a transition weight denominator")
            y = x.numerator * pow(q, -1, p) % p
            if y:
                r[j] = y
        if r:
            out[i] = r
    return out


def _mul_mod(a: Sparse, b: Sparse, p: int) -> Sparse:
    return sparse_mul(a, b, p)


def _nest_parts(v: SparseVPA, p: int) -> List[Tuple[Sparse, Sparse]]:
    """Per stack symbol: (sum of call matrices, sum of return matrices) mod p.

    Summing over calls and returns separately is exact: every call may be
    closed by every return in L_(i+1) = calls L_i returns.
    """
    csum: Dict[str, Sparse] = {}
    rsum: Dict[str, Sparse] = {}
    for (_, g), m in v.call.items():
        csum[g] = sparse_add(csum.get(g, {}), _mod_sparse(m, p), p)
    for (_, g), m in v.ret.items():
        rsum[g] = sparse_add(rsum.get(g, {}), _mod_sparse(m, p), p)
    return [(csum[g], rsum[g]) for g in v.stack if csum.get(g) and rsum.get(g)]


def stabilization_index(vpas: List, p: int, limit: Optional[int] = None) -> int:
    """Least k with span{M(u) : u in L_k} = span{M(u) : u in L_(k+1)} modulo p.

    M(u) is the block-diagonal combination of the given automata. Once two
    consecutive levels span the same space, every later level does too.
    Working modulo p can only report a smaller index when p divides one of
    finitely many non-zero minors.
    """
    vs = [v.sparse() for v in vpas]
    nests = [_nest_parts(v, p) for v in vs]
    ints = [[_mod_sparse(v.internal.get(a, {}), p) for a in v.alphabet.internals] for v in vs]

    def flat(x: Tuple[Sparse, ...]) -> Dict[object, int]:
        return {(b, i, j): y for b, m in enumerate(x) for i, row in m.items() for j, y in row.items()}

    space = _ModSpace(p)
    basis: List[Tuple[Sparse, ...]] = []

    def offer(x) -> Optional[tuple]:
        if space.insert(flat(x)):
            basis.append(x)
            return x
        return None

    new = []
    gens = [tuple(sparse_identity(v.n, 1) for v in vs)]
    gens += [tuple(ints[b][a] for b in range(len(vs))) for a in range(len(vs[0].alphabet.internals))]
    for x in gens:
        if offer(x):
            new.append(x)
    k = 0
    while new:
        if limit is not None and k >= limit:
            return limit
        old = list(basis)
        fresh = []
        for x in new:
            nested = tuple(_nest_of(x[b], nests[b], p) for b in range(len(vs)))
            if offer(nested):
                fresh.append(nested)
            for y in old:
                for z in (tuple(_mul_mod(x[b], y[b], p) for b in range(len(vs))),
                          tuple(_mul_mod(y[b], x[b], p) for b in range(len(vs)))):
                    if offer(z):
                        fresh.append(z)
        new = fresh
        k += 1
    return max(k - 1, 0)


def _nest_of(x: Sparse, parts: List[Tuple[Sparse, Sparse]], p: int) -> Sparse:
    acc: Sparse = {}
    for c, r in parts:
        acc = sparse_add(acc, _mul_mod(_mul_mod(c, x, p), r, p), p)
    return acc


def _rational_mod(x, p: int) -> int:
    x = Fraction(x)
    q = x.denominator % p
    if q == 0:
        raise BadPrime(f"{p} divides the denominator of {x}")
    return x.numerator * pow(q, -1, p) % p


def _max_abs(values) -> int:
    return max((abs(v) for v in values), default=0)


class MatrixSumCircuit:
    """alpha S_k eta for S_0 = I + sum M_int, S_(i+1) = sum C S R + S S, held implicitly.

    Evaluates modulo a prime without materializing gates and reports the same
    kind of size bound as an explicit circuit, so it can stand in for
    ``sum_circuit(v, k)`` inside ``acit_test``.
    """

    def __init__(self, v, k: int):
        self.v = v.sparse()
        self.k = k

    def eval_mod(self, p: int) -> int:
        v = self.v
        n = v.n
        s = sparse_identity(n, 1)
        for m in v.internal.values():
            s = sparse_add(s, _mod_sparse(m, p), p)
        parts = _nest_parts(v, p)
        for _ in range(self.k):
            nxt = sparse_mul(s, s, p)
            for c, r in parts:
                nxt = sparse_add(nxt, sparse_mul(sparse_mul(c, s, p), r, p), p)
            s = nxt
        alpha = {i: _rational_mod(x, p) for i, x in v.initial.items()}
        eta = {j: _rational_mod(x, p) for j, x in v.final.items()}
        total = 0
        for i, a in alpha.items():
            for j, x in s.get(i, {}).items():
                if j in eta:
                    total += a * x * eta[j]
        return total % p

    def bit_bound(self) -> Tuple[int, int]:
        v = self.v
        n = max(v.n, 1)
        mats = list(v.internal.values()) + list(v.call.values()) + list(v.ret.values())
        d = 1
        for m in mats:
            for row in m.values():
                for x in row.values():
                    d = lcm(d, Fraction(x).denominator)
        dbits = d.bit_length()

        def scaled_max(ms) -> int:
            return int(_max_abs(Fraction(x) * d for m in ms for row in m.values() for x in row.values()))

        b = (d + len(v.internal) * scaled_max(v.internal.values())).bit_length()
        e = 1
        stack = {g for _, g in v.call} & {g for _, g in v.ret}
        nest_bits = (len(stack) * len(v.alphabet.calls) * len(v.alphabet.returns) * n * n
                     * scaled_max(v.call.values()) * scaled_max(v.ret.values())).bit_length()
        for _ in range(self.k):
            e2 = max(e + 2, 2 * e)
            nest = nest_bits + b + (e2 - e - 2) * dbits if stack else 0
            square = n.bit_length() + 2 * b + (e2 - 2 * e) * dbits
            b = max(nest, square) + 1
            e = e2
        alpha = [Fraction(x) for x in v.initial.values()]
        eta = [Fraction(x) for x in v.final.values()]
        da = lcm(1, *(x.denominator for x in alpha))
        de = lcm(1, *(x.denominator for x in eta))
        num = int(n * n * _max_abs(x * da for x in alpha) * _max_abs(x * de for x in eta)).bit_length() + b
        return num, da.bit_length() + de.bit_length() + e * dbits


@dataclass(frozen=True)
class Combination:
    """sum of coef * value(part), for parts with eval_mod and bit_bound."""

    terms: Tuple[Tuple[int, object], ...]

    def eval_mod(self, p: int) -> int:
        return sum(c * part.eval_mod(p) for c, part in self.terms) % p

    def bit_bound(self) -> Tuple[int, int]:
        bounds = [part.bit_bound() for _, part in self.terms]
        den = sum(b for _, b in bounds)
        num = max((abs(c).bit_length() + a + den - b for (c, _), (a, b) in zip(self.terms, bounds)),
                  default=0)
        return num + len(self.terms).bit_length(), den


def sum_circuit(v, k: int) -> ArithmeticCircuit:
    """Explicit circuit for alpha S_k eta (see MatrixSumCircuit).

    Words are counted with their derivation multiplicities in L_k.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    v = v.sparse()
    n = v.n
    b = CircuitBuilder()

    def lin(ids: List[int]) -> Optional[int]:
        if not ids:
            return None
        acc = ids[0]
        for x in ids[1:]:
            acc = b.add(acc, x)
        return acc

    s: Dict[Tuple[int, int], int] = {}
    for i in range(n):
        for j in range(n):
            x = Fraction(int(i == j)) + sum((Fraction(m.get(i, {}).get(j, 0)) for m in v.internal.values()), ZERO)
            if x:
                s[(i, j)] = b.const(x)
    csum: Dict[str, Dict[Tuple[int, int], Fraction]] = {}
    rsum: Dict[str, Dict[Tuple[int, int], Fraction]] = {}
    for table, src in ((csum, v.call), (rsum, v.ret)):
        for (_, g), m in src.items():
            acc = table.setdefault(g, {})
            for i, row in m.items():
                for j, x in row.items():
                    acc[(i, j)] = acc.get((i, j), ZERO) + Fraction(x)
    parts = [(csum[g], rsum[g]) for g in v.stack if g in csum and g in rsum]

    def times_const(c: Dict[Tuple[int, int], Fraction], m: Dict[Tuple[int, int], int], left: bool):
        out: Dict[Tuple[int, int], int] = {}
        for i in range(n):
            for j in range(n):
                ids = []
                for t in range(n):
                    if left:
                        w, g = c.get((i, t), ZERO), m.get((t, j))
                    else:
                        g, w = m.get((i, t)), c.get((t, j), ZERO)
                    if w and g is not None:
                        ids.append(g if w == 1 else b.mul(b.const(w), g))
                x = lin(ids)
                if x is not None:
                    out[(i, j)] = x
        return out

    for _ in range(k):
        terms: Dict[Tuple[int, int], List[int]] = {}
        for i in range(n):
            for j in range(n):
                for t in range(n):
                    x, y = s.get((i, t)), s.get((t, j))
                    if x is not None and y is not None:
                        terms.setdefault((i, j), []).append(b.mul(x, y))
        for c, r in parts:
            nested = times_const(r, times_const(c, s, True), False)
            for key, g in nested.items():
                terms.setdefault(key, []).append(g)
        s = {key: lin(ids) for key, ids in terms.items()}
    out = []
    for i, a in v.initial.items():
        for j, e in v.final.items():
            g = s.get((i, j))
            if g is not None:
                w = Fraction(a) * Fraction(e)
                out.append(g if w == 1 else b.mul(b.const(w), g))
    root = lin(out)
    return b.build(b.const(0) if root is None else root)


def vpa_equivalence(a, b, trials: int = 40, rng=None, k_override: Optional[int] = None) -> Verdict:
    """Randomized equivalence of weighted VPAs on well-matched words.

    Compares sum_k (A x A) + sum_k (B x B) with 2 sum_k (A x B); the
    difference is the sum over L_k of c_w (A(w) - B(w))^2 with positive
    derivation multiplicities c_w. An inequivalent verdict is always correct.
    """
    if a.alphabet != b.alphabet:
        raise AlphabetError("VPAs must share the visibly pushdown alphabet")
    seed = coerce_seed(rng)
    ta, tb = trim(a), trim(b)
    bound = (a.n + b.n) ** 2
    if k_override is not None:
        k = k_override
    else:
        p = sample_prime(64, stream(seed, "stabilize"))
        k = min(bound, stabilization_index([ta, tb], p))
    left = Combination(((1, MatrixSumCircuit(trim(sparse_product(ta, ta)), k)),
                        (1, MatrixSumCircuit(trim(sparse_product(tb, tb)), k))))
    right = Combination(((2, MatrixSumCircuit(trim(sparse_product(ta, tb)), k)),))
    res = acit_test(left, right, trials, seed)
    info = {"k": k, "k_bound": bound, "states": [ta.n, tb.n]}
    kind = "probably-equivalent" if res.positive else "inequivalent"
    return Verdict(kind, seed=seed, trials=trials, info=info)
