"""Random instance generators and independent oracles shared by the tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from probeq.circuits import ArithmeticCircuit, CircuitBuilder
from probeq.cost import EPS, CostAutomaton
from probeq.numerics import QMatrix
from probeq.vpa import VisiblyAlphabet, WeightedVPA, linearize
from probeq.weighted import WeightedAutomaton


def rand_q(r: random.Random, span: int = 3, den: int = 3, zero_bias: float = 0.4) -> Fraction:
    if r.random() < zero_bias:
        return Fraction(0)
    return Fraction(r.randint(-span, span), r.randint(1, den))


def rand_matrix(r, n, **kw) -> QMatrix:
    return QMatrix([[rand_q(r, **kw) for _ in range(n)] for _ in range(n)])


def rand_weighted(r: random.Random, n: int, alphabet) -> WeightedAutomaton:
    return WeightedAutomaton(
        tuple(alphabet),
        {a: rand_matrix(r, n) for a in alphabet},
        QMatrix.row_vector([rand_q(r) for _ in range(n)]),
        QMatrix.col_vector([rand_q(r) for _ in range(n)]),
    )


def rand_pair(r: random.Random, max_n: int = 6, max_sigma: int = 3):
    """Random weighted automata pair; a third of them are equivalent by construction."""
    alphabet = "abc"[: r.randint(1, max_sigma)]
    nb, nc = r.randint(1, max_n // 2), r.randint(1, max_n // 2)
    b = rand_weighted(r, nb, alphabet)
    mode = r.random()
    if mode < 1 / 3:
        c = conjugate(b, r)
    elif mode < 2 / 3:
        c = b
    else:
        c = rand_weighted(r, nc, alphabet)
    return b, c


def conjugate(a: WeightedAutomaton, r: random.Random) -> WeightedAutomaton:
    """Same weights, different representation: alpha P^-1, P M P^-1, P eta."""
    n = a.n
    while True:
        p = QMatrix([[Fraction(r.randint(-2, 2)) for _ in range(n)] for _ in range(n)])
        try:
            pinv = p.inverse()
            break
        except ArithmeticError:
            continue
    return WeightedAutomaton(a.alphabet, {s: p @ m @ pinv for s, m in a.transitions.items()},
                             a.initial @ pinv, p @ a.final)


def words(alphabet, max_len):
    for k in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=k)


def naive_weight(a: WeightedAutomaton, w) -> Fraction:
    """Sum over all state paths; independent of the vector-matrix code."""
    n = a.n
    total = Fraction(0)
    for path in itertools.product(range(n), repeat=len(w) + 1):
        x = a.initial[(0, path[0])]
        for k, s in enumerate(w):
            if not x:
                break
            x *= a.transitions[s][(path[k], path[k + 1])]
        total += x * a.final[(path[-1], 0)]
    return total


def rand_cost(r: random.Random, n: int, s: int, alphabet=("a",), eps_mass=Fraction(3, 4)) -> CostAutomaton:
    """Random probabilistic-style cost automaton with epsilon rows of total weight < 1."""
    arcs = []
    costs = list(itertools.product((-1, 0, 1), repeat=s))
    for i in range(n):
        budget = Fraction(r.randint(0, 3), 4) * eps_mass
        k = r.randint(0, 2)
        for _ in range(k):
            if budget <= 0:
                break
            w = budget / 2 if r.random() < 0.5 else budget / 3
            arcs.append((i, EPS, r.randrange(n), w, r.choice(costs)))
            budget -= w
        for a in alphabet:
            for _ in range(r.randint(0, 2)):
                arcs.append((i, a, r.randrange(n), Fraction(r.randint(1, 3), 4), r.choice(costs)))
    initial = [Fraction(r.randint(0, 2)) for _ in range(n)]
    final = [Fraction(r.randint(0, 3), 4) for _ in range(n)]
    return CostAutomaton.build(n, s, alphabet, merge_arcs(arcs), initial, final)


def merge_arcs(arcs):
    acc = {}
    for src, sym, dst, w, c in arcs:
        key = (src, sym, dst, tuple(c))
        acc[key] = acc.get(key, Fraction(0)) + w
    return [(k[0], k[1], k[2], w, k[3]) for k, w in acc.items()]


def rand_vpa(r: random.Random, n: int, alphabet: VisiblyAlphabet, stack=("x", "y"), **kw) -> WeightedVPA:
    return WeightedVPA(
        n, alphabet, stack,
        {(a, g): rand_matrix(r, n, **kw) for a in alphabet.calls for g in stack},
        {(b, g): rand_matrix(r, n, **kw) for b in alphabet.returns for g in stack},
        {a: rand_matrix(r, n, **kw) for a in alphabet.internals},
        QMatrix.row_vector([rand_q(r) for _ in range(n)]),
        QMatrix.col_vector([rand_q(r) for _ in range(n)]),
    )


SMALL_VPA_ALPHABET = VisiblyAlphabet(("c",), ("r",), ("i",))


def naive_vpa_weight(v: WeightedVPA, w) -> Fraction:
    """Run semantics: explicit stack of pushed symbols, summing over all runs."""
    kinds = v.alphabet
    # configurations: (state, stack tuple) -> weight
    conf = {}
    for i in range(v.n):
        if v.initial[(0, i)]:
            conf[(i, ())] = v.initial[(0, i)]
    for a in w:
        nxt = {}
        kind = kinds.kind(a)
        for (q, st), x in conf.items():
            if kind == "internal":
                moves = [(v.internal[a], st)]
            elif kind == "call":
                moves = [(v.call[(a, g)], st + (g,)) for g in v.stack]
            else:
                if not st:
                    continue
                moves = [(v.ret[(a, st[-1])], st[:-1])]
            for m, st2 in moves:
                for q2 in range(v.n):
                    y = m[(q, q2)]
                    if y:
                        key = (q2, st2)
                        nxt[key] = nxt.get(key, Fraction(0)) + x * y
        conf = nxt
    return sum((x * v.final[(q, 0)] for (q, st), x in conf.items() if not st), Fraction(0))


def derivations(alphabet: VisiblyAlphabet, k: int):
    """Every derivation tree of L_k (with repetition), as linearized words."""
    level = [None] + list(alphabet.internals)
    for _ in range(k):
        nxt = [("nest", a, t, b) for a in alphabet.calls for t in level for b in alphabet.returns]
        nxt += [("cat", t1, t2) for t1 in level for t2 in level]
        level = nxt
    return [linearize(t) for t in level]


def rand_plus_times_circuit(r: random.Random, inner: int, zero_prob: float = 0.3) -> ArithmeticCircuit:
    b = CircuitBuilder()
    xs = [b.const(1)]
    if r.random() < zero_prob:
        xs.append(b.const(0))
    for _ in range(inner):
        x, y = r.choice(xs), r.choice(xs)
        xs.append(b.add(x, y) if r.random() < 0.5 else b.mul(x, y))
    return b.build(xs[-1])


def memo_eval(c: ArithmeticCircuit):
    """Recursive evaluation with memoization, independent of the topological loop."""
    from functools import lru_cache

    import sys

    sys.setrecursionlimit(10000)

    @lru_cache(maxsize=None)
    def go(i):
        g = c.gates[i]
        if g.kind == "const":
            return g.value
        x, y = go(g.left), go(g.right)
        return {"add": x + y, "mul": x * y, "sub": x - y}[g.kind]

    return go(c.output)
