"""Variable-free arithmetic circuits: exact and modular evaluation, randomized
identity testing, subtraction elimination and layered normal form."""

from __future__ import annotations

import random
from fractions import Fraction
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import BadPrime, BudgetError, NeedsSubElimination, NotNormalized
from .numerics import ZERO, rat
from .rng import coerce_seed, stream
from .verdict import Verdict

CONST, ADD, MUL, SUB = "const", "add", "mul", "sub"
DEFAULT_TRIALS = 40
DEFAULT_EVAL_BUDGET = 1 << 24  # bits


@dataclass(frozen=True)
class Gate:
    kind: str
    left: int = -1
    right: int = -1
    value: Fraction = ZERO

    def __repr__(self) -> str:
        if self.kind == CONST:
            return f"Const({self.value})"
        return f"{self.kind.capitalize()}({self.left}, {self.right})"


class ArithmeticCircuit:
    """Gates listed in topological order: both inputs of gate i have ids < i."""

    __slots__ = ("gates", "output")

    def __init__(self, gates: Sequence[Gate], output: Optional[int] = None):
        gates = tuple(gates)
        if not gates:
            raise ValueError("empty circuit")
        for i, g in enumerate(gates):
            if g.kind == CONST:
                continue
            if g.kind not in (ADD, MUL, SUB):
                raise ValueError(f"gate {i}: unknown kind {g.kind!r}")
            if not (0 <= g.left < i and 0 <= g.right < i):
                raise ValueError(f"gate {i}: inputs must reference earlier gates")
        self.gates = gates
        self.output = len(gates) - 1 if output is None else output
        if not 0 <= self.output < len(gates):
            raise ValueError("output gate out of range")

    def __len__(self) -> int:
        return len(self.gates)

    def __repr__(self) -> str:
        return f"ArithmeticCircuit({len(self.gates)} gates, output={self.output})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ArithmeticCircuit) and self.gates == other.gates and self.output == other.output

    def __hash__(self):
        return hash((self.gates, self.output))

    @property
    def size(self) -> int:
        return len(self.gates)

    def reachable(self) -> List[int]:
        """Ids of gates the output depends on, ascending."""
        seen = {self.output}
        stack = [self.output]
        while stack:
            g = self.gates[stack.pop()]
            if g.kind != CONST:
                for c in (g.left, g.right):
                    if c not in seen:
                        seen.add(c)
                        stack.append(c)
        return sorted(seen)

    def kinds(self) -> set:
        return {self.gates[i].kind for i in self.reachable()}

    def bit_bound(self) -> Tuple[int, int]:
        return circuit_bit_bound(self)

    def eval_mod(self, p: int) -> int:
        return circuit_eval_mod(self, p)


class CircuitBuilder:
    """Append-only gate list; constants are shared."""

    def __init__(self):
        self.gates: List[Gate] = []
        self._consts: Dict[Fraction, int] = {}

    def const(self, v) -> int:
        v = rat(v)
        if v not in self._consts:
            self._consts[v] = self._push(Gate(CONST, value=v))
        return self._consts[v]

    def _push(self, g: Gate) -> int:
        self.gates.append(g)
        return len(self.gates) - 1

    def add(self, a: int, b: int) -> int:
        return self._push(Gate(ADD, a, b))

    def mul(self, a: int, b: int) -> int:
        return self._push(Gate(MUL, a, b))

    def sub(self, a: int, b: int) -> int:
        return self._push(Gate(SUB, a, b))

    def copy_from(self, c: ArithmeticCircuit) -> int:
        """Append every gate of ``c``; return the id of its output here."""
        ids: List[int] = []
        for g in c.gates:
            if g.kind == CONST:
                ids.append(self.const(g.value))
            else:
                ids.append(self._push(Gate(g.kind, ids[g.left], ids[g.right])))
        return ids[c.output]

    def build(self, output: Optional[int] = None) -> ArithmeticCircuit:
        return ArithmeticCircuit(self.gates, output)


def circuit_add(c1: ArithmeticCircuit, c2: ArithmeticCircuit) -> ArithmeticCircuit:
    b = CircuitBuilder()
    x, y = b.copy_from(c1), b.copy_from(c2)
    return b.build(b.add(x, y))


def circuit_scale(c: ArithmeticCircuit, factor) -> ArithmeticCircuit:
    b = CircuitBuilder()
    x = b.copy_from(c)
    return b.build(b.mul(b.const(factor), x))


def squaring_chain(k: int, base: int = 2, plus: int = 0) -> ArithmeticCircuit:
    """base^(2^k) (+ plus) built from 0/1 constants by repeated squaring."""
    b = CircuitBuilder()
    one = b.const(1)
    x = one
    for _ in range(base - 1):
        x = b.add(x, one)
    for _ in range(k):
        x = b.mul(x, x)
    for _ in range(plus):
        x = b.add(x, one)
    return b.build(x)


def _nbits(x: int) -> int:
    return abs(x).bit_length()


def circuit_bit_bound(c: ArithmeticCircuit) -> Tuple[int, int]:
    """(a, b) with |numerator| < 2^a and denominator <= 2^b for the value's
    canonical form; computed without evaluating the circuit."""
    num: Dict[int, int] = {}
    den: Dict[int, int] = {}
    for i in c.reachable():
        g = c.gates[i]
        if g.kind == CONST:
            num[i] = _nbits(g.value.numerator)
            den[i] = (g.value.denominator - 1).bit_length()
        elif g.kind == MUL:
            num[i] = num[g.left] + num[g.right]
            den[i] = den[g.left] + den[g.right]
        else:
            num[i] = max(num[g.left] + den[g.right], num[g.right] + den[g.left]) + 1
            den[i] = den[g.left] + den[g.right]
    return num[c.output], den[c.output]


def circuit_eval_exact(c: ArithmeticCircuit, budget_bits: int = DEFAULT_EVAL_BUDGET) -> Fraction:
    a, b = circuit_bit_bound(c)
    if a + b > budget_bits:
        raise BudgetError(f"value may need {a + b} bits, budget is {budget_bits}")
    val: Dict[int, Fraction] = {}
    for i in c.reachable():
        g = c.gates[i]
        if g.kind == CONST:
            val[i] = g.value
        elif g.kind == ADD:
            val[i] = val[g.left] + val[g.right]
        elif g.kind == MUL:
            val[i] = val[g.left] * val[g.right]
        else:
            val[i] = val[g.left] - val[g.right]
    return val[c.output]


def circuit_eval_mod(c: ArithmeticCircuit, p: int) -> int:
    val: Dict[int, int] = {}
    for i in c.reachable():
        g = c.gates[i]
        if g.kind == CONST:
            q = g.value.denominator % p
            if q == 0:
                raise BadPrime(f"{p} divides the denominator of constant {g.value}")
            val[i] = g.value.numerator * pow(q, -1, p) % p
        elif g.kind == ADD:
            val[i] = (val[g.left] + val[g.right]) % p
        elif g.kind == MUL:
            val[i] = val[g.left] * val[g.right] % p
        else:
            val[i] = (val[g.left] - val[g.right]) % p
    return val[c.output]


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def is_probable_prime(n: int, rng: random.Random, rounds: int = 64) -> bool:
    """Miller-Rabin with ``rounds`` random bases."""
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def sample_prime(bits: int, rng: random.Random) -> int:
    """Uniform prime from [2^bits, 2^(bits+1))."""
    lo = 1 << bits
    while True:
        x = rng.randrange(lo, lo << 1) | 1
        if is_probable_prime(x, rng):
            return x


def prime_bits_for(c1, c2) -> int:
    """Prime size so a non-zero value difference survives a random prime with probability >= 1/2.

    The numerator of v1 - v2 has fewer than B bits; it has at most B/b prime
    divisors of size >= 2^b, while [2^b, 2^(b+1)) holds more than 2^b/b primes.
    """
    a1, d1 = c1.bit_bound()
    a2, d2 = c2.bit_bound()
    diff_bits = max(a1 + d2, a2 + d1) + 1
    return max(64, diff_bits.bit_length() + 6)


def acit_test(c1, c2, trials: int = DEFAULT_TRIALS, rng=None, max_bad_primes: int = 1000) -> Verdict:
    """Randomized test of value(c1) == value(c2) by evaluation modulo random primes.

    ``c1`` and ``c2`` are any objects with ``eval_mod(p)`` and ``bit_bound()``.
    Unequal verdicts are always correct.
    """
    seed = coerce_seed(rng)
    bits = prime_bits_for(c1, c2)
    bad = 0
    for t in range(trials):
        r = stream(seed, "acit", t)
        while True:
            p = sample_prime(bits, r)
            try:
                x, y = c1.eval_mod(p), c2.eval_mod(p)
            except BadPrime:
                bad += 1
                if bad > max_bad_primes:
                    raise
                continue
            break
        if x != y:
            return Verdict("unequal", seed=seed, trials=trials, info={"trial": t, "prime": p})
    return Verdict("probably-equal", seed=seed, trials=trials, info={"prime_bits": bits})


def eliminate_sub(c: ArithmeticCircuit) -> Tuple[ArithmeticCircuit, ArithmeticCircuit]:
    """Split into {+,*} circuits P, Q with value(c) = value(P) - value(Q).

    Each gate is carried as (pos, neg); a missing part stands for 0 and is
    materialized as a 0 constant only at the end.
    """
    b = CircuitBuilder()
    pos: Dict[int, Optional[int]] = {}
    neg: Dict[int, Optional[int]] = {}

    def add(x, y):
        if x is None:
            return y
        if y is None:
            return x
        return b.add(x, y)

    def mul(x, y):
        if x is None or y is None:
            return None
        return b.mul(x, y)

    for i in c.reachable():
        g = c.gates[i]
        if g.kind == CONST:
            v = g.value
            if v.denominator != 1:
                raise ValueError("subtraction elimination needs integer constants")
            pos[i], neg[i] = None, None
            if v > 0:
                pos[i] = _int_const(b, int(v))
            elif v < 0:
                neg[i] = _int_const(b, -int(v))
        elif g.kind == ADD:
            pos[i] = add(pos[g.left], pos[g.right])
            neg[i] = add(neg[g.left], neg[g.right])
        elif g.kind == SUB:
            pos[i] = add(pos[g.left], neg[g.right])
            neg[i] = add(neg[g.left], pos[g.right])
        else:
            pl, nl, pr, nr = pos[g.left], neg[g.left], pos[g.right], neg[g.right]
            pos[i] = add(mul(pl, pr), mul(nl, nr))
            neg[i] = add(mul(pl, nr), mul(nl, pr))
    p_out, q_out = pos[c.output], neg[c.output]
    if p_out is None:
        p_out = b.const(0)
    if q_out is None:
        q_out = b.const(0)
    gates = b.gates
    return _extract(gates, p_out), _extract(gates, q_out)


def _int_const(b: CircuitBuilder, v: int) -> int:
    # 0/1 inputs only: build v in binary from 1 + 1 and doubling
    one = b.const(1)
    if v == 1:
        return one
    acc = None
    power = one
    while v:
        if v & 1:
            acc = power if acc is None else b.add(acc, power)
        v >>= 1
        if v:
            power = b.add(power, power)
    return acc


def _extract(gates: List[Gate], out: int) -> ArithmeticCircuit:
    """Sub-circuit reachable from ``out``, renumbered."""
    keep = ArithmeticCircuit(gates, out).reachable()
    remap = {old: new for new, old in enumerate(keep)}
    new = []
    for old in keep:
        g = gates[old]
        if g.kind == CONST:
            new.append(g)
        else:
            new.append(Gate(g.kind, remap[g.left], remap[g.right]))
    return ArithmeticCircuit(new, remap[out])


@dataclass(frozen=True)
class LayeredCircuit:
    """Circuit in layered normal form.

    ``depth[g]`` is the distance of gate g from the output; inputs of a gate
    at depth i sit at depth i + 1; + gates are at even depth, * gates at odd
    depth and every constant at depth ``d``. ``d`` is odd.
    """

    circuit: ArithmeticCircuit
    depth: Dict[int, int]
    d: int

    @property
    def scale(self) -> int:
        return canonical_scale(self.d)

    def canonical_word(self) -> Tuple[str, ...]:
        return canonical_word(self.d)


def check_layered(lc: LayeredCircuit) -> List[str]:
    problems = []
    c = lc.circuit
    if lc.d % 2 == 0:
        problems.append(f"depth {lc.d} is even")
    if lc.depth.get(c.output) != 0:
        problems.append("output is not at depth 0")
    for i in c.reachable():
        g = c.gates[i]
        t = lc.depth.get(i)
        if t is None:
            problems.append(f"gate {i} has no depth")
            continue
        if g.kind == CONST:
            if t != lc.d:
                problems.append(f"input {i} at depth {t}, expected {lc.d}")
            if g.value not in (0, 1):
                problems.append(f"input {i} has value {g.value}, expected 0 or 1")
            continue
        if g.kind == SUB:
            problems.append(f"gate {i} is a subtraction")
        if g.kind == ADD and t % 2:
            problems.append(f"+ gate {i} at odd depth {t}")
        if g.kind == MUL and t % 2 == 0:
            problems.append(f"* gate {i} at even depth {t}")
        for ch in (g.left, g.right):
            if lc.depth.get(ch) != t + 1:
                problems.append(f"gate {i} at depth {t} has input {ch} at depth {lc.depth.get(ch)}")
    return problems


def canonical_word(d: int) -> Tuple[str, ...]:
    """w_0 = i; w_(n+1) = i w_n (n even); w_(n+1) = c w_n r w_n (n odd)."""
    w: Tuple[str, ...] = ("i",)
    for n in range(d):
        w = ("i",) + w if n % 2 == 0 else ("c",) + w + ("r",) + w
    return w


def canonical_scale(d: int) -> int:
    """M_0 = 1; M_(n+1) = 2 M_n (n even); M_(n+1) = M_n^2 (n odd)."""
    m = 1
    for n in range(d):
        m = 2 * m if n % 2 == 0 else m * m
    return m


def normalize_circuit(c: ArithmeticCircuit, depth: Optional[int] = None) -> LayeredCircuit:
    """Value-preserving layered normal form with odd input depth.

    Gates are levelled by longest path from the output and pushed one level
    down when their parity is wrong; gaps between a gate and its input are
    bridged with identity ladders (x + 0 at even levels, x * 1 at odd
    levels) whose 0 and 1 come from shared constant ladders. ``depth``
    requests a larger (odd) input depth.
    """
    reach = c.reachable()
    for i in reach:
        g = c.gates[i]
        if g.kind == SUB:
            raise NeedsSubElimination(f"gate {i} is a subtraction")
        if g.kind == CONST and g.value not in (0, 1):
            raise ValueError(f"gate {i}: constants must be 0 or 1, got {g.value}")
    internal = [i for i in reach if c.gates[i].kind != CONST]
    parents: Dict[int, List[int]] = {i: [] for i in internal}
    for i in internal:
        g = c.gates[i]
        for ch in {g.left, g.right}:
            if ch in parents:
                parents[ch].append(i)
    level: Dict[int, int] = {}
    for i in reversed(internal):
        if i == c.output:
            lv = 0
        else:
            lv = max(level[p] + 1 for p in parents[i])
        g = c.gates[i]
        if (g.kind == ADD and lv % 2) or (g.kind == MUL and lv % 2 == 0):
            lv += 1
        level[i] = lv
    natural = max(level.values(), default=-1) + 1
    natural = max(natural, 1)
    if natural % 2 == 0:
        natural += 1
    d = natural
    if depth is not None:
        if depth < natural or depth % 2 == 0:
            raise ValueError(f"requested depth {depth} must be odd and >= {natural}")
        d = depth
    offset = d - natural
    for i in level:
        level[i] += offset

    b = CircuitBuilder()
    gate_depth: Dict[int, int] = {}
    ladders: Dict[Tuple[int, int], int] = {}

    def put(g: Gate, t: int) -> int:
        gid = b._push(g)
        gate_depth[gid] = t
        return gid

    def const_at(v: int, t: int) -> int:
        key = (v, t)
        if key in ladders:
            return ladders[key]
        if t == d:
            gid = put(Gate(CONST, value=rat(v)), t)
        elif t % 2 == 0:
            gid = put(Gate(ADD, const_at(v, t + 1), const_at(0, t + 1)), t)
        else:
            gid = put(Gate(MUL, const_at(v, t + 1), const_at(v, t + 1)), t)
        ladders[key] = gid
        return gid

    node: Dict[int, int] = {}
    lifted: Dict[Tuple[int, int], int] = {}

    def lift(orig: int, t: int) -> int:
        """Gate at depth t carrying the value of original gate ``orig``."""
        g = c.gates[orig]
        if g.kind == CONST:
            return const_at(int(g.value), t)
        key = (orig, t)
        if key in lifted:
            return lifted[key]
        if t == level[orig]:
            gid = build(orig)
        else:
            below = lift(orig, t + 1)
            if t % 2 == 0:
                gid = put(Gate(ADD, below, const_at(0, t + 1)), t)
            else:
                gid = put(Gate(MUL, below, const_at(1, t + 1)), t)
        lifted[key] = gid
        return gid

    def build(orig: int) -> int:
        if orig in node:
            return node[orig]
        g = c.gates[orig]
        t = level[orig]
        left = lift(g.left, t + 1)
        right = lift(g.right, t + 1)
        gid = put(Gate(g.kind, left, right), t)
        node[orig] = gid
        return gid

    root = lift(c.output, 0)
    lc = _relabel(b.gates, gate_depth, root, d)
    return lc


def _relabel(gates: List[Gate], depth: Dict[int, int], root: int, d: int) -> LayeredCircuit:
    circ = _extract(gates, root)
    keep = ArithmeticCircuit(gates, root).reachable()
    new_depth = {new: depth[old] for new, old in enumerate(keep)}
    return LayeredCircuit(circ, new_depth, d)


def layered(c: ArithmeticCircuit, depth: Dict[int, int], d: int) -> LayeredCircuit:
    """Wrap an already-layered circuit, checking the normal form."""
    lc = LayeredCircuit(c, dict(depth), d)
    problems = check_layered(lc)
    if problems:
        raise NotNormalized("; ".join(problems))
    return lc
