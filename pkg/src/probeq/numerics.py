"""Exact rational arithmetic: dense matrices, row spaces, univariate and
Laurent polynomials.

Scalars are :class:`fractions.Fraction` throughout (re-exported as
``Rational``). Fractions are always stored reduced with a positive
denominator, so equality and hashing are structural.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import DimError, EvalError, Singular

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected: every weight in this package is exact.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if any(ch in s for ch in ".eE") or not s:
            raise ValueError(f"not an exact rational: {x!r}")
        return Fraction(s)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def rat_arith(a: Fraction, b: Fraction, op: str) -> Fraction:
    """Apply one of ``+ - * /`` exactly. Division by zero raises ZeroDivisionError."""
    if op == "+":
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×"):
        return a * b
    if op in ("/", "÷"):
        return a / b
    raise ValueError(f"unknown operator {op!r}")


def _size(x: Fraction) -> int:
    return x.numerator.bit_length() + x.denominator.bit_length()


class QMatrix:
    """Immutable dense matrix over Q, stored row-major as tuples of Fractions."""

    __slots__ = ("rows", "cols", "_data", "_hash")

    def __init__(self, data: Iterable[Iterable]):
        rows = tuple(tuple(rat(x) for x in row) for row in data)
        if not rows:
            raise DimError("matrix needs at least one row")
        width = len(rows[0])
        if width == 0 or any(len(r) != width for r in rows):
            raise DimError("ragged or empty matrix rows")
        self._data = rows
        self.rows = len(rows)
        self.cols = width
        self._hash = None

    @classmethod
    def _raw(cls, rows: Tuple[Tuple[Fraction, ...], ...]) -> "QMatrix":
        m = object.__new__(cls)
        m._data = rows
        m.rows = len(rows)
        m.cols = len(rows[0])
        m._hash = None
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        return cls._raw(tuple((ZERO,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls._raw(tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)))

    @classmethod
    def row_vector(cls, values: Iterable) -> "QMatrix":
        return cls([list(values)])

    @classmethod
    def col_vector(cls, values: Iterable) -> "QMatrix":
        return cls([[v] for v in values])

    @classmethod
    def unit_row(cls, n: int, i: int) -> "QMatrix":
        return cls._raw((tuple(ONE if j == i else ZERO for j in range(n)),))

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: Tuple[int, int]) -> Fraction:
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self._data[i]

    def tolist(self) -> List[List[Fraction]]:
        return [list(r) for r in self._data]

    def entries(self) -> Tuple[Fraction, ...]:
        return tuple(x for r in self._data for x in r)

    def __iter__(self):
        return iter(self._data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self._data == other._data

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._data)
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self._data)
        return f"QMatrix([{body}])"

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._data for x in r)

    def __add__(self, other: "QMatrix") -> "QMatrix":
        if self.shape != other.shape:
            raise DimError(f"cannot add {self.shape} and {other.shape}")
        return QMatrix._raw(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._data, other._data)))

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        if self.shape != other.shape:
            raise DimError(f"cannot subtract {self.shape} and {other.shape}")
        return QMatrix._raw(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._data, other._data)))

    def __neg__(self) -> "QMatrix":
        return QMatrix._raw(tuple(tuple(-a for a in r) for r in self._data))

    def scale(self, c) -> "QMatrix":
        c = rat(c)
        return QMatrix._raw(tuple(tuple(c * a for a in r) for r in self._data))

    def transpose(self) -> "QMatrix":
        return QMatrix._raw(tuple(zip(*self._data)))

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        return mat_mul(self, other)

    def kron(self, other: "QMatrix") -> "QMatrix":
        out = []
        for r in self._data:
            for s in other._data:
                out.append(tuple(a * b for a in r for b in s))
        return QMatrix._raw(tuple(out))

    def inverse(self) -> "QMatrix":
        return mat_inverse(self)


def mat_mul(a: QMatrix, b: QMatrix) -> QMatrix:
    if a.cols != b.rows:
        raise DimError(f"cannot multiply {a.shape} by {b.shape}")
    bt = tuple(zip(*b._data))
    out = []
    for r in a._data:
        nz = [(k, x) for k, x in enumerate(r) if x]
        if not nz:
            out.append((ZERO,) * b.cols)
            continue
        out.append(tuple(sum((x * col[k] for k, x in nz), ZERO) for col in bt))
    return QMatrix._raw(tuple(out))


def block_diag(a: QMatrix, b: QMatrix) -> QMatrix:
    rows = [tuple(r) + (ZERO,) * b.cols for r in a._data]
    rows += [(ZERO,) * a.cols + tuple(r) for r in b._data]
    return QMatrix._raw(tuple(rows))


def hstack(a: QMatrix, b: QMatrix) -> QMatrix:
    if a.rows != b.rows:
        raise DimError("row count mismatch")
    return QMatrix._raw(tuple(tuple(r) + tuple(s) for r, s in zip(a._data, b._data)))


def vstack(a: QMatrix, b: QMatrix) -> QMatrix:
    if a.cols != b.cols:
        raise DimError("column count mismatch")
    return QMatrix._raw(a._data + b._data)


def mat_inverse(a: QMatrix) -> QMatrix:
    """Gauss-Jordan inverse.

    Pivots are chosen as the candidate with the shortest bit representation,
    which keeps intermediate fractions small. Raises :class:`Singular`.
    """
    if a.rows != a.cols:
        raise DimError(f"cannot invert non-square {a.shape} matrix")
    n = a.rows
    m = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(a._data)]
    for col in range(n):
        best = None
        for r in range(col, n):
            x = m[r][col]
            if x and (best is None or _size(x) < _size(m[best][col])):
                best = r
        if best is None:
            raise Singular("matrix is singular")
        m[col], m[best] = m[best], m[col]
        piv = m[col]
        inv = ONE / piv[col]
        piv[:] = [x * inv for x in piv]
        for r in range(n):
            if r == col:
                continue
            f = m[r][col]
            if f:
                row = m[r]
                m[r] = [x - f * y for x, y in zip(row, piv)]
    return QMatrix._raw(tuple(tuple(r[n:]) for r in m))


def rank(vectors: Sequence[Sequence]) -> int:
    """Rank by plain row reduction (no shared state with :class:`RowSpace`)."""
    rows = [[rat(x) for x in v] for v in vectors]
    if not rows:
        return 0
    width = len(rows[0])
    r = 0
    for c in range(width):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(r + 1, len(rows)):
            f = rows[i][c] / rows[r][c]
            if f:
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


class RowSpace:
    """Incrementally maintained span of row vectors in Q^width.

    Stored rows are in reduced echelon form relative to earlier rows, so a
    single forward sweep reduces a candidate vector.
    """

    def __init__(self, width: int):
        self.width = width
        self._rows: List[Tuple[int, List[Fraction]]] = []

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def dimension(self) -> int:
        return len(self._rows)

    def _reduce(self, vec: Sequence) -> List[Fraction]:
        v = [rat(x) for x in vec]
        if len(v) != self.width:
            raise DimError(f"vector of width {len(v)} in space of width {self.width}")
        for pc, row in self._rows:
            f = v[pc]
            if f:
                v = [x - f * y for x, y in zip(v, row)]
        return v

    def contains(self, vec: Sequence) -> bool:
        return not any(self._reduce(vec))

    def insert(self, vec: Sequence) -> bool:
        """Add ``vec``; return True iff it was independent of the span."""
        v = self._reduce(vec)
        pc = next((i for i, x in enumerate(v) if x), None)
        if pc is None:
            return False
        inv = ONE / v[pc]
        self._rows.append((pc, [x * inv for x in v]))
        return True


def _as_vector(v) -> Tuple[Fraction, ...]:
    if isinstance(v, QMatrix):
        if v.rows != 1:
            raise DimError("expected a 1×n row vector")
        return v.row(0)
    return tuple(rat(x) for x in v)


def row_space_basis(vectors: Sequence) -> Tuple[List, List[int], RowSpace]:
    """Greedy independent subset of ``vectors`` spanning the same space.

    Returns ``(basis, indices, space)``; ``space.contains`` tests membership
    of further vectors.
    """
    vecs = [_as_vector(v) for v in vectors]
    width = len(vecs[0]) if vecs else 0
    space = RowSpace(width)
    basis, idx = [], []
    for i, (orig, v) in enumerate(zip(vectors, vecs)):
        if len(v) != width:
            raise DimError("vectors of differing width")
        if space.insert(v):
            basis.append(orig)
            idx.append(i)
    return basis, idx, space


NEG_INF = -math.inf


class UniPoly:
    """Sparse univariate polynomial over Q."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Optional[Mapping[int, object]] = None):
        c = {}
        for k, v in (coeffs or {}).items():
            if k < 0:
                raise ValueError("negative degree in UniPoly")
            v = rat(v)
            if v:
                c[int(k)] = v
        self._c = c

    @classmethod
    def _raw(cls, c: Dict[int, Fraction]) -> "UniPoly":
        p = object.__new__(cls)
        p._c = c
        return p

    @classmethod
    def monomial(cls, degree: int, coeff=1) -> "UniPoly":
        return cls({degree: coeff})

    def coeffs(self) -> Dict[int, Fraction]:
        return dict(self._c)

    def coefficient(self, k: int) -> Fraction:
        return self._c.get(k, ZERO)

    def degree(self):
        return max(self._c) if self._c else NEG_INF

    def min_degree(self) -> Optional[int]:
        return min(self._c) if self._c else None

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __repr__(self) -> str:
        if not self._c:
            return "UniPoly(0)"
        return "UniPoly(" + " + ".join(f"{v}*x^{k}" for k, v in sorted(self._c.items())) + ")"

    def __add__(self, other: "UniPoly") -> "UniPoly":
        c = dict(self._c)
        for k, v in other._c.items():
            s = c.get(k, ZERO) + v
            if s:
                c[k] = s
            else:
                c.pop(k, None)
        return UniPoly._raw(c)

    def __neg__(self) -> "UniPoly":
        return UniPoly._raw({k: -v for k, v in self._c.items()})

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + (-other)

    def __mul__(self, other: "UniPoly") -> "UniPoly":
        c: Dict[int, Fraction] = {}
        for i, a in self._c.items():
            for j, b in other._c.items():
                c[i + j] = c.get(i + j, ZERO) + a * b
        return UniPoly._raw({k: v for k, v in c.items() if v})

    def __call__(self, x) -> Fraction:
        x = rat(x)
        return sum((v * x**k for k, v in self._c.items()), ZERO)


Exponent = Tuple[int, ...]


class LaurentPoly:
    """Finitely supported map Z^s -> Q, read as a Laurent polynomial in s variables."""

    __slots__ = ("arity", "_t")

    def __init__(self, terms: Optional[Mapping[Sequence[int], object]] = None, arity: int = 0):
        t: Dict[Exponent, Fraction] = {}
        for v, c in (terms or {}).items():
            v = tuple(int(e) for e in v)
            if len(v) != arity:
                raise DimError(f"exponent {v} does not have length {arity}")
            c = rat(c)
            if c:
                t[v] = t.get(v, ZERO) + c
                if not t[v]:
                    del t[v]
        self.arity = arity
        self._t = t

    @classmethod
    def _raw(cls, t: Dict[Exponent, Fraction], arity: int) -> "LaurentPoly":
        p = object.__new__(cls)
        p.arity = arity
        p._t = t
        return p

    @classmethod
    def constant(cls, c, arity: int) -> "LaurentPoly":
        c = rat(c)
        return cls._raw({(0,) * arity: c} if c else {}, arity)

    @classmethod
    def zero(cls, arity: int) -> "LaurentPoly":
        return cls._raw({}, arity)

    @classmethod
    def monomial(cls, exponent: Sequence[int], coeff=1) -> "LaurentPoly":
        return cls({tuple(exponent): coeff}, len(exponent))

    def terms(self) -> Dict[Exponent, Fraction]:
        return dict(self._t)

    def items(self):
        return self._t.items()

    def coefficient(self, v: Sequence[int]) -> Fraction:
        return self._t.get(tuple(v), ZERO)

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def __len__(self) -> int:
        return len(self._t)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.arity == other.arity and self._t == other._t

    def __hash__(self):
        return hash((self.arity, frozenset(self._t.items())))

    def __repr__(self) -> str:
        if not self._t:
            return f"LaurentPoly(0, arity={self.arity})"
        return f"LaurentPoly({dict(sorted(self._t.items()))}, arity={self.arity})"

    def _check(self, other: "LaurentPoly") -> None:
        if self.arity != other.arity:
            raise DimError(f"arity mismatch: {self.arity} vs {other.arity}")

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        t = dict(self._t)
        for v, c in other._t.items():
            s = t.get(v, ZERO) + c
            if s:
                t[v] = s
            else:
                t.pop(v, None)
        return LaurentPoly._raw(t, self.arity)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly._raw({v: -c for v, c in self._t.items()}, self.arity)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        t: Dict[Exponent, Fraction] = {}
        for u, a in self._t.items():
            for w, b in other._t.items():
                v = tuple(x + y for x, y in zip(u, w))
                t[v] = t.get(v, ZERO) + a * b
        return LaurentPoly._raw({v: c for v, c in t.items() if c}, self.arity)

    def scale(self, c) -> "LaurentPoly":
        c = rat(c)
        if not c:
            return LaurentPoly.zero(self.arity)
        return LaurentPoly._raw({v: c * x for v, x in self._t.items()}, self.arity)

    def norm1(self) -> Fraction:
        return sum((abs(c) for c in self._t.values()), ZERO)

    def weighted_norm(self, point: Sequence) -> Fraction:
        """Sum of |coeff| * |r|^v, the l1 norm after evaluation at |r|."""
        pt = [abs(rat(x)) for x in point]
        total = ZERO
        for v, c in self._t.items():
            total += abs(c) * _monomial_value(pt, v)
        return total

    def __call__(self, point: Sequence) -> Fraction:
        return laurent_eval(self, point)


def _monomial_value(point: Sequence[Fraction], v: Exponent) -> Fraction:
    out = ONE
    for x, e in zip(point, v):
        if e:
            if not x and e < 0:
                raise EvalError("zero coordinate raised to a negative power")
            out *= x**e
    return out


def laurent_ops(f: LaurentPoly, g: LaurentPoly, op: str) -> LaurentPoly:
    if op == "+":
        return f + g
    if op in ("-", "−"):
        return f - g
    if op in ("*", "×"):
        return f * g
    raise ValueError(f"unknown operator {op!r}")


def laurent_eval(f: LaurentPoly, point: Sequence) -> Fraction:
    pt = [rat(x) for x in point]
    if len(pt) != f.arity:
        raise DimError(f"point of dimension {len(pt)} for arity {f.arity}")
    return sum((c * _monomial_value(pt, v) for v, c in f._t.items()), ZERO)
