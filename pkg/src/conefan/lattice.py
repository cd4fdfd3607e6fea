"""Exact integer linear algebra on small lattices.

Everything here works on plain Python integers but refuses to leave the
signed 64-bit range, so a pathological input fails with
:class:`~conefan.errors.LatticeOverflow` instead of silently producing
numbers no other tool could reproduce.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Sequence

from .errors import LatticeOverflow, NotSquare, RankMismatch, ZeroVector

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)


def checked(x: int) -> int:
    if x > INT64_MAX or x < INT64_MIN:
        raise LatticeOverflow(f"integer {x} outside the signed 64-bit range")
    return x


class LatticeVector(tuple):
    """An integer point of Z^n.

    Subclasses ``tuple`` so vectors hash, compare and sort
    lexicographically for free.  ``+``, ``-`` and ``*`` are vector
    operations, not tuple concatenation/repetition.
    """

    __slots__ = ()

    def __new__(cls, coords: Iterable[int] = ()):
        if isinstance(coords, LatticeVector):
            return coords
        vals = []
        for c in coords:
            if isinstance(c, Fraction):
                if c.denominator != 1:
                    raise ValueError(f"non-integral coordinate {c}")
                c = c.numerator
            vals.append(checked(int(c)))
        return super().__new__(cls, vals)

    @property
    def ambient_rank(self) -> int:
        return len(self)

    @property
    def coords(self) -> tuple[int, ...]:
        return tuple(self)

    def _same_rank(self, other: Sequence[int]) -> None:
        if len(other) != len(self):
            raise RankMismatch(f"rank {len(self)} vs rank {len(other)}")

    def __add__(self, other):
        self._same_rank(other)
        return LatticeVector(checked(a + b) for a, b in zip(self, other))

    def __sub__(self, other):
        self._same_rank(other)
        return LatticeVector(checked(a - b) for a, b in zip(self, other))

    def __neg__(self):
        return LatticeVector(-a for a in self)

    def __mul__(self, k: int):
        return LatticeVector(checked(k * a) for a in self)

    __rmul__ = __mul__

    def dot(self, other: Sequence[int]) -> int:
        self._same_rank(other)
        return checked(sum(a * b for a, b in zip(self, other)))

    def is_zero(self) -> bool:
        return not any(self)

    def __repr__(self) -> str:
        return f"LatticeVector({tuple(self)})"


def zero(n: int) -> LatticeVector:
    return LatticeVector((0,) * n)


def vector_gcd(v: Iterable[int]) -> int:
    return reduce(gcd, (abs(int(c)) for c in v), 0)


def primitive(v: Sequence[int]) -> LatticeVector:
    """Divide ``v`` by the gcd of its coordinates."""
    v = LatticeVector(v)
    g = vector_gcd(v)
    if g == 0:
        raise ZeroVector("the zero vector has no primitive generator")
    return LatticeVector(c // g for c in v)


class IntegerMatrix:
    """Immutable row-major integer matrix.

    Zero-row and zero-column shapes are permitted; they occur for maps
    out of (or into) the zero cone.
    """

    __slots__ = ("entries", "rows", "cols")

    def __init__(self, entries: Iterable[Iterable[int]], cols: int | None = None):
        ent = tuple(tuple(checked(int(x)) for x in row) for row in entries)
        if cols is None:
            if not ent:
                raise ValueError("cols is required for a matrix with no rows")
            cols = len(ent[0])
        if any(len(r) != cols for r in ent):
            raise ValueError("ragged matrix")
        self.entries = ent
        self.rows = len(ent)
        self.cols = cols

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntegerMatrix":
        return cls([[c[i] for c in columns] for i in range(rows)], cols=len(columns))

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __eq__(self, other):
        return (
            isinstance(other, IntegerMatrix)
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.entries, self.cols))

    def __repr__(self):
        return f"IntegerMatrix({[list(r) for r in self.entries]})"

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    @property
    def T(self) -> "IntegerMatrix":
        return IntegerMatrix(
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
            cols=self.rows,
        )

    def column(self, j: int) -> LatticeVector:
        return LatticeVector(r[j] for r in self.entries)

    def apply(self, v: Sequence[int]) -> LatticeVector:
        if len(v) != self.cols:
            raise RankMismatch(f"matrix has {self.cols} columns, vector rank {len(v)}")
        return LatticeVector(checked(sum(a * b for a, b in zip(r, v))) for r in self.entries)

    def __matmul__(self, other):
        if isinstance(other, IntegerMatrix):
            if other.rows != self.cols:
                raise RankMismatch("inner dimensions differ")
            cols = [other.column(j) for j in range(other.cols)]
            return IntegerMatrix.from_columns([self.apply(c) for c in cols], self.rows)
        return self.apply(other)

    def is_identity(self) -> bool:
        return self.rows == self.cols and self == IntegerMatrix.identity(self.rows)


def hermite_normal_form(M: IntegerMatrix) -> tuple[IntegerMatrix, IntegerMatrix]:
    """Row Hermite normal form ``H = U @ M`` with ``U`` unimodular.

    Pivots are positive, entries above a pivot lie in ``[0, pivot)`` and
    zero rows sit at the bottom.
    """
    m, n = M.rows, M.cols
    A = [list(r) for r in M.entries]
    U = [[int(i == j) for j in range(m)] for i in range(m)]

    def sub(i, p, q):
        # row_i -= q * row_p
        A[i] = [checked(a - q * b) for a, b in zip(A[i], A[p])]
        U[i] = [checked(a - q * b) for a, b in zip(U[i], U[p])]

    p = 0
    for col in range(n):
        if p == m:
            break
        while True:
            nz = [i for i in range(p, m) if A[i][col] != 0]
            if not nz:
                break
            i_min = min(nz, key=lambda i: (abs(A[i][col]), i))
            A[p], A[i_min] = A[i_min], A[p]
            U[p], U[i_min] = U[i_min], U[p]
            clean = True
            for i in range(p + 1, m):
                if A[i][col]:
                    sub(i, p, A[i][col] // A[p][col])
                    if A[i][col]:
                        clean = False
            if clean:
                break
        if A[p][col] == 0:
            continue
        if A[p][col] < 0:
            A[p] = [-a for a in A[p]]
            U[p] = [-a for a in U[p]]
        for i in range(p):
            q = A[i][col] // A[p][col]
            if q:
                sub(i, p, q)
        p += 1
    return IntegerMatrix(A, cols=n), IntegerMatrix(U, cols=m)


def abs_determinant(M: IntegerMatrix) -> int:
    """|det M| by fraction-free Bareiss elimination."""
    if M.rows != M.cols:
        raise NotSquare(f"{M.rows}x{M.cols} matrix")
    n = M.rows
    if n == 0:
        return 1
    A = [list(r) for r in M.entries]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = checked((A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev)
        prev = A[k][k]
    return abs(A[n - 1][n - 1])


def rank(vectors: Sequence[Sequence[int]]) -> int:
    if not vectors:
        return 0
    H, _ = hermite_normal_form(IntegerMatrix(vectors))
    return sum(1 for r in H if any(r))


def integer_kernel(M: IntegerMatrix) -> list[LatticeVector]:
    """A basis of the saturated lattice ``{y in Z^n : M y = 0}``."""
    n = M.cols
    if M.rows == 0:
        return [LatticeVector(r) for r in IntegerMatrix.identity(n)]
    H, U = hermite_normal_form(M.T)
    return [LatticeVector(U[i]) for i in range(n) if not any(H[i])]


def unimodular_inverse(V: IntegerMatrix) -> IntegerMatrix:
    H, U = hermite_normal_form(V)
    if not H.is_identity():
        raise ValueError("matrix is not unimodular")
    return U


def span_frame(vectors: Sequence[Sequence[int]], n: int) -> tuple[int, IntegerMatrix, IntegerMatrix]:
    """Adapted basis for the saturated lattice spanned by ``vectors``.

    Returns ``(k, V, W)`` with ``V`` unimodular, ``W = V^-1``, such that the
    first ``k`` rows of ``W`` are a basis of ``span(vectors) ∩ Z^n`` and
    ``v @ V`` gives coordinates of ``v`` in the basis ``W``.
    """
    vecs = [v for v in vectors if any(v)]
    ident = IntegerMatrix.identity(n)
    if not vecs:
        return 0, ident, ident
    perp = integer_kernel(IntegerMatrix(vecs))
    k = n - len(perp)
    if k == n:
        return n, ident, ident
    sat = integer_kernel(IntegerMatrix(perp))
    _, U = hermite_normal_form(IntegerMatrix(sat).T)
    V = U.T
    return k, V, unimodular_inverse(V)


def solve_rational(A: Sequence[Sequence[int]], b: Sequence[int]) -> list[Fraction] | None:
    """One solution of ``A x = b`` over Q (free variables set to 0), or None."""
    m = len(A)
    n = len(A[0]) if m else 0
    rows = [[Fraction(x) for x in A[i]] + [Fraction(b[i])] for i in range(m)]
    piv_cols = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if rows[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        x[c] = rows[i][n]
    return x


def express(point: Sequence[int], basis: Sequence[Sequence[int]]) -> list[Fraction] | None:
    """Coefficients ``c`` with ``sum c_i basis_i = point`` (basis independent)."""
    if not basis:
        return [] if not any(point) else None
    A = [[basis[j][i] for j in range(len(basis))] for i in range(len(point))]
    return solve_rational(A, point)
