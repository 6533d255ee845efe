"""Exact rational and integer linear algebra.

Everything here runs on arbitrary-precision integers and
:class:`fractions.Fraction`; there is no floating point anywhere and no
tolerance parameter on any predicate. The matrices that show up in practice
(intersection matrices of curve configurations, ray matrices of simplicial
cones, linear systems for discrepancies) are small and dense, so the
implementations favour clarity over asymptotics:

* determinants use fraction-free Bareiss elimination on integer matrices and
  exact Gaussian elimination otherwise,
* negative definiteness is decided by the signs of the leading principal
  minors of the negated matrix (no eigenvalues),
* Smith normal form tracks its unimodular row/column transforms so lattice
  quotient groups can be read off directly.

Rationals serialize as ``"p/q"`` (or ``"p"`` when the denominator is 1) in
every file format of the package; see :func:`format_rational` and
:func:`parse_rational`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .errors import PluricalcError

Rational = Fraction
RatVector = tuple[Fraction, ...]


class DimensionError(PluricalcError):
    """A matrix has the wrong shape for the requested operation."""


class ShapeError(PluricalcError):
    """A structural requirement (squareness, symmetry) is violated."""


class SingularMatrixError(PluricalcError):
    """A linear solve hit a singular matrix."""


def rat(value, denominator=None) -> Fraction:
    """Build an exact rational from ints, strings like ``"3/7"``, or pairs."""
    if denominator is not None:
        return Fraction(value, denominator)
    if isinstance(value, str):
        return parse_rational(value)
    return Fraction(value)


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` into a Fraction.

    Raises :class:`ValueError` on anything that is not an exact integer
    ratio; in particular decimal notation is rejected so that no value can
    silently enter through a float.
    """
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_rational(value) -> str:
    """Serialize a rational as ``"p/q"``, or ``"p"`` when the denominator is 1."""
    q = Fraction(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _freeze_rows(rows: Iterable[Iterable], cast) -> tuple[tuple, ...]:
    frozen = tuple(tuple(cast(x) for x in row) for row in rows)
    widths = {len(row) for row in frozen}
    if len(widths) > 1:
        raise ShapeError("matrix rows have unequal lengths")
    return frozen


@dataclass(frozen=True)
class RatMatrix:
    """Immutable dense matrix with exact rational entries."""

    entries: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "RatMatrix":
        return cls(_freeze_rows(rows, Fraction))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        one, zero = Fraction(1), Fraction(0)
        return cls(tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @property
    def is_symmetric(self) -> bool:
        if not self.is_square:
            return False
        e = self.entries
        return all(e[i][j] == e[j][i] for i in range(self.rows) for j in range(i))

    @property
    def is_integral(self) -> bool:
        return all(x.denominator == 1 for row in self.entries for x in row)

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        i, j = key
        return self.entries[i][j]

    def neg(self) -> "RatMatrix":
        return RatMatrix(tuple(tuple(-x for x in row) for row in self.entries))

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "RatMatrix":
        return RatMatrix(tuple(tuple(self.entries[i][j] for j in col_idx) for i in row_idx))

    def apply(self, v: Sequence) -> RatVector:
        """Matrix-vector product, exact."""
        if self.cols != len(v):
            raise DimensionError(f"cannot apply {self.rows}x{self.cols} matrix to vector of length {len(v)}")
        vv = [Fraction(x) for x in v]
        return tuple(sum((row[j] * vv[j] for j in range(self.cols)), Fraction(0)) for row in self.entries)

    def mul(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise DimensionError("inner dimensions do not match")
        return RatMatrix(
            tuple(
                tuple(
                    sum((self.entries[i][k] * other.entries[k][j] for k in range(self.cols)), Fraction(0))
                    for j in range(other.cols)
                )
                for i in range(self.rows)
            )
        )


@dataclass(frozen=True)
class IntMatrix:
    """Immutable dense matrix with arbitrary-precision integer entries."""

    entries: tuple[tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "IntMatrix":
        return cls(_freeze_rows(rows, int))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, key: tuple[int, int]) -> int:
        i, j = key
        return self.entries[i][j]

    def to_rational(self) -> RatMatrix:
        return RatMatrix.from_rows(self.entries)

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionError("inner dimensions do not match")
        return IntMatrix(
            tuple(
                tuple(sum(self.entries[i][k] * other.entries[k][j] for k in range(self.cols)) for j in range(other.cols))
                for i in range(self.rows)
            )
        )


def _bareiss_det(rows: list[list[int]]) -> int:
    """Fraction-free Bareiss determinant of an integer matrix (destructive)."""
    n = len(rows)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            for i in range(k + 1, n):
                if rows[i][k] != 0:
                    rows[k], rows[i] = rows[i], rows[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = rows[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                rows[i][j] = (rows[i][j] * pivot - rows[i][k] * rows[k][j]) // prev
            rows[i][k] = 0
        prev = pivot
    return sign * rows[n - 1][n - 1]


def _gauss_det(rows: list[list[Fraction]]) -> Fraction:
    """Exact Gaussian-elimination determinant for rational matrices (destructive)."""
    n = len(rows)
    det_val = Fraction(1)
    for k in range(n):
        pivot_row = next((i for i in range(k, n) if rows[i][k] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != k:
            rows[k], rows[pivot_row] = rows[pivot_row], rows[k]
            det_val = -det_val
        pivot = rows[k][k]
        det_val *= pivot
        for i in range(k + 1, n):
            if rows[i][k] == 0:
                continue
            factor = rows[i][k] / pivot
            for j in range(k, n):
                rows[i][j] -= factor * rows[k][j]
    return det_val


def det(m: RatMatrix) -> Fraction:
    """Exact determinant; the empty 0x0 matrix has determinant 1."""
    if not m.is_square:
        raise DimensionError(f"determinant needs a square matrix, got {m.rows}x{m.cols}")
    if m.rows == 0:
        return Fraction(1)
    if m.is_integral:
        return Fraction(_bareiss_det([[x.numerator for x in row] for row in m.entries]))
    return _gauss_det([list(row) for row in m.entries])


def solve(m: RatMatrix, v: Sequence) -> RatVector:
    """Exact unique solution x of ``m @ x = v``.

    Raises :class:`SingularMatrixError` when the matrix is singular and
    :class:`DimensionError` on shape mismatch.
    """
    if not m.is_square:
        raise DimensionError(f"solve needs a square matrix, got {m.rows}x{m.cols}")
    n = m.rows
    if len(v) != n:
        raise DimensionError(f"vector length {len(v)} does not match matrix size {n}")
    aug = [list(row) + [Fraction(v[i])] for i, row in enumerate(m.entries)]
    for k in range(n):
        pivot_row = next((i for i in range(k, n) if aug[i][k] != 0), None)
        if pivot_row is None:
            raise SingularMatrixError("matrix is singular")
        if pivot_row != k:
            aug[k], aug[pivot_row] = aug[pivot_row], aug[k]
        pivot = aug[k][k]
        for i in range(k + 1, n):
            if aug[i][k] == 0:
                continue
            factor = aug[i][k] / pivot
            for j in range(k, n + 1):
                aug[i][j] -= factor * aug[k][j]
    x = [Fraction(0)] * n
    for k in range(n - 1, -1, -1):
        acc = aug[k][n]
        for j in range(k + 1, n):
            acc -= aug[k][j] * x[j]
        x[k] = acc / aug[k][k]
    return tuple(x)


def is_negative_definite(m: RatMatrix) -> bool:
    """Whether a symmetric rational matrix is negative definite.

    Decided exactly: ``m`` is negative definite iff every leading principal
    minor of ``-m`` is positive. The minors are computed by one pass of
    fraction-free elimination (the Bareiss pivots are exactly those minors),
    after clearing denominators, which rescales each minor by a positive
    factor and therefore preserves its sign. The 0x0 matrix is vacuously
    negative definite.
    """
    if not m.is_square:
        raise ShapeError(f"definiteness needs a square matrix, got {m.rows}x{m.cols}")
    if not m.is_symmetric:
        raise ShapeError("definiteness needs a symmetric matrix")
    n = m.rows
    if n == 0:
        return True
    scale = lcm(*(x.denominator for row in m.entries for x in row))
    rows = [[-(x * scale).numerator for x in row] for row in m.entries]
    prev = 1
    for k in range(n):
        # After k elimination steps rows[k][k] equals the (k+1)-st leading
        # principal minor of the (scaled, negated) matrix.
        if rows[k][k] <= 0:
            return False
        pivot = rows[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                rows[i][j] = (rows[i][j] * pivot - rows[i][k] * rows[k][j]) // prev
            rows[i][k] = 0
        prev = pivot
    return True


@dataclass(frozen=True)
class SmithNormalForm:
    """Diagonalization ``left @ m @ right == diag`` with unimodular transforms.

    ``diag`` lists the non-negative diagonal entries (including zeros) with
    the divisibility chain d1 | d2 | ...; ``left`` and ``right`` have
    determinant +-1.
    """

    diag: tuple[int, ...]
    left: IntMatrix
    right: IntMatrix


def smith_normal_form(m: IntMatrix) -> SmithNormalForm:
    """Smith normal form of an integer matrix with tracked transforms."""
    nrows, ncols = m.rows, m.cols
    a = [list(row) for row in m.entries]
    left = [[1 if i == j else 0 for j in range(nrows)] for i in range(nrows)]
    right = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        left[i], left[j] = left[j], left[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in right:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, factor):
        for j in range(ncols):
            a[dst][j] += factor * a[src][j]
        for j in range(nrows):
            left[dst][j] += factor * left[src][j]

    def add_col(dst, src, factor):
        for row in a:
            row[dst] += factor * row[src]
        for row in right:
            row[dst] += factor * row[src]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        left[i] = [-x for x in left[i]]

    for t in range(min(nrows, ncols)):
        while True:
            # Smallest nonzero entry of the trailing block, moved to (t, t).
            pivot = None
            for i in range(t, nrows):
                for j in range(t, ncols):
                    if a[i][j] != 0 and (pivot is None or abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                        pivot = (i, j)
            if pivot is None:
                break
            if pivot[0] != t:
                swap_rows(t, pivot[0])
            if pivot[1] != t:
                swap_cols(t, pivot[1])
            dirty = False
            for i in range(t + 1, nrows):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    add_row(i, t, -q)
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, ncols):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    add_col(j, t, -q)
                    dirty = dirty or a[t][j] != 0
            if dirty:
                continue
            # Row and column are clear; force the pivot to divide the rest of
            # the block so the diagonal comes out as a divisibility chain.
            offender = next(
                (
                    (i, j)
                    for i in range(t + 1, nrows)
                    for j in range(t + 1, ncols)
                    if a[i][j] % a[t][t] != 0
                ),
                None,
            )
            if offender is None:
                break
            add_row(t, offender[0], 1)
        if t < min(nrows, ncols) and a[t][t] < 0:
            negate_row(t)
    diag = tuple(a[t][t] for t in range(min(nrows, ncols)))
    return SmithNormalForm(diag, IntMatrix.from_rows(left), IntMatrix.from_rows(right))
