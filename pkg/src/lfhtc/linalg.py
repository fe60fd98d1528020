"""Exact rational matrices and fraction-free (Bareiss) elimination."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence


class SingularMatrixError(ArithmeticError):
    """Raised when an exact solve or inverse meets a singular matrix."""


def to_fraction(x) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` string into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


class RMatrix:
    """Immutable dense matrix of Fractions, stored row-major."""

    __slots__ = ("_rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        data = tuple(tuple(to_fraction(x) for x in row) for row in rows)
        if data:
            ncols = len(data[0])
        elif ncols is None:
            ncols = 0
        if any(len(r) != ncols for r in data):
            raise ValueError("ragged rows")
        self._rows = data
        self.nrows = len(data)
        self.ncols = ncols

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RMatrix":
        return cls([[0] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, n: int) -> "RMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, entries: Sequence) -> "RMatrix":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def __getitem__(self, idx: tuple[int, int]) -> Fraction:
        i, j = idx
        return self._rows[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, RMatrix) and self._rows == other._rows

    def __hash__(self) -> int:
        return hash(self._rows)

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self._rows)
        return f"RMatrix([{body}])"

    @property
    def T(self) -> "RMatrix":
        return RMatrix(zip(*self._rows), self.nrows) if self.nrows else RMatrix.zeros(self.ncols, 0)

    def __add__(self, other: "RMatrix") -> "RMatrix":
        self._same_shape(other)
        return RMatrix(
            [a + b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)
        )

    def __sub__(self, other: "RMatrix") -> "RMatrix":
        self._same_shape(other)
        return RMatrix(
            [a - b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)
        )

    def __neg__(self) -> "RMatrix":
        return RMatrix([-a for a in r] for r in self._rows)

    def __matmul__(self, other: "RMatrix") -> "RMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = list(zip(*other._rows)) if other.nrows else [() for _ in range(other.ncols)]
        return RMatrix(
            ([sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols] for r in self._rows),
            other.ncols,
        )

    def scale(self, c) -> "RMatrix":
        c = to_fraction(c)
        return RMatrix([c * a for a in r] for r in self._rows)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RMatrix":
        return RMatrix([self._rows[i][j] for j in cols] for i in rows)

    def column(self, j: int) -> list[Fraction]:
        return [r[j] for r in self._rows]

    def is_symmetric(self) -> bool:
        n = self.nrows
        return n == self.ncols and all(
            self._rows[i][j] == self._rows[j][i] for i in range(n) for j in range(i)
        )

    def rank(self) -> int:
        return rank(self._rows)

    def det(self) -> Fraction:
        return det(self._rows)

    def inverse(self) -> "RMatrix":
        n = self.nrows
        if n != self.ncols:
            raise ValueError("inverse of a non-square matrix")
        eye = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        cols = solve_many(self._rows, [list(c) for c in zip(*eye)]) if n else []
        return RMatrix(zip(*cols)) if n else RMatrix([])

    def is_positive_definite(self) -> bool:
        """Sylvester's criterion on exact leading principal minors."""
        if not self.is_symmetric():
            return False
        return all(det([r[:k] for r in self._rows[:k]]) > 0 for k in range(1, self.nrows + 1))

    def to_json(self) -> list[list[str | int]]:
        return [[_fmt(x) for x in r] for r in self._rows]

    @classmethod
    def from_json(cls, data) -> "RMatrix":
        if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
            raise ValueError("matrix must be a JSON array of arrays")
        return cls(data)

    def _same_shape(self, other: "RMatrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")


def _fmt(x: Fraction) -> str | int:
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    """Scale every row by the lcm of its denominators so entries become integers."""
    out = []
    for r in rows:
        r = [to_fraction(x) for x in r]
        m = 1
        for x in r:
            m = m * x.denominator // math.gcd(m, x.denominator)
        out.append([x.numerator * (m // x.denominator) for x in r])
    return out


def bareiss_echelon(a: list[list[int]], ncols: int | None = None) -> tuple[list[list[int]], list[int]]:
    """In-place fraction-free row echelon form of an integer matrix.

    Only the first ``ncols`` columns are used for pivoting (the rest ride along,
    e.g. a right-hand side). Returns the reduced rows and the pivot columns.
    """
    nrows = len(a)
    if nrows == 0:
        return a, []
    width = len(a[0]) if ncols is None else ncols
    prev = 1
    r = 0
    pivots = []
    for c in range(width):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        row_r = a[r]
        for i in range(r + 1, nrows):
            row_i = a[i]
            f = row_i[c]
            if f == 0:
                if piv != prev:
                    a[i] = [(piv * x) // prev for x in row_i]
                continue
            a[i] = [(piv * x - f * y) // prev for x, y in zip(row_i, row_r)]
        prev = piv
        pivots.append(c)
        r += 1
    return a, pivots


def rank(rows: Sequence[Sequence]) -> int:
    """Exact rank of a rational matrix."""
    if not rows or not rows[0]:
        return 0
    _, pivots = bareiss_echelon(_integer_rows(rows))
    return len(pivots)


def integer_rank(rows: list[list[int]]) -> int:
    """Exact rank of an integer matrix (rows are consumed)."""
    if not rows or not rows[0]:
        return 0
    return len(bareiss_echelon(rows)[1])


def det(rows: Sequence[Sequence]) -> Fraction:
    n = len(rows)
    if n == 0:
        return Fraction(1)
    fr = [[to_fraction(x) for x in r] for r in rows]
    scale = Fraction(1)
    ints = []
    for r in fr:
        m = 1
        for x in r:
            m = m * x.denominator // math.gcd(m, x.denominator)
        scale /= m
        ints.append([x.numerator * (m // x.denominator) for x in r])
    sign = 1
    prev = 1
    a = ints
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        piv = a[c][c]
        for i in range(c + 1, n):
            f = a[i][c]
            a[i] = [(piv * x - f * y) // prev for x, y in zip(a[i], a[c])]
        prev = piv
    return sign * a[n - 1][n - 1] * scale


def solve_many(m: Sequence[Sequence], rhs_cols: Sequence[Sequence]) -> list[list[Fraction]]:
    """Solve ``m @ x = b`` exactly for each right-hand side column ``b``.

    Raises SingularMatrixError when ``m`` is singular.
    """
    n = len(m)
    if n == 0:
        return [[] for _ in rhs_cols]
    if any(len(r) != n for r in m):
        raise ValueError("coefficient matrix must be square")
    k = len(rhs_cols)
    aug = [list(m[i]) + [b[i] for b in rhs_cols] for i in range(n)]
    a, pivots = bareiss_echelon(_integer_rows(aug), ncols=n)
    if len(pivots) < n:
        raise SingularMatrixError("coefficient matrix is singular")
    sols = []
    for j in range(k):
        x = [Fraction(0)] * n
        for i in range(n - 1, -1, -1):
            acc = Fraction(a[i][n + j])
            row = a[i]
            for c in range(i + 1, n):
                if row[c]:
                    acc -= row[c] * x[c]
            x[i] = acc / row[i]
        sols.append(x)
    return sols


def solve(m: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    return solve_many(m, [b])[0]
