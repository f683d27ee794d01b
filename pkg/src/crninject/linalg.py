"""Exact rational linear algebra on small dense matrices."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import TYPE_CHECKING, Iterable, Sequence

if TYPE_CHECKING:
    from .network import Network

__all__ = [
    "ExactMatrix",
    "ReducedBasis",
    "rref",
    "rank",
    "left_nullspace_basis",
    "reduced_conservation_basis",
    "determinant",
    "minor",
    "int_det",
]


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"exact rational expected, got {type(x).__name__}")


@dataclass(frozen=True)
class ExactMatrix:
    """Dense matrix of ``Fraction`` entries, stored row-major."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0 or len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match dimensions")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "ExactMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), cols, tuple(_q(x) for r in rows for x in r))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "ExactMatrix":
        if any(len(c) != rows for c in columns):
            raise ValueError("ragged columns")
        return cls(rows, len(columns), tuple(_q(columns[j][i]) for i in range(rows) for j in range(len(columns))))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], n)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> tuple[Fraction, ...]:
        return self.entries[j::self.cols] if self.cols else ()

    def tolist(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix.from_columns(self.tolist(), self.cols) if self.rows else ExactMatrix(self.cols, 0, ())

    def select_columns(self, idx: Iterable[int]) -> "ExactMatrix":
        idx = list(idx)
        return ExactMatrix(self.rows, len(idx), tuple(self.entries[i * self.cols + j] for i in range(self.rows) for j in idx))

    def select_rows(self, idx: Iterable[int]) -> "ExactMatrix":
        idx = list(idx)
        return ExactMatrix(len(idx), self.cols, tuple(x for i in idx for x in self.row(i)))

    def delete_rows(self, removed: Iterable[int]) -> "ExactMatrix":
        removed = set(removed)
        return self.select_rows(i for i in range(self.rows) if i not in removed)

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(self.rows, self.cols, tuple(-x for x in self.entries))

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        out = []
        for i in range(self.rows):
            r = self.row(i)
            for j in range(other.cols):
                out.append(sum((a * b for a, b in zip(r, other.column(j))), Fraction(0)))
        return ExactMatrix(self.rows, other.cols, tuple(out))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __str__(self) -> str:
        return "\n".join(" ".join(str(x) for x in self.row(i)) for i in range(self.rows))


def rref(M: ExactMatrix) -> tuple[ExactMatrix, list[int]]:
    """Reduced row echelon form and pivot columns.

    Pivots are taken at the leftmost possible column, using the first row
    with a nonzero entry there.
    """
    a = M.tolist()
    pivots: list[int] = []
    r = 0
    for c in range(M.cols):
        if r == M.rows:
            break
        p = next((i for i in range(r, M.rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(M.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return ExactMatrix.from_rows(a, M.cols), pivots


def rank(M: ExactMatrix) -> int:
    return len(rref(M)[1])


def left_nullspace_basis(M: ExactMatrix) -> ExactMatrix:
    """Rows spanning ``{w : w^T M = 0}``, one per free column of ``rref(M^T)``."""
    n = M.rows
    R, pivots = rref(M.transpose())
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, p in enumerate(pivots):
            v[p] = -R[row, f]
        basis.append(v)
    return ExactMatrix.from_rows(basis, n)


@dataclass(frozen=True)
class ReducedBasis:
    """Conservation-law basis in echelon form after a species permutation.

    ``permutation[k]`` is the original index of the species placed at
    position ``k``; ``omegas[i]`` lists coefficients in permuted order.
    """

    permutation: tuple[int, ...]
    omegas: tuple[tuple[Fraction, ...], ...]

    @property
    def d(self) -> int:
        return len(self.omegas)

    @property
    def n(self) -> int:
        return len(self.permutation)

    def omega_original(self, i: int) -> list[Fraction]:
        """``omegas[i]`` expressed in the original species order."""
        v = [Fraction(0)] * self.n
        for pos, orig in enumerate(self.permutation):
            v[orig] = self.omegas[i][pos]
        return v

    def is_identity(self) -> bool:
        return self.permutation == tuple(range(self.n))


def reduced_conservation_basis(net: "Network") -> ReducedBasis:
    from .network import stoichiometric_matrix

    n = net.n
    B = left_nullspace_basis(stoichiometric_matrix(net))
    if B.rows == 0:
        return ReducedBasis(tuple(range(n)), ())
    E, pivots = rref(B)
    perm = tuple(pivots) + tuple(j for j in range(n) if j not in pivots)
    omegas = tuple(tuple(E[i, j] for j in perm) for i in range(E.rows))
    return ReducedBasis(perm, omegas)


def int_det(a: list[list[int]]) -> int:
    """Determinant of a square integer matrix by Bareiss elimination (mutates ``a``)."""
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        akk = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            for j in range(k + 1, n):
                ri[j] = (ri[j] * akk - aik * rk[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1] if n else 1


def determinant(M: ExactMatrix) -> Fraction:
    if M.rows != M.cols:
        raise ValueError("determinant of a non-square matrix")
    a = M.tolist()
    n = M.rows
    det = Fraction(1)
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k] != 0), None)
        if p is None:
            return Fraction(0)
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det *= a[k][k]
        inv = 1 / a[k][k]
        for i in range(k + 1, n):
            if a[i][k] != 0:
                f = a[i][k] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return det


def minor(M: ExactMatrix, removed_rows: Iterable[int]) -> Fraction:
    """Determinant of ``M`` with the given rows deleted (all columns kept)."""
    removed = set(removed_rows)
    if any(not 0 <= i < M.rows for i in removed):
        raise ValueError("row index out of range")
    if M.rows - len(removed) != M.cols:
        raise ValueError(
            f"removing {len(removed)} of {M.rows} rows does not leave a {M.cols}x{M.cols} matrix")
    return determinant(M.delete_rows(removed))
