"""Exact rational linear algebra.

Everything here works over :class:`fractions.Fraction` (arbitrary precision,
always reduced, positive denominator).  Elimination is done fraction-free on
integer rows (Bareiss), so intermediates stay integral and every division is
checked to be exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "SymMatrix",
    "LinearSolution",
    "DimensionError",
    "solve_exact",
    "solve_linear",
    "is_negative_definite",
    "leading_minors",
    "pivot_signs",
    "determinant",
]


class DimensionError(ValueError):
    """Shapes of the operands do not fit together."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted")
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class SymMatrix:
    """Immutable symmetric matrix with rational entries."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(_as_fraction(x) for x in row) for row in self.rows)
        n = len(rows)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise DimensionError(f"row {i} has length {len(row)}, expected {n}")
        for i in range(n):
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise ValueError(f"matrix is not symmetric at ({i}, {j})")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> SymMatrix:
        return cls(tuple(tuple(r) for r in rows))

    @property
    def order(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def permuted(self, perm: Sequence[int]) -> SymMatrix:
        """Simultaneous row/column permutation: entry (i, j) becomes old (perm[i], perm[j])."""
        if sorted(perm) != list(range(self.order)):
            raise ValueError("not a permutation of the index set")
        return SymMatrix(tuple(tuple(self.rows[p][q] for q in perm) for p in perm))

    def matvec(self, x: Sequence[Fraction]) -> tuple[Fraction, ...]:
        if len(x) != self.order:
            raise DimensionError("vector length does not match matrix order")
        return tuple(sum((a * b for a, b in zip(row, x)), Fraction(0)) for row in self.rows)

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self.rows]


@dataclass(frozen=True)
class LinearSolution:
    """Outcome of an exact linear solve.

    ``x`` is a particular solution (free variables set to 0) or ``None`` when
    the system is inconsistent.  ``kernel`` is a basis of the null space of the
    coefficient matrix, so the solution is unique iff ``kernel`` is empty.
    """

    x: tuple[Fraction, ...] | None
    kernel: tuple[tuple[Fraction, ...], ...]
    rank: int

    @property
    def consistent(self) -> bool:
        return self.x is not None

    @property
    def unique(self) -> bool:
        return self.x is not None and not self.kernel


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    """Scale each row by the lcm of its denominators.  Row scaling keeps the solution set."""
    out = []
    for row in rows:
        m = lcm(*(Fraction(v).denominator for v in row)) if row else 1
        out.append([int(Fraction(v) * m) for v in row])
    return out


def _exact_div(a: int, b: int) -> int:
    q, r = divmod(a, b)
    if r:
        raise ArithmeticError("Bareiss division was not exact")
    return q


def _bareiss_echelon(m: list[list[int]], ncols: int) -> list[int]:
    """In-place fraction-free row echelon form over the first ``ncols`` columns.

    Rows may carry extra (augmented) columns to the right; they are transformed
    along.  Returns the pivot columns.
    """
    nrows = len(m)
    width = len(m[0]) if m else 0
    prev = 1
    r = 0
    pivots: list[int] = []
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            m[r], m[p] = m[p], m[r]
        piv_row = m[r]
        pv = piv_row[c]
        for i in range(r + 1, nrows):
            row = m[i]
            f = row[c]
            if f == 0:
                if pv != prev:
                    m[i] = [_exact_div(pv * v, prev) for v in row]
                continue
            m[i] = [_exact_div(pv * row[j] - f * piv_row[j], prev) for j in range(width)]
        # Everything left of the pivot is zero already; keep column c zero below the pivot.
        prev = pv
        pivots.append(c)
        r += 1
    return pivots


def solve_linear(a: Sequence[Sequence], rhs: Sequence) -> LinearSolution:
    """Solve a (possibly rectangular) system ``a x = rhs`` exactly."""
    nrows = len(a)
    if len(rhs) != nrows:
        raise DimensionError(f"right-hand side has length {len(rhs)}, expected {nrows}")
    ncols = len(a[0]) if nrows else 0
    for i, row in enumerate(a):
        if len(row) != ncols:
            raise DimensionError(f"row {i} has length {len(row)}, expected {ncols}")
    aug = _integer_rows([[_as_fraction(v) for v in row] + [_as_fraction(b)] for row, b in zip(a, rhs)])
    pivots = _bareiss_echelon(aug, ncols)
    rank = len(pivots)

    kernel = tuple(_kernel_vector(aug, pivots, ncols, free) for free in range(ncols) if free not in pivots)
    for row in aug[rank:]:
        if row[ncols] != 0:
            return LinearSolution(None, kernel, rank)
    x = [Fraction(0)] * ncols
    for k in range(rank - 1, -1, -1):
        c = pivots[k]
        row = aug[k]
        s = Fraction(row[ncols]) - sum((row[j] * x[j] for j in range(c + 1, ncols) if row[j]), Fraction(0))
        x[c] = s / row[c]
    return LinearSolution(tuple(x), kernel, rank)


def _kernel_vector(ech: list[list[int]], pivots: list[int], ncols: int, free: int) -> tuple[Fraction, ...]:
    x = [Fraction(0)] * ncols
    x[free] = Fraction(1)
    for k in range(len(pivots) - 1, -1, -1):
        c = pivots[k]
        row = ech[k]
        s = -sum((row[j] * x[j] for j in range(c + 1, ncols) if row[j]), Fraction(0))
        x[c] = s / row[c]
    return tuple(x)


def solve_exact(m: SymMatrix, rhs: Sequence) -> LinearSolution:
    """Solve ``m x = rhs`` for a symmetric matrix ``m``.

    Nonsingular systems give the unique solution; singular ones report
    consistency, a particular solution and the kernel.
    """
    if len(rhs) != m.order:
        raise DimensionError(f"right-hand side has length {len(rhs)}, expected {m.order}")
    return solve_linear(m.rows, rhs)


def _scaled_integer_matrix(m: SymMatrix) -> list[list[int]]:
    # A single positive scalar keeps the signs of all leading minors.
    den = lcm(*(v.denominator for row in m.rows for v in row)) if m.order else 1
    return [[int(v * den) for v in row] for row in m.rows]


def leading_minors(m: SymMatrix) -> list[int] | None:
    """Signs-preserving leading principal minors of ``m`` scaled to an integer matrix.

    Computed by Bareiss elimination without row exchanges: the k-th pivot is the
    k-th leading minor.  Returns the minors computed up to and including the
    first zero one; ``None`` never happens for square input.
    """
    a = _scaled_integer_matrix(m)
    n = len(a)
    minors: list[int] = []
    prev = 1
    for k in range(n):
        pv = a[k][k]
        minors.append(pv)
        if pv == 0:
            break
        pk = a[k]
        for i in range(k + 1, n):
            row = a[i]
            f = row[k]
            if f == 0:
                if pv != prev:
                    a[i] = [_exact_div(pv * v, prev) for v in row]
                continue
            a[i] = [_exact_div(pv * row[j] - f * pk[j], prev) for j in range(n)]
        prev = pv
    return minors


def is_negative_definite(m: SymMatrix) -> bool:
    """Sylvester's criterion: (-1)^k times the k-th leading principal minor is positive for all k."""
    if m.order == 0:
        return True
    minors = leading_minors(m)
    if len(minors) < m.order:
        return False
    return all((d < 0) if k % 2 == 0 else (d > 0) for k, d in enumerate(minors))


def determinant(m: SymMatrix) -> Fraction:
    """Exact determinant via fraction-free elimination with row exchanges."""
    n = m.order
    if n == 0:
        return Fraction(1)
    den = lcm(*(v.denominator for row in m.rows for v in row))
    a = [[int(v * den) for v in row] for row in m.rows]
    sign = 1
    prev = 1
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k] != 0), None)
        if p is None:
            return Fraction(0)
        if p != k:
            a[k], a[p] = a[p], a[k]
            sign = -sign
        pv = a[k][k]
        for i in range(k + 1, n):
            a[i] = [_exact_div(pv * a[i][j] - a[i][k] * a[k][j], prev) for j in range(n)]
        prev = pv
    return Fraction(sign * a[n - 1][n - 1], den**n)


def pivot_signs(m: SymMatrix) -> list[int] | None:
    """Signs of the diagonal pivots of an LDL^T decomposition without row exchanges.

    This is an independent definiteness oracle.  ``None`` means indeterminate:
    a zero pivot met a nonzero entry below it, which would need a row exchange.
    """
    n = m.order
    a = [list(row) for row in m.rows]
    signs: list[int] = []
    for k in range(n):
        d = a[k][k]
        if d == 0:
            if any(a[i][k] != 0 for i in range(k + 1, n)):
                return None
            signs.append(0)
            continue
        signs.append(1 if d > 0 else -1)
        for i in range(k + 1, n):
            f = a[i][k]
            if f == 0:
                continue
            ratio = f / d
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                if row_k[j]:
                    row_i[j] -= ratio * row_k[j]
            row_i[k] = Fraction(0)
    return signs
