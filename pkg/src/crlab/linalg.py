"""Exact linear algebra over Q(i) and fraction-free elimination over polynomials."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .gaussian import ONE, ZERO, GaussianRational, as_gaussian
from .poly import Poly, divide_exact

__all__ = [
    "ExactMatrix", "to_exact", "rref", "rank", "nullspace", "solve", "det",
    "bareiss", "inverse", "matmul", "conj_transpose", "identity",
    "poly_rank", "poly_det", "real_kernel", "in_span",
]

Row = List[GaussianRational]


def to_exact(rows) -> List[Row]:
    return [[as_gaussian(x) if not isinstance(x, GaussianRational) else x for x in r] for r in rows]


class ExactMatrix:
    """Rectangular matrix of Gaussian rationals (immutable by convention)."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows):
        rows = to_exact(rows)
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged matrix")
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(identity(n))

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, ExactMatrix) and self.rows == other.rows

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix(matmul(self.rows, other.rows))

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix([list(c) for c in zip(*self.rows)])

    def conj_transpose(self) -> "ExactMatrix":
        return ExactMatrix(conj_transpose(self.rows))

    def det(self) -> GaussianRational:
        return det(self.rows)

    def rank(self) -> int:
        return rank(self.rows)

    def column(self, j: int) -> Row:
        return [r[j] for r in self.rows]

    def to_complex(self):
        import numpy as np
        return np.array([[complex(x) for x in r] for r in self.rows], dtype=complex).reshape(self.nrows, self.ncols)

    def __repr__(self) -> str:
        return "ExactMatrix(" + repr([[str(x) for x in r] for r in self.rows]) + ")"


def identity(n: int) -> List[Row]:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> List[list]:
    if not a:
        return []
    inner = len(b)
    if len(a[0]) != inner:
        raise ValueError("shape mismatch in matmul")
    cols = len(b[0]) if b else 0
    out = []
    for r in a:
        row = []
        for j in range(cols):
            s = ZERO
            for k in range(inner):
                if r[k] and b[k][j]:
                    s = s + r[k] * b[k][j]
            row.append(s)
        out.append(row)
    return out


def conj_transpose(a: Sequence[Sequence]) -> List[list]:
    return [[x.conjugate() for x in col] for col in zip(*a)]


def rref(rows: Sequence[Sequence]) -> Tuple[List[Row], List[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [list(r) for r in to_exact(rows)]
    if not m:
        return m, []
    nr, nc = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        p = next((i for i in range(r, nr) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = m[r][c].inverse()
        m[r] = [x * inv for x in m[r]]
        for i in range(nr):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    """Exact rank by forward elimination (no back substitution)."""
    m = [list(r) for r in to_exact(rows)]
    if not m:
        return 0
    nr, nc = len(m), len(m[0])
    r = 0
    for c in range(nc):
        if r == nr:
            break
        p = next((i for i in range(r, nr) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = m[r][c].inverse()
        for i in range(r + 1, nr):
            if m[i][c]:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
    return r


def in_span(vectors: Sequence[Sequence], v: Sequence) -> bool:
    base = rank(vectors) if vectors else 0
    return rank(list(vectors) + [list(v)]) == base


def nullspace(rows: Sequence[Sequence], ncols: Optional[int] = None) -> List[Row]:
    """Basis of ``{x : A x = 0}``."""
    if not rows:
        n = ncols or 0
        return identity(n)
    red, piv = rref(rows)
    nc = len(red[0])
    free = [c for c in range(nc) if c not in piv]
    basis = []
    for f in free:
        x = [ZERO] * nc
        x[f] = ONE
        for i, pc in enumerate(piv):
            x[pc] = -red[i][f]
        basis.append(x)
    return basis


def solve(a: Sequence[Sequence], b: Sequence) -> Optional[Row]:
    """One exact solution of ``A x = b`` or ``None`` if inconsistent."""
    aug = [list(r) + [bi] for r, bi in zip(to_exact(a), to_exact([b])[0])]
    red, piv = rref(aug)
    nc = len(aug[0]) - 1
    if nc in piv:
        return None
    x = [ZERO] * nc
    for i, pc in enumerate(piv):
        x[pc] = red[i][nc]
    return x


def bareiss(rows: Sequence[Sequence]) -> Tuple[GaussianRational, List[GaussianRational]]:
    """Fraction-free Bareiss elimination of a square matrix.

    Returns ``(det, pivots)`` where ``pivots[k]`` is the k-th leading
    principal minor produced along the way (after any row swaps).
    """
    m = [list(r) for r in to_exact(rows)]
    n = len(m)
    if n == 0:
        return ONE, []
    if any(len(r) != n for r in m):
        raise ValueError("determinant of a non-square matrix")
    sign = 1
    prev = ONE
    pivots = []
    for k in range(n - 1):
        if not m[k][k]:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return ZERO, pivots + [ZERO]
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivots.append(m[k][k])
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    pivots.append(m[n - 1][n - 1])
    d = m[n - 1][n - 1]
    return (d if sign > 0 else -d), pivots


def det(rows: Sequence[Sequence]) -> GaussianRational:
    return bareiss(rows)[0]


def inverse(rows: Sequence[Sequence]) -> List[Row]:
    n = len(rows)
    aug = [list(r) + e for r, e in zip(to_exact(rows), identity(n))]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [r[n:] for r in red]


# -- polynomial matrices ---------------------------------------------------------

def poly_rank(rows: Sequence[Sequence[Poly]]) -> int:
    """Rank over the fraction field by fraction-free (Bareiss-style) echelon form.

    Valid because the polynomial ring is an integral domain; every division
    performed is exact.
    """
    m = [list(r) for r in rows]
    if not m:
        return 0
    nr, nc = len(m), len(m[0])
    prev = Poly.one()
    r = 0
    for c in range(nc):
        if r == nr:
            break
        cands = [i for i in range(r, nr) if not m[i][c].is_zero()]
        if not cands:
            continue
        p = min(cands, key=lambda i: len(m[i][c]))
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        for i in range(r + 1, nr):
            f = m[i][c]
            new = []
            for j in range(nc):
                if j <= c:
                    new.append(Poly.zero())
                    continue
                val = m[i][j] * piv - f * m[r][j]
                new.append(divide_exact(val, prev) if not val.is_zero() else val)
            m[i] = new
        prev = piv
        r += 1
    return r


def poly_det(rows: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant of a square polynomial matrix (Bareiss with exact division)."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return Poly.one()
    sign = 1
    prev = Poly.one()
    for k in range(n - 1):
        if m[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not m[i][k].is_zero()), None)
            if swap is None:
                return Poly.zero()
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                val = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = divide_exact(val, prev) if not val.is_zero() else val
        prev = m[k][k]
    d = m[n - 1][n - 1]
    return d if sign > 0 else -d


def real_kernel(rows: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    """Nullspace over Q of a rational matrix (entries Fractions or ints)."""
    ex = [[GaussianRational(x) for x in r] for r in rows]
    basis = nullspace(ex, None)
    return [[x.re for x in v] for v in basis]
