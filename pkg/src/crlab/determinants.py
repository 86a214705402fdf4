"""Compound-determinant identities and the bordered-determinant dependence test.

Index arguments are 1-based, matching the usual minor notation
``B(i_1..i_p ; j_1..j_p)``.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .gaussian import ZERO, GaussianRational, as_gaussian
from .linalg import ExactMatrix, bareiss, det, solve, to_exact

__all__ = [
    "minor_det", "cofactor_det", "lemma44_check", "lemma45_check", "lemma46_check",
    "lemma47_solve", "condensation_pivots", "random_matrix", "run_identity_trials",
]


def _rows(B) -> List[List[GaussianRational]]:
    return B.rows if isinstance(B, ExactMatrix) else to_exact(B)


def minor_det(B, rows: Sequence[int], cols: Sequence[int]) -> GaussianRational:
    """Determinant of the submatrix on 1-based ``rows`` x ``cols``."""
    m = _rows(B)
    nr, nc = len(m), (len(m[0]) if m else 0)
    rows, cols = list(rows), list(cols)
    if len(rows) != len(cols):
        raise ValueError("row and column index sets differ in size")
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        raise ValueError("duplicate indices")
    if any(not 1 <= i <= nr for i in rows) or any(not 1 <= j <= nc for j in cols):
        raise IndexError("minor index out of range")
    return det([[m[i - 1][j - 1] for j in cols] for i in rows])


def cofactor_det(m) -> GaussianRational:
    """Laplace expansion along the first row; slow, used as a test oracle."""
    m = to_exact(m)
    n = len(m)
    if n == 0:
        return GaussianRational(1)
    if n == 1:
        return m[0][0]
    total = ZERO
    for j in range(n):
        if not m[0][j]:
            continue
        sub = [r[:j] + r[j + 1:] for r in m[1:]]
        term = m[0][j] * cofactor_det(sub)
        total = total + term if j % 2 == 0 else total - term
    return total


def _check_index_set(s, n, name):
    s = list(s)
    if len(s) != n - 2 or sorted(set(s)) != s or any(not 1 <= x <= n - 1 for x in s):
        raise ValueError(f"{name} must be an increasing subset of 1..{n - 1} of size {n - 2}")
    return s


def lemma44_check(B, i_set: Sequence[int], j_set: Sequence[int]) -> Tuple[GaussianRational, GaussianRational, bool]:
    """2x2 determinant of bordered minors vs ``B(i; j) * |B|``."""
    m = _rows(B)
    n = len(m)
    if n < 3 or any(len(r) != n for r in m):
        raise ValueError("need a square matrix of size >= 3")
    i_set = _check_index_set(i_set, n, "i-set")
    j_set = _check_index_set(j_set, n, "j-set")
    head = list(range(1, n))
    tl = minor_det(m, head, head)
    tr = minor_det(m, head, j_set + [n])
    bl = minor_det(m, i_set + [n], head)
    br = minor_det(m, i_set + [n], j_set + [n])
    lhs = tl * br - tr * bl
    rhs = minor_det(m, i_set, j_set) * det(m)
    return lhs, rhs, lhs == rhs


def condense(C) -> List[List[GaussianRational]]:
    """The (p-1)x(p-1) matrix of 2x2 minors anchored at ``c_11``."""
    m = _rows(C)
    p = len(m)
    c11 = m[0][0]
    return [[c11 * m[i][j] - m[0][j] * m[i][0] for j in range(1, p)] for i in range(1, p)]


def lemma45_check(C) -> Tuple[GaussianRational, GaussianRational, bool]:
    m = _rows(C)
    p = len(m)
    if p < 3 or any(len(r) != p for r in m):
        raise ValueError("need a square matrix of size >= 3")
    lhs = m[0][0] ** (p - 2) * det(m)
    rhs = det(condense(m))
    return lhs, rhs, lhs == rhs


def lemma46_check(A) -> List[dict]:
    """The four 3x3 displays; each should equal ``a_rs * |A|``."""
    m = _rows(A)
    if len(m) != 3 or any(len(r) != 3 for r in m):
        raise ValueError("need a 3x3 matrix")
    dA = det(m)
    out = []
    for r, s in itertools.product((1, 2), repeat=2):
        lhs, rhs, ok = lemma44_check(m, [r], [s])
        expected = m[r - 1][s - 1] * dA
        out.append({"rs": (r, s), "display": lhs, "a_rs_detA": expected,
                    "equal": ok and lhs == expected,
                    "zero_when_singular": (dA != 0) or lhs == 0})
    return out


def lemma47_solve(columns: Sequence[Sequence], a: Sequence) -> dict:
    """Decide ``a == 0`` from the bordered determinants ``det(b_I, a)``."""
    bs = [[as_gaussian(x) for x in c] for c in columns]
    n = len(bs)
    a = [as_gaussian(x) for x in a]
    if any(len(c) != n for c in bs) or len(a) != n:
        raise ValueError("need n columns of length n and a vector of length n")
    B = [[bs[j][i] for j in range(n)] for i in range(n)]
    if det(B) == 0:
        raise ValueError("columns b_1..b_n are linearly dependent")
    for subset in itertools.combinations(range(n), n - 1):
        cols = [bs[k] for k in subset] + [a]
        val = det([[c[i] for c in cols] for i in range(n)])
        if val != 0:
            return {"zero": False, "witness": {"columns": [k + 1 for k in subset], "det": val}}
    lam = solve(B, a)
    if any(x != 0 for x in lam):
        raise AssertionError("bordered determinants vanish but coordinates do not")
    return {"zero": True, "lambda": lam}


def condensation_pivots(C) -> List[GaussianRational]:
    """Leading entries of repeated condensation, divided as in Bareiss.

    Equals ``bareiss(C)[1]`` whenever no row exchange is needed.
    """
    m = _rows(C)
    pivots = []
    prev = GaussianRational(1)
    while m:
        pivots.append(m[0][0])
        if len(m) == 1 or m[0][0] == 0:
            break
        nxt = condense(m)
        m = [[x / prev for x in r] for r in nxt]
        prev = pivots[-1]
    return pivots


def random_matrix(rng: random.Random, n: int, num: int = 9, den: int = 3) -> List[List[GaussianRational]]:
    def r():
        return Fraction(rng.randint(-num, num), rng.randint(1, den))
    return [[GaussianRational(r(), r()) for _ in range(n)] for _ in range(n)]


def _singularize(rng, m):
    # last row becomes a combination of two others
    n = len(m)
    i, j = rng.sample(range(n - 1), 2) if n > 2 else (0, 0)
    c = GaussianRational(rng.randint(-3, 3), rng.randint(-3, 3))
    m[-1] = [x + c * y for x, y in zip(m[i], m[j])]
    return m


def run_identity_trials(dims: Sequence[int] = (3, 4, 5, 6), trials: int = 1000, seed: int = 42) -> dict:
    """Randomized exact trials of all four identities per dimension."""
    rng = random.Random(seed)
    summary: Dict[str, dict] = {}
    for n in dims:
        counts = {"lemma44": [0, 0], "lemma45": [0, 0], "lemma45_c11_zero": [0, 0],
                  "lemma46": [0, 0], "lemma47": [0, 0], "bareiss_pivots": [0, 0]}
        for t in range(trials):
            B = random_matrix(rng, n)
            if t % 10 == 9:
                B = _singularize(rng, B)
            i_set = sorted(rng.sample(range(1, n), n - 2))
            j_set = sorted(rng.sample(range(1, n), n - 2))
            counts["lemma44"][0] += 1
            counts["lemma44"][1] += lemma44_check(B, i_set, j_set)[2]
            C = [r[:] for r in B]
            key = "lemma45"
            if t % 4 == 3:
                C[0][0] = ZERO
                key = "lemma45_c11_zero"
            counts[key][0] += 1
            counts[key][1] += lemma45_check(C)[2]
            A3 = [r[:3] for r in B[:3]]
            counts["lemma46"][0] += 1
            counts["lemma46"][1] += all(d["equal"] for d in lemma46_check(A3))
            cols = [list(c) for c in zip(*random_matrix(rng, n))]
            while det([[c[i] for c in cols] for i in range(n)]) == 0:
                cols = [list(c) for c in zip(*random_matrix(rng, n))]
            if t % 5 == 0:
                a = [ZERO] * n
            else:
                a = [GaussianRational(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(n)]
            res = lemma47_solve(cols, a)
            expected_zero = all(x == 0 for x in a)
            counts["lemma47"][0] += 1
            counts["lemma47"][1] += res["zero"] == expected_zero
            if not _swap_needed(B):
                counts["bareiss_pivots"][0] += 1
                counts["bareiss_pivots"][1] += condensation_pivots(B) == bareiss(B)[1]
        summary[str(n)] = {k: {"trials": v[0], "passed": v[1], "all_equal": v[0] == v[1]} for k, v in counts.items()}
    return {"dims": list(dims), "trials": trials, "seed": seed, "results": summary,
            "all_equal": all(x["all_equal"] for s in summary.values() for x in s.values())}


def _swap_needed(B) -> bool:
    # pivot comparison is only meaningful when Bareiss needs no row exchange
    m = _rows(B)
    n = len(m)
    return any(minor_det(m, range(1, k + 1), range(1, k + 1)) == 0 for k in range(1, n))
