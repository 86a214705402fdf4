"""Unitary change of target coordinates putting the jet frame in block form.

Given a map into a hypersurface ``-v' + sum |w_j|^2 + ...`` with ``F(p) = 0``,
the rows ``L_1 a, ..., L_n a, L^beta a`` at ``p`` are rotated so that their
first ``n+k-1`` components become ``(B | 0)``.  Unitarity forces irrational
entries, so the rotation is floating point; the exact jets are only used to
cross-check ranks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .gaussian import I, GaussianRational
from .geometry import EmbeddedManifold, GeometryError, VectorField
from .jets import CRMap, JetEngine, greedy_frame, jet_report, multiindices
from .poly import PointAssignment, Poly, w, wbar, z, zbar

__all__ = [
    "NormalizationError", "NormalizationResult", "Tolerances", "select_frame",
    "normalize_frame", "normalize_rows", "orthonormal_basis", "translate_to_origin",
    "quadric_signs",
]


class NormalizationError(GeometryError):
    pass


@dataclass(frozen=True)
class Tolerances:
    unitarity: float = 1e-12
    zero_block: float = 1e-10
    invertibility: float = 1e-8
    transformation_law: float = 1e-10
    rank_threshold: float = 1e-8


@dataclass
class NormalizationResult:
    A: np.ndarray
    extension: List[Tuple[int, ...]]
    N0: int
    rows: np.ndarray                 # original jet rows at p (complex)
    transformed: np.ndarray          # rows @ A
    residuals: dict
    tolerances: Tolerances
    passed: bool
    frame_alphas: List[Tuple[int, ...]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def B(self) -> np.ndarray:
        k = self.N0 - 1
        return self.transformed[1:1 + k, :k]

    def zero_block(self) -> np.ndarray:
        k = self.N0 - 1
        return self.transformed[1:1 + k, k:-1]

    def to_json(self):
        def cplx(M):
            return [[{"re": float(x.real), "im": float(x.imag)} for x in r] for r in M]
        return {
            "A": cplx(self.A), "N0": self.N0,
            "extension": [list(a) for a in self.extension],
            "frame": [list(a) for a in self.frame_alphas],
            "transformed_rows": cplx(self.transformed),
            "residuals": self.residuals, "passed": self.passed,
            "tolerances": self.tolerances.__dict__, "notes": self.notes,
        }


def select_frame(F: CRMap, p: PointAssignment, l: int) -> dict:
    """Greedy graded-lex extension of ``{a, L_1 a, .., L_n a}(p)`` to a basis of E_l(p)."""
    res = greedy_frame(F, p, l)
    res["N0"] = res["rank"]
    if not res["precondition_ok"]:
        res["message"] = (f"{{a, L_1 a, ..., L_n a}} has rank {res['base_rank']} < n+1 = {F.n + 1}; "
                          "dF is not injective at p, so rank_1 = n+1 fails")
    return res


def orthonormal_basis(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rows of an orthonormal basis of the row span (MGS, two passes)."""
    basis: List[np.ndarray] = []
    for v in np.asarray(vectors, dtype=complex):
        x = v.copy()
        for _ in range(2):
            for q in basis:
                x = x - np.vdot(q, x) * q
        nrm = np.linalg.norm(x)
        if nrm > tol * max(1.0, np.linalg.norm(v)):
            basis.append(x / nrm)
    return np.array(basis, dtype=complex).reshape(len(basis), np.asarray(vectors).shape[1])


def _complete(basis: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal rows to a basis of C^dim using identity columns."""
    out = [b for b in basis]
    remaining = list(range(dim))
    while len(out) < dim:
        best, best_vec, best_norm = None, None, -1.0
        for i in remaining:
            e = np.zeros(dim, dtype=complex)
            e[i] = 1.0
            x = e.copy()
            for _ in range(2):
                for q in out:
                    x = x - np.vdot(q, x) * q
            nrm = np.linalg.norm(x)
            if nrm > best_norm + 1e-14:
                best, best_vec, best_norm = i, x, nrm
        remaining.remove(best)
        out.append(best_vec / best_norm)
    return np.array(out, dtype=complex)


def normalize_rows(rows: np.ndarray) -> np.ndarray:
    """Unitary ``A`` built from the jet rows (row 0 is ``a(p)``).

    The orthonormal basis ``T_1..`` of the span of the first ``N'-1``
    components of rows ``1..`` is placed (conjugated) in the columns of
    ``T``, so that ``row @ T`` lists Hermitian inner products with ``T_m``.
    """
    rows = np.asarray(rows, dtype=complex)
    Np = rows.shape[1]
    hat = rows[1:, : Np - 1]
    basis = orthonormal_basis(hat)
    full = _complete(basis, Np - 1)
    A = np.zeros((Np, Np), dtype=complex)
    A[: Np - 1, : Np - 1] = full.conj().T
    A[Np - 1, Np - 1] = 1.0
    return A


def quadric_signs(target: EmbeddedManifold) -> Optional[List[GaussianRational]]:
    """``eps_j`` if the target is ``-Im z_N + sum eps_j |z_j|^2`` exactly, else None."""
    N = target.N
    if target.d != 1:
        return None
    rho = target.defining[0]
    eps = []
    rest = rho + (Poly.var(z(N)) - Poly.var(zbar(N))) / (2 * I)
    for j in range(1, N):
        c = rest.derive(z(j)).derive(zbar(j)).constant_term()
        eps.append(c)
    quad = Poly.zero()
    for j, c in enumerate(eps, start=1):
        quad = quad + Poly.var(z(j)) * Poly.var(zbar(j)) * c
    if quad != rest:
        return None
    return eps


def translate_to_origin(F: CRMap, p: PointAssignment) -> CRMap:
    """Compose with the quadric automorphism moving ``F(p)`` to 0.

    ``w'_j = w_j - c_j`` for j < N' and
    ``w'_N = w_N - c_N - 2i sum_j eps_j conj(c_j) (w_j - c_j)``.
    """
    eps = quadric_signs(F.target)
    if eps is None:
        raise NormalizationError("translation to the origin is implemented for quadric targets only")
    N2 = F.Nprime
    c = [h.evaluate(p) for h in F.components]
    comps = [F.components[j] - c[j] for j in range(N2 - 1)]
    last = F.components[N2 - 1] - c[N2 - 1]
    for j in range(N2 - 1):
        last = last - comps[j] * (2 * I * eps[j] * c[j].conjugate())
    comps.append(last)
    return CRMap(F.source, F.target, comps, name=F.name)


def _numeric_jets(F: CRMap, A: np.ndarray, basis: Sequence[VectorField], alphas, p: PointAssignment) -> np.ndarray:
    """Jets at ``p`` recomputed from the transformed target and map (float coefficients).

    Coordinates change by ``Z' = A Z~`` (column vectors), which is the
    convention under which the gradient transforms as ``a~ = a A``.
    """
    N2 = F.Nprime
    Ainv = np.linalg.inv(A)
    rho = F.target_w[0].to_complex()
    sub = {}
    for j in range(N2):
        col = Poly.zero()
        for i in range(N2):
            if abs(A[j, i]) > 0:
                col = col + Poly.var(w(i + 1)) * complex(A[j, i])
        sub[w(j + 1)] = col
        sub[wbar(j + 1)] = col.conj()
    rho_t = rho.substitute(sub)
    comps = []
    for j in range(N2):
        c = Poly.zero()
        for i in range(N2):
            if abs(Ainv[j, i]) > 0:
                c = c + F.components[i].to_complex() * complex(Ainv[j, i])
        comps.append(c)
    csub = {}
    for j, h in enumerate(comps, start=1):
        csub[w(j)] = h
        csub[wbar(j)] = h.conj()
    a_rows = [[rho_t.derive(w(j)).substitute(csub) for j in range(1, N2 + 1)]]
    cbasis = [VectorField({v: c.to_complex() for v, c in L.coeffs.items()}) for L in basis]
    eng = JetEngine(a_rows, cbasis)
    pc = PointAssignment({v: complex(x) for v, x in p.items()})
    return np.array([[complex(x.evaluate(pc)) for x in eng.jet(a)[0]] for a in alphas], dtype=complex)


def _float_rank(M: np.ndarray, thr: float) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int((s > thr * max(1.0, s[0])).sum())


def normalize_frame(F: CRMap, p: PointAssignment, l: int, tolerances: Tolerances = Tolerances(),
                    translate: bool = False) -> NormalizationResult:
    if len(F.target_w) != 1:
        raise NormalizationError("normalization needs a hypersurface target")
    notes = []
    image = [h.evaluate(p) for h in F.components]
    if any(x != 0 for x in image):
        if not translate:
            raise NormalizationError("F(p) != 0; translate the target first")
        F = translate_to_origin(F, p)
        notes.append("target translated so that F(p) = 0")
    sel = select_frame(F, p, l)
    if not sel["precondition_ok"]:
        raise NormalizationError(sel["message"])
    n = F.n
    eng = F.engine(p)
    base = [(0,) * n] + [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
    alphas = base + sel["extension"]
    exact_rows = [eng.rows_at(a, p)[0] for a in alphas]
    a0 = exact_rows[0]
    N2 = F.Nprime
    if any(x != 0 for x in a0[:-1]) or a0[-1] != I / 2:
        raise NormalizationError(f"a(p) = {[str(x) for x in a0]} is not (0, ..., 0, i/2); target is not in normal form at F(p)")
    rows = np.array([[complex(x) for x in r] for r in exact_rows], dtype=complex)
    A = normalize_rows(rows)
    transformed = rows @ A
    N0 = sel["N0"]
    k = N0 - 1
    unit = float(np.max(np.abs(A @ A.conj().T - np.eye(N2))))
    zb = transformed[1:1 + k, k:N2 - 1]
    zero_res = float(np.max(np.abs(zb))) if zb.size else 0.0
    B = transformed[1:1 + k, :k]
    svals = np.linalg.svd(B, compute_uv=False) if B.size else np.array([np.inf])
    smin = float(svals.min())
    cond = float(svals.max() / smin) if smin > 0 else float("inf")
    a_res = float(np.max(np.abs(transformed[0] - np.r_[np.zeros(N2 - 1), 0.5j])))
    recomputed = _numeric_jets(F, A, eng.basis, alphas, p)
    law = float(np.max(np.abs(recomputed - transformed)))
    all_alphas = [a for lev in range(l + 1) for a in multiindices(n, lev)]
    all_rows = np.array([[complex(x) for x in eng.rows_at(a, p)[0]] for a in all_alphas])
    r_exact = jet_report(F, p, l).ranks[l]
    r_before = _float_rank(all_rows, tolerances.rank_threshold)
    r_after = _float_rank(all_rows @ A, tolerances.rank_threshold)
    residuals = {
        "unitarity": unit, "zero_block": zero_res, "sigma_min_B": smin, "cond_B": cond,
        "a_at_p": a_res, "transformation_law": law,
        "rank_exact": r_exact, "rank_float_before": r_before, "rank_float_after": r_after,
    }
    passed = (unit <= tolerances.unitarity and zero_res <= tolerances.zero_block
              and smin >= tolerances.invertibility and law <= tolerances.transformation_law
              and a_res <= tolerances.zero_block and r_exact == r_before == r_after == N0)
    return NormalizationResult(A=A, extension=list(sel["extension"]), N0=N0, rows=rows,
                               transformed=transformed, residuals=residuals, tolerances=tolerances,
                               passed=passed, frame_alphas=alphas, notes=notes)
