"""Jets of CR maps: a-vectors, geometric ranks, nondegeneracy, reflection quotients."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .gaussian import ZERO, GaussianRational, as_gaussian
from .geometry import (
    EmbeddedManifold, GeometryError, VectorField, characteristic_space, cr_basis,
    levi_form, pivot_set, signature,
)
from .linalg import conj_transpose, det, matmul, poly_det, poly_rank, rank
from .poly import PointAssignment, Poly, RationalExpr, Variable, w, wbar, z, zbar

__all__ = [
    "CRMap", "JetEngine", "JetSpanReport", "multiindices", "multiindices_upto",
    "verify_map_into_target", "a_vector", "apply_L_alpha", "rank_l", "jet_report",
    "k0_order", "generic_rank_l", "degenerate_degree", "reflection_quotients",
    "check_theorem25_hypotheses", "quadric_linear_obstruction", "greedy_frame",
    "mixed_order_diagnostic", "find_rank_witnesses", "random_rational",
    "random_source_point", "transform_target", "HypothesisError", "FrameError",
]


class HypothesisError(GeometryError):
    pass


class FrameError(GeometryError):
    pass


def _z_to_w(p: Poly) -> Poly:
    sub = {}
    for v in p.variables():
        if v.kind == "z":
            sub[v] = Poly.var(Variable("w", v.index, v.conj))
    return p.substitute(sub)


class CRMap:
    """Polynomial map ``H = (H_1..H_N')`` from ``source`` into ``target``.

    ``components`` are holomorphic polynomials in the source z-variables.
    The target's defining functions are read in its own z-variables and
    renamed to w internally.
    """

    def __init__(self, source: EmbeddedManifold, target: EmbeddedManifold, components: Sequence[Poly], name: str = ""):
        self.source = source
        self.target = target
        self.components = tuple(components)
        self.name = name
        if len(self.components) != target.N:
            raise GeometryError(f"map has {len(self.components)} components but target lives in C^{target.N}")
        for h in self.components:
            if any(v.conj or v.kind != "z" for v in h.variables()):
                raise GeometryError(f"map component {h} is not a holomorphic polynomial in z")
        self.target_w = tuple(_z_to_w(r) for r in target.defining)
        self._sub = {}
        for j, h in enumerate(self.components, start=1):
            self._sub[w(j)] = h
            self._sub[wbar(j)] = h.conj()
        self._engines: Dict[Tuple[int, ...], JetEngine] = {}
        self._a = None

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def Nprime(self) -> int:
        return self.target.N

    def compose(self, f: Poly) -> Poly:
        """``f(H, conj H)`` for ``f`` in w-variables."""
        return f.substitute(self._sub)

    def image_point(self, p: PointAssignment) -> PointAssignment:
        return PointAssignment({z(j): h.evaluate(p) for j, h in enumerate(self.components, start=1)})

    def engine(self, p: Optional[PointAssignment] = None) -> "JetEngine":
        if p is None:
            piv = _generic_pivots(self.source)
            basis = _basis_for_pivots(self.source, piv)
        else:
            piv = pivot_set(self.source, p)
            basis = None
        if piv not in self._engines:
            if basis is None:
                basis = cr_basis(self.source, p)
            self._engines[piv] = JetEngine(a_vector(self), basis)
        return self._engines[piv]


def _generic_pivots(M: EmbeddedManifold) -> Tuple[int, ...]:
    return tuple(range(M.n + 1, M.N + 1))


def _basis_for_pivots(M: EmbeddedManifold, piv) -> List[VectorField]:
    # same construction as cr_basis but without a base point
    from .geometry import _adjugate
    P = [[rho.derive(zbar(j)) for j in piv] for rho in M.defining]
    detP = poly_det(P)
    if detP.is_zero():
        raise GeometryError("pivot gradient block vanishes identically")
    adj = _adjugate(P)
    fields = []
    for i in range(1, M.N + 1):
        if i in piv:
            continue
        r = [rho.derive(zbar(i)) for rho in M.defining]
        coeffs = {zbar(i): detP}
        for jj, j in enumerate(piv):
            s = Poly.zero()
            for mu in range(M.d):
                s = s + adj[jj][mu] * r[mu]
            coeffs[zbar(j)] = -s
        fields.append(VectorField(coeffs))
    return fields


# ---------------------------------------------------------------------------


def verify_map_into_target(F: CRMap) -> Tuple[bool, List[Poly]]:
    """Does ``rho'(H, conj H)`` vanish on the source?  Returns (ok, residuals)."""
    g = F.source.require_graph()
    residuals = [g.reduce(F.compose(r)) for r in F.target_w]
    return all(r.is_zero() for r in residuals), residuals


def a_vector(F: CRMap) -> List[List[Poly]]:
    """Rows ``rho'_mu,Z'(H, conj H)`` for each target defining function."""
    if F._a is None:
        N2 = F.Nprime
        F._a = [[F.compose(r.derive(w(j))) for j in range(1, N2 + 1)] for r in F.target_w]
    return F._a


def multiindices(n: int, degree: int) -> List[Tuple[int, ...]]:
    """All multiindices of exactly ``degree`` in graded-lex order, e.g. (2,0),(1,1),(0,2)."""
    if n == 0:
        return [()] if degree == 0 else []
    out = []
    for first in range(degree, -1, -1):
        for rest in multiindices(n - 1, degree - first):
            out.append((first,) + rest)
    return out


def multiindices_upto(n: int, l: int) -> List[Tuple[int, ...]]:
    out = []
    for deg in range(l + 1):
        out += multiindices(n, deg)
    return out


class JetEngine:
    """Memoized ``L^alpha a`` with ``L^alpha = L_1^{alpha_1} ... L_n^{alpha_n}``."""

    def __init__(self, a_rows: List[List[Poly]], basis: Sequence[VectorField]):
        self.basis = list(basis)
        self.n = len(self.basis)
        self._memo: Dict[Tuple[int, ...], List[List[Poly]]] = {(0,) * self.n: a_rows}
        self._reduced: Dict[Tuple[int, ...], List[List[Poly]]] = {}

    def jet(self, alpha: Tuple[int, ...]) -> List[List[Poly]]:
        alpha = tuple(alpha)
        got = self._memo.get(alpha)
        if got is not None:
            return got
        i = next(k for k, e in enumerate(alpha) if e)
        prev = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
        L = self.basis[i]
        out = [[L.apply(x) for x in row] for row in self.jet(prev)]
        self._memo[alpha] = out
        return out

    def reduced(self, alpha, graph) -> List[List[Poly]]:
        alpha = tuple(alpha)
        got = self._reduced.get(alpha)
        if got is None:
            got = [[graph.reduce(x) for x in row] for row in self.jet(alpha)]
            self._reduced[alpha] = got
        return got

    def rows_at(self, alpha, p: PointAssignment) -> List[List[GaussianRational]]:
        return [[x.evaluate(p) for x in row] for row in self.jet(alpha)]


def apply_L_alpha(vec: Sequence[Poly], alpha: Sequence[int], basis: Sequence[VectorField]) -> List[Poly]:
    """Apply ``L_1^{alpha_1} ... L_n^{alpha_n}`` (``L_n`` acts first)."""
    out = list(vec)
    for i in reversed(range(len(alpha))):
        for _ in range(alpha[i]):
            out = [basis[i].apply(x) for x in out]
    return out


@dataclass
class JetSpanReport:
    point: PointAssignment
    levels: List[dict] = field(default_factory=list)   # {"level", "rows": [(alpha, mu, vector)], "rank"}
    ranks: List[int] = field(default_factory=list)
    order: Optional[int] = None
    Nprime: int = 0

    def rank(self, l: int) -> int:
        return self.ranks[l]

    def to_json(self):
        return {
            "ranks": list(self.ranks),
            "nondegeneracy_order": self.order,
            "target_dim": self.Nprime,
            "levels": [
                {"level": lv["level"], "rank": lv["rank"], "strict_increase": lv["strict"],
                 "rows": [{"alpha": list(a), "mu": mu + 1, "vector": [x.to_json() for x in vec]}
                          for a, mu, vec in lv["rows"]]}
                for lv in self.levels
            ],
        }


def jet_report(F: CRMap, p: PointAssignment, l: int) -> JetSpanReport:
    F.source.check_point(p)
    eng = F.engine(p)
    n = eng.n
    rep = JetSpanReport(point=p, Nprime=F.Nprime)
    acc: List[List[GaussianRational]] = []
    for lev in range(l + 1):
        rows = []
        for alpha in multiindices(n, lev):
            for mu, vec in enumerate(eng.rows_at(alpha, p)):
                rows.append((alpha, mu, vec))
                acc.append(vec)
        r = rank(acc)
        strict = lev == 0 or r > rep.ranks[-1]
        rep.ranks.append(r)
        rep.levels.append({"level": lev, "rows": rows, "rank": r, "strict": strict})
        if rep.order is None and r == F.Nprime and (lev == 0 or rep.ranks[lev - 1] < F.Nprime):
            rep.order = lev
    return rep


def rank_l(F: CRMap, p: PointAssignment, l: int) -> int:
    return jet_report(F, p, l).ranks[l]


DEFAULT_MAX_ORDER = 6


def k0_order(F: CRMap, p: PointAssignment, max_l: Optional[int] = None) -> Optional[int]:
    """Least ``k0 <= max_l`` with ``E_{k0-1} != E_{k0} = C^{N'}``; ``None`` if not reached.

    The order can exceed ``N' - n`` (``z1^m`` into the sphere has order ``m``),
    so the default search depth is a fixed ``DEFAULT_MAX_ORDER``.
    """
    if max_l is None:
        max_l = DEFAULT_MAX_ORDER
    return jet_report(F, p, max_l).order


def random_rational(rng: random.Random, num: int = 5, den: int = 4, complex_: bool = True) -> GaussianRational:
    def r():
        return Fraction(rng.randint(-num, num), rng.randint(1, den))
    return GaussianRational(r(), r() if complex_ else 0)


def random_source_point(M: EmbeddedManifold, rng: random.Random, num: int = 5, den: int = 4) -> PointAssignment:
    g = M.require_graph()
    zs = [random_rational(rng, num, den) for _ in range(g.n)]
    us = [random_rational(rng, num, den, complex_=False) for _ in range(g.d)]
    return M.graph_point(zs, us)


def generic_rank_l(F: CRMap, l: int, probe_points: int = 3, seed: int = 0) -> int:
    """Rank over the function field of the source (graph coordinates).

    A few random rational points give a lower bound; if that is not already
    maximal, fraction-free symbolic elimination decides.
    """
    g = F.source.require_graph()
    eng = F.engine(None)
    alphas = multiindices_upto(eng.n, l)
    nrows = len(alphas) * len(F.target_w)
    cap = min(nrows, F.Nprime)
    rng = random.Random(seed)
    lower = 0
    for _ in range(probe_points):
        p = random_source_point(F.source, rng, 7, 5)
        try:
            vals = [vec for a in alphas for vec in eng.rows_at(a, p)]
        except ZeroDivisionError:
            continue
        lower = max(lower, rank(vals))
        if lower == cap:
            return cap
    rows = [row for a in alphas for row in eng.reduced(a, g)]
    return poly_rank(rows)


def degenerate_degree(F: CRMap, p: PointAssignment, k: Optional[int] = None) -> dict:
    """Degenerate degree at ``p`` with the membership analysis behind it.

    Returns a dict with keys ``degree`` (int or None), ``region`` (one of
    "omega1", "omega2", "exceptional"), ``generic_ranks``, ``point_ranks``,
    and ``flags``.
    """
    n = F.n
    if k is None:
        k = F.Nprime - n
    rep = jet_report(F, p, k)
    point_ranks = rep.ranks
    generic = [generic_rank_l(F, l) for l in range(k + 1)]
    out = {"k": k, "point_ranks": point_ranks, "generic_ranks": generic,
           "degree": None, "flags": []}
    if point_ranks[k] == n + k:
        out["region"] = "omega1"
        return out
    if generic[k] >= n + k:
        out["region"] = "exceptional"
        out["flags"].append("rank_k drops at p but is maximal nearby; p is in neither open set")
        return out
    out["region"] = "omega2"
    for l in range(1, k + 1):
        if generic[l] <= n + l - 1:
            out["degree"] = l
            break
    for l in range(k + 1):
        if generic[l] != point_ranks[l]:
            out["flags"].append(f"exceptional locus: rank_{l}(p)={point_ranks[l]} < generic {generic[l]}")
    if out["degree"] is not None and out["degree"] < 2:
        out["flags"].append("degree below 2: injectivity hypothesis fails at p")
    return out


def find_rank_witnesses(F: CRMap, p: PointAssignment, degree: int, budget: int = 20,
                        seed: int = 0) -> dict:
    """Search rational points ``p_i -> p`` with ``rank_{d-1}(F, p_i) = n + d - 1``."""
    g = F.source.require_graph()
    fp = F.source.free_point(p)
    n, d = g.n, g.d
    rng = random.Random(seed)
    target = n + degree - 1
    found = []
    tried = 0
    for m in range(1, budget + 1):
        scale = Fraction(1, 2 ** m)
        zs = [fp[z(j)] + random_rational(rng, 3, 1) * scale for j in range(1, n + 1)]
        us = [fp[Variable("u", mu)] + random_rational(rng, 3, 1, False) * scale for mu in range(1, d + 1)]
        q = F.source.graph_point(zs, us)
        tried += 1
        if rank_l(F, q, degree - 1) == target:
            found.append(q)
    return {"found": len(found), "tried": tried, "points": found,
            "status": "found" if found else "not found within budget"}


def mixed_order_diagnostic(F: CRMap, p: PointAssignment, l: int) -> dict:
    """Compare the ordered-power span with the span of all words in the L_i."""
    eng = F.engine(p)
    basis = eng.basis
    ordered = [vec for a in multiindices_upto(eng.n, l) for vec in eng.rows_at(a, p)]
    words: Dict[Tuple[int, ...], List[List[Poly]]] = {(): a_vector(F)}
    frontier = [()]
    for _ in range(l):
        nxt = []
        for wd in frontier:
            for i in range(eng.n):
                key = (i,) + wd
                words[key] = [[basis[i].apply(x) for x in row] for row in words[wd]]
                nxt.append(key)
        frontier = nxt
    mixed = [[x.evaluate(p) for x in row] for rows in words.values() for row in rows]
    r1, r2 = rank(ordered), rank(mixed)
    return {"ordered_rank": r1, "mixed_rank": r2, "equal": r1 == r2}


# ---------------------------------------------------------------------------
# frames and reflection quotients


def greedy_frame(F: CRMap, p: PointAssignment, l: int) -> dict:
    """Extend ``{a, L_1 a, .., L_n a}(p)`` greedily in graded-lex order up to level ``l``."""
    eng = F.engine(p)
    n = eng.n
    base = [(0,) * n] + [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
    vecs = [eng.rows_at(a, p)[0] for a in base]
    r = rank(vecs)
    out = {"base_rank": r, "extension": [], "precondition_ok": r == n + 1}
    for lev in range(2, l + 1):
        for a in multiindices(n, lev):
            v = eng.rows_at(a, p)[0]
            if rank(vecs + [v]) > r:
                vecs.append(v)
                r += 1
                out["extension"].append(a)
    out["rank"] = r
    return out


def _frame_rows(F: CRMap, p: PointAssignment, l: int, extension=None):
    eng = F.engine(p)
    n = eng.n
    rows = [(0,) * n] + [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
    if extension is None:
        extension = greedy_frame(F, p, l)["extension"]
    rows += list(extension)
    return rows[: n + l]


def reflection_quotients(F: CRMap, p: PointAssignment, l: int, columns=None,
                         check_hypotheses: bool = True) -> dict:
    """Cramer coefficients ``G_i^j`` expressing column ``a_j`` through the frame.

    Frame rows: ``beta_0, e_1..e_n, beta_{n+1}..beta_{n+l-1}``; frame columns
    default to ``1..n+l-1, N'``.  ``columns="auto"`` picks the first subset
    containing ``N'`` with nonzero determinant at ``p``.
    """
    if len(F.target_w) != 1:
        raise GeometryError("reflection quotients need a hypersurface target")
    g = F.source.require_graph()
    n, N2 = F.n, F.Nprime
    size = n + l
    hyp = {}
    if check_hypotheses:
        r_l = rank_l(F, p, l)
        gr = generic_rank_l(F, l + 1)
        hyp = {"rank_l": r_l, "generic_rank_l_plus_1": gr,
               "ok": r_l == n + l and gr == n + l}
        if not hyp["ok"]:
            raise HypothesisError(f"need rank_l(p) = n+l = {n + l} and generic rank_(l+1) = n+l; got {r_l}, {gr}")
    frame_alphas = _frame_rows(F, p, l)
    if len(frame_alphas) < size:
        raise FrameError("not enough independent jet rows for the frame")
    eng = F.engine(p)
    J = [eng.jet(a)[0] for a in frame_alphas]      # rows of polys, columns 1..N'
    if columns is None or columns == "auto":
        default = list(range(1, size)) + [N2]
        cands = [default]
        if columns == "auto":
            cands += [list(c) + [N2] for c in itertools.combinations(range(1, N2), size - 1)]
        chosen = None
        for cols in cands:
            M0 = [[J[r][c - 1].evaluate(p) for c in cols] for r in range(size)]
            if det(M0) != 0:
                chosen = cols
                break
        if chosen is None:
            raise FrameError("frame determinant vanishes at p")
        columns = chosen
    else:
        columns = list(columns)
        M0 = [[J[r][c - 1].evaluate(p) for c in columns] for r in range(size)]
        if det(M0) == 0:
            raise FrameError("frame determinant vanishes at p")
    frame = [[J[r][c - 1] for c in columns] for r in range(size)]
    den = poly_det(frame)
    others = [j for j in range(1, N2 + 1) if j not in columns]
    G: Dict[Tuple[int, int], RationalExpr] = {}
    nums: Dict[Tuple[int, int], Poly] = {}
    for j in others:
        for pos, i in enumerate(columns):
            m = [row[:] for row in frame]
            for r in range(size):
                m[r][pos] = J[r][j - 1]
            num = poly_det(m)
            nums[(j, i)] = num
            G[(j, i)] = RationalExpr(num, den)
    verification = _verify_quotients(F, eng, g, columns, others, nums, den, l)
    return {"G": G, "columns": columns, "frame_rows": frame_alphas,
            "denominator": den, "denominator_at_p": den.evaluate(p),
            "hypotheses": hyp, "verification": verification}


def _verify_quotients(F, eng, g, columns, others, nums, den, l):
    cr_ok = True
    recon_ok = True
    den_r = g.reduce(den)
    for (j, i), num in nums.items():
        for L in eng.basis:
            expr = L.apply(num) * den - num * L.apply(den)
            if not g.reduce(expr).is_zero():
                cr_ok = False
    for j in others:
        for alpha in multiindices_upto(eng.n, l + 1):
            row = eng.reduced(alpha, g)[0]
            acc = row[j - 1] * den_r
            for i in columns:
                acc = acc - g.reduce(nums[(j, i)]) * row[i - 1]
            if not acc.is_zero():
                recon_ok = False
                break
    return {"cr_exact": cr_ok, "reconstruction_exact": recon_ok, "mode": "exact"}


# ---------------------------------------------------------------------------


def _injectivity_rank(F: CRMap, p: PointAssignment) -> int:
    basis = cr_basis(F.source, p)
    m = [[L.apply(h.conj()).evaluate(p) for h in F.components] for L in basis]
    return rank(m)


def check_theorem25_hypotheses(F: CRMap, points: Sequence[PointAssignment]) -> List[dict]:
    out = []
    for p in points:
        rec = {"point": p}
        sigmas = characteristic_space(F.source, p)
        src = []
        for s in sigmas:
            sig = signature(levi_form(F.source, p, s))
            src.append({"sigma": sig, "minus_sigma": (sig[1], sig[0], sig[2])})
        rec["source_signatures"] = src
        rec["source_levi_nonzero_eigenvalue"] = all(s["sigma"][0] + s["sigma"][1] > 0 for s in src)
        q = F.image_point(p)
        tgt_ok = F.target.on_manifold(q)
        rec["image_on_target"] = tgt_ok
        if tgt_ok and F.target.d == 1:
            s = characteristic_space(F.target, q)[0]
            sig = signature(levi_form(F.target, q, s))
            rec["target_signature"] = sig
            nt = F.target.n
            rec["target_strongly_pseudoconvex"] = sig == (nt, 0, 0) or sig == (0, nt, 0)
        else:
            rec["target_signature"] = None
            rec["target_strongly_pseudoconvex"] = False
        inj = _injectivity_rank(F, p) == F.n
        rec["dF_injective"] = inj
        rep = jet_report(F, p, 1)
        rec["rank0"], rec["rank1"] = rep.ranks[0], rep.ranks[1]
        rec["low_order_ranks_ok"] = (not inj) or (rep.ranks[0] == 1 and rep.ranks[1] == F.n + 1)
        out.append(rec)
    return out


def quadric_linear_obstruction(N: int, Nprime: int, lam, A) -> dict:
    """Check ``lam * I_{N-1} == A A^*`` for an (N-1) x (N'-1) matrix ``A``."""
    lam = as_gaussian(lam)
    if not (lam.is_real() and lam.re > 0):
        raise ValueError("lambda must be a positive rational")
    rows = [[as_gaussian(x) for x in r] for r in A]
    if len(rows) != N - 1 or any(len(r) != Nprime - 1 for r in rows):
        raise ValueError(f"A must be {(N - 1)}x{(Nprime - 1)}")
    AAs = matmul(rows, conj_transpose(rows)) if rows and rows[0] else [[ZERO] * (N - 1) for _ in range(N - 1)]
    target = [[lam if i == j else ZERO for j in range(N - 1)] for i in range(N - 1)]
    exact_equal = AAs == target
    out = {"feasible": exact_equal, "rank_A": rank(rows) if rows and rows[0] else 0,
           "identity_holds": exact_equal}
    if Nprime < N:
        out["feasible"] = False
        out["reason"] = "rank(AA*) <= N'-1 < N-1, so lambda*I cannot equal AA*"
    elif not exact_equal:
        out["reason"] = "AA* differs from lambda*I"
    else:
        out["reason"] = "AA* equals lambda*I"
    return out


def transform_target(F: CRMap, A: Sequence[Sequence]) -> CRMap:
    """Change target coordinates by ``Z' = A Z~``; the a-vector becomes ``a A``."""
    from .linalg import inverse
    A = [[as_gaussian(x) for x in r] for r in A]
    Ainv = inverse(A)
    N2 = F.Nprime
    sub = {}
    for j in range(N2):
        col = Poly.zero()
        for i in range(N2):
            if A[j][i]:
                col = col + Poly.var(z(i + 1)) * A[j][i]
        sub[z(j + 1)] = col
        sub[zbar(j + 1)] = col.conj()
    new_target = EmbeddedManifold([r.substitute(sub) for r in F.target.defining], F.target.N)
    comps = []
    for j in range(N2):
        c = Poly.zero()
        for i in range(N2):
            if Ainv[j][i]:
                c = c + F.components[i] * Ainv[j][i]
        comps.append(c)
    return CRMap(F.source, new_target, comps)
