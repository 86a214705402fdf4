"""Embedded and abstract CR structures, CR vector fields, Levi forms."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .gaussian import I, ZERO, GaussianRational, as_gaussian
from .linalg import nullspace, poly_det, poly_rank, rank
from .poly import PointAssignment, Poly, Variable, real_var, z, zbar

__all__ = [
    "GeometryError", "OffManifoldError", "GenericityError", "NonCharacteristicError",
    "VectorField", "EmbeddedManifold", "AbstractCRStructure", "GraphForm",
    "Covector", "LeviMatrix", "cr_basis", "involutivity_check",
    "characteristic_space", "levi_form", "signature", "hermitian_inertia",
]


class GeometryError(ValueError):
    pass


class OffManifoldError(GeometryError):
    pass


class GenericityError(GeometryError):
    pass


class NonCharacteristicError(GeometryError):
    pass


# ---------------------------------------------------------------------------
# vector fields


class VectorField:
    """``sum_v c_v * d/dv`` with polynomial coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Dict[Variable, Poly]):
        self.coeffs = {v: (c if isinstance(c, Poly) else Poly.const(c))
                       for v, c in coeffs.items()}
        self.coeffs = {v: c for v, c in self.coeffs.items() if not c.is_zero()}

    def apply(self, f: Poly) -> Poly:
        out = Poly.zero()
        fv = f.variables()
        for v, c in self.coeffs.items():
            if v in fv:
                out = out + c * f.derive(v)
        return out

    __call__ = apply

    def conj(self) -> "VectorField":
        return VectorField({v.conjugate(): c.conj() for v, c in self.coeffs.items()})

    def bracket(self, other: "VectorField") -> "VectorField":
        keys = set(self.coeffs) | set(other.coeffs)
        out = {}
        for v in keys:
            a = other.coeffs.get(v)
            b = self.coeffs.get(v)
            val = Poly.zero()
            if a is not None:
                val = val + self.apply(a)
            if b is not None:
                val = val - other.apply(b)
            out[v] = val
        return VectorField(out)

    def scale(self, f) -> "VectorField":
        f = f if isinstance(f, Poly) else Poly.const(f)
        return VectorField({v: c * f for v, c in self.coeffs.items()})

    def __add__(self, other: "VectorField") -> "VectorField":
        out = dict(self.coeffs)
        for v, c in other.coeffs.items():
            out[v] = out.get(v, Poly.zero()) + c
        return VectorField(out)

    def at(self, p: PointAssignment) -> Dict[Variable, GaussianRational]:
        return {v: c.evaluate(p) for v, c in self.coeffs.items()}

    def is_zero(self) -> bool:
        return not self.coeffs

    def variables(self):
        return set(self.coeffs)

    def substitute(self, mapping) -> "VectorField":
        return VectorField({v: c.substitute(mapping) for v, c in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, VectorField) and self.coeffs == other.coeffs

    __hash__ = None

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for v in sorted(self.coeffs, key=lambda x: x.print_key()):
            parts.append(f"({self.coeffs[v]})*d/d{v}")
        return " + ".join(parts)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# manifolds


@dataclass(frozen=True)
class GraphForm:
    """``z_{n+mu} = u_mu + i*h_mu(z', conj(z'), u)`` on the manifold."""

    n: int
    d: int
    heights: Tuple[Poly, ...]

    def substitution(self) -> Dict[Variable, Poly]:
        sub = {}
        for mu, h in enumerate(self.heights, start=1):
            u = Poly.var(real_var("u", mu))
            sub[z(self.n + mu)] = u + h * I
            sub[zbar(self.n + mu)] = u - h * I
        return sub

    def reduce(self, f: Poly) -> Poly:
        """Restrict an ambient polynomial to the manifold (free coordinates)."""
        return f.substitute(self.substitution())

    def free_variables(self) -> List[Variable]:
        out = [z(j) for j in range(1, self.n + 1)]
        out += [real_var("u", mu) for mu in range(1, self.d + 1)]
        return out


class EmbeddedManifold:
    """Generic real submanifold ``{rho_1 = ... = rho_d = 0}`` of ``C^N``."""

    def __init__(self, defining: Sequence[Poly], N: Optional[int] = None, name: str = ""):
        self.defining: Tuple[Poly, ...] = tuple(defining)
        if not self.defining:
            raise GeometryError("at least one defining function is required")
        for rho in self.defining:
            if rho.conj() != rho:
                raise GeometryError(f"defining function is not real-valued: {rho}")
            bad = [v for v in rho.variables() if v.kind != "z"]
            if bad:
                raise GeometryError(f"defining functions may only use z variables, found {bad[0]}")
        used = max((v.index for rho in self.defining for v in rho.variables()), default=1)
        self.N = N if N is not None else used
        if used > self.N:
            raise GeometryError(f"defining functions use z{used} but N={self.N}")
        self.d = len(self.defining)
        self.n = self.N - self.d
        if self.n < 0:
            raise GeometryError("codimension exceeds ambient dimension")
        self.name = name
        self._graph = _detect_graph(self.defining, self.n, self.d)

    def __repr__(self) -> str:
        return f"EmbeddedManifold({[str(r) for r in self.defining]}, N={self.N})"

    @property
    def graph(self) -> Optional[GraphForm]:
        return self._graph

    def is_graph(self) -> bool:
        return self._graph is not None

    def require_graph(self) -> GraphForm:
        if self._graph is None:
            raise GeometryError("manifold is not in graph form rho_mu = c*Im z_{n+mu} + phi_mu")
        return self._graph

    def on_manifold(self, p: PointAssignment) -> bool:
        return all(rho.evaluate(p) == 0 for rho in self.defining)

    def check_point(self, p: PointAssignment) -> None:
        for mu, rho in enumerate(self.defining, start=1):
            val = rho.evaluate(p)
            if val != 0:
                raise OffManifoldError(f"point is off the manifold: rho_{mu}(p) = {val}")

    def graph_point(self, zs: Sequence, us: Sequence = None) -> PointAssignment:
        """On-manifold point from free coordinates ``z_1..z_n`` and ``u_1..u_d``."""
        g = self.require_graph()
        zs = [as_gaussian(x) for x in zs]
        us = [as_gaussian(x) for x in (us if us is not None else [0] * g.d)]
        if len(zs) != g.n or len(us) != g.d:
            raise GeometryError(f"expected {g.n} z-values and {g.d} u-values")
        free = {z(j + 1): x for j, x in enumerate(zs)}
        free.update({real_var("u", mu + 1): x for mu, x in enumerate(us)})
        fp = PointAssignment(free)
        vals = {z(j + 1): x for j, x in enumerate(zs)}
        for mu, h in enumerate(g.heights, start=1):
            vals[z(g.n + mu)] = us[mu - 1] + h.evaluate(fp) * I
        return PointAssignment(vals)

    def free_point(self, p: PointAssignment) -> PointAssignment:
        """Graph coordinates (z', u) of an ambient point."""
        g = self.require_graph()
        vals = {z(j): p[z(j)] for j in range(1, g.n + 1)}
        for mu in range(1, g.d + 1):
            vals[real_var("u", mu)] = GaussianRational(p[z(g.n + mu)].re)
        return PointAssignment(vals)

    def holomorphic_gradient(self, p: PointAssignment) -> List[List[GaussianRational]]:
        return [[rho.derive(z(j)).evaluate(p) for j in range(1, self.N + 1)] for rho in self.defining]

    def is_generic_at(self, p: PointAssignment) -> bool:
        return rank(self.holomorphic_gradient(p)) == self.d


def _detect_graph(defining, n, d) -> Optional[GraphForm]:
    sub = {}
    for mu in range(1, d + 1):
        u = Poly.var(real_var("u", mu))
        v = Poly.var(real_var("v", mu))
        sub[z(n + mu)] = u + v * I
        sub[zbar(n + mu)] = u - v * I
    vvars = {real_var("v", mu) for mu in range(1, d + 1)}
    heights = []
    for mu, rho in enumerate(defining, start=1):
        r = rho.substitute(sub)
        vmu = real_var("v", mu)
        coeff = r.derive(vmu)
        if not coeff.is_constant() or coeff.is_zero():
            return None
        rest = r - coeff * Poly.var(vmu)
        if rest.variables() & vvars:
            return None
        c = coeff.constant_term()
        if not c.is_real():
            return None
        heights.append(-rest / c)
    return GraphForm(n, d, tuple(heights))


class AbstractCRStructure:
    """CR structure given by explicit fields in coordinates ``(z, conj(z), s)``.

    Each field is ``d/dconj(z_i) + sum_j a_ij d/dz_j + sum_l b_il d/ds_l``.
    """

    def __init__(self, n: int, d: int, a=None, b=None, fields: Sequence[VectorField] = None):
        self.n = n
        self.d = d
        self.N = n
        if fields is not None:
            self.fields = list(fields)
        else:
            a = a or {}
            b = b or {}
            self.fields = []
            for i in range(1, n + 1):
                coeffs = {zbar(i): Poly.one()}
                for j in range(1, n + 1):
                    c = a.get((i, j))
                    if c is not None:
                        coeffs[z(j)] = c
                for l in range(1, d + 1):
                    c = b.get((i, l))
                    if c is not None:
                        coeffs[real_var("s", l)] = c
                self.fields.append(VectorField(coeffs))
        if len(self.fields) != n:
            raise GeometryError("need exactly n fields")

    def coordinates(self) -> List[Variable]:
        out = []
        for j in range(1, self.n + 1):
            out += [z(j), zbar(j)]
        out += [real_var("s", l) for l in range(1, self.d + 1)]
        return out


# ---------------------------------------------------------------------------
# CR basis


def _adjugate(m: List[List[Poly]]) -> List[List[Poly]]:
    k = len(m)
    if k == 1:
        return [[Poly.one()]]
    adj = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            minor = [[m[r][c] for c in range(k) if c != j] for r in range(k) if r != i]
            cof = poly_det(minor)
            adj[j][i] = cof if (i + j) % 2 == 0 else -cof
    return adj


def pivot_set(M: EmbeddedManifold, p: PointAssignment) -> Tuple[int, ...]:
    """Lexicographically last set of d indices with nonvanishing gradient minor at p."""
    grad = [[rho.derive(zbar(j)).evaluate(p) for j in range(1, M.N + 1)] for rho in M.defining]
    for cols in reversed(list(itertools.combinations(range(1, M.N + 1), M.d))):
        sub = [[row[c - 1] for c in cols] for row in grad]
        if rank(sub) == M.d:
            return cols
    raise GenericityError("defining gradients are linearly dependent at the point")


def cr_basis(M, p: Optional[PointAssignment] = None) -> List[VectorField]:
    """Basis of CR vector fields near ``p``.

    Embedded case: ``L_i = det(P) d/dconj(z_i) - sum_j (adj(P) r_i)_j d/dconj(z_j)``
    with ``P`` the gradient block on the pivot set; for d=1 this is
    ``rho_{conj z_N} d/dconj(z_i) - rho_{conj z_i} d/dconj(z_N)``.
    """
    if isinstance(M, AbstractCRStructure):
        return list(M.fields)
    if p is None:
        p = _origin_or_fail(M)
    M.check_point(p)
    if not M.is_generic_at(p):
        raise GenericityError("holomorphic gradients are dependent at the point")
    piv = pivot_set(M, p)
    P = [[rho.derive(zbar(j)) for j in piv] for rho in M.defining]
    adj = _adjugate(P)
    detP = poly_det(P) if M.d > 1 else P[0][0]
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


def _origin_or_fail(M: EmbeddedManifold) -> PointAssignment:
    p = PointAssignment({z(j): 0 for j in range(1, M.N + 1)})
    M.check_point(p)
    return p


def involutivity_check(S) -> Tuple[bool, Optional[dict]]:
    """Closedness of the span of the fields under commutators.

    Returns ``(True, None)`` or ``(False, {"pair": (i, j), "commutator": C})``.
    """
    fields = S if isinstance(S, (list, tuple)) else cr_basis(S, _default_point(S))
    vars_ = sorted(set().union(*(f.variables() for f in fields)) if fields else set())
    for i, j in itertools.combinations(range(len(fields)), 2):
        c = fields[i].bracket(fields[j])
        if c.is_zero():
            continue
        allv = sorted(set(vars_) | c.variables())
        rows = [[f.coeffs.get(v, Poly.zero()) for v in allv] for f in fields]
        r0 = poly_rank(rows)
        r1 = poly_rank(rows + [[c.coeffs.get(v, Poly.zero()) for v in allv]])
        if r1 > r0:
            return False, {"pair": (i + 1, j + 1), "commutator": c}
    return True, None


def _default_point(S):
    if isinstance(S, EmbeddedManifold):
        return _origin_or_fail(S)
    return None


# ---------------------------------------------------------------------------
# covectors and the Levi form


class Covector:
    """Real covector ``sum a_k dz_k + conj(a_k) dconj(z_k) + sum c_l dx_l``.

    ``hol`` maps base z-variables to ``a_k``; ``real`` maps real variables to
    real coefficients.
    """

    __slots__ = ("hol", "real", "point")

    def __init__(self, hol: Dict[Variable, GaussianRational] = None,
                 real: Dict[Variable, GaussianRational] = None,
                 point: Optional[PointAssignment] = None):
        self.hol = {v: as_gaussian(c) for v, c in (hol or {}).items() if c != 0}
        self.real = {v: as_gaussian(c) for v, c in (real or {}).items() if c != 0}
        for v, c in self.real.items():
            if not c.is_real():
                raise GeometryError("real-variable covector coefficients must be real")
        self.point = point

    def coefficient(self, v: Variable) -> GaussianRational:
        if v.is_real:
            return self.real.get(v, ZERO)
        a = self.hol.get(v.base, ZERO)
        return a.conjugate() if v.conj else a

    def pair(self, X: VectorField, p: Optional[PointAssignment] = None) -> GaussianRational:
        p = p or self.point
        total = ZERO
        for v, c in X.coeffs.items():
            k = self.coefficient(v)
            if k:
                total = total + k * c.evaluate(p)
        return total

    def scale(self, lam) -> "Covector":
        lam = as_gaussian(lam)
        if not lam.is_real():
            raise GeometryError("covectors scale by real numbers only")
        return Covector({v: c * lam for v, c in self.hol.items()},
                        {v: c * lam for v, c in self.real.items()}, self.point)

    def __neg__(self) -> "Covector":
        return self.scale(-1)

    def __add__(self, other: "Covector") -> "Covector":
        hol = dict(self.hol)
        for v, c in other.hol.items():
            hol[v] = hol.get(v, ZERO) + c
        real = dict(self.real)
        for v, c in other.real.items():
            real[v] = real.get(v, ZERO) + c
        return Covector(hol, real, self.point)

    def __eq__(self, other) -> bool:
        return isinstance(other, Covector) and self.hol == other.hol and self.real == other.real

    __hash__ = None

    def equivalent(self, other: "Covector", conormals: Sequence["Covector"]) -> bool:
        """Equal modulo the real span of ``conormals``."""
        diff = self + (-other)
        keys = sorted(set(diff.hol) | set().union(*(c.hol for c in conormals)) if conormals else set(diff.hol))
        rkeys = sorted(set(diff.real) | set().union(*(c.real for c in conormals)) if conormals else set(diff.real))

        def vec(c):
            out = []
            for k in keys:
                a = c.hol.get(k, ZERO)
                out += [GaussianRational(a.re), GaussianRational(a.im)]
            out += [c.real.get(k, ZERO) for k in rkeys]
            return out
        base = [vec(c) for c in conormals]
        r0 = rank(base) if base else 0
        return rank(base + [vec(diff)]) == r0

    def to_json(self):
        return {
            "dz": {str(v): c.to_json() for v, c in sorted(self.hol.items(), key=lambda t: t[0].print_key())},
            "dreal": {str(v): str(c.re) for v, c in sorted(self.real.items(), key=lambda t: t[0].print_key())},
        }

    def __repr__(self) -> str:
        parts = [f"({c})*d{v}" for v, c in sorted(self.hol.items(), key=lambda t: t[0].print_key())]
        parts += [f"({c})*d{v}" for v, c in sorted(self.real.items(), key=lambda t: t[0].print_key())]
        return "Covector(" + (" + ".join(parts) or "0") + " + c.c.)"


def conormals(M: EmbeddedManifold, p: PointAssignment) -> List[Covector]:
    """``d rho_mu(p)`` as real covectors."""
    out = []
    for rho in M.defining:
        out.append(Covector({z(j): rho.derive(z(j)).evaluate(p) for j in range(1, M.N + 1)}, None, p))
    return out


def characteristic_space(M, p: Optional[PointAssignment] = None) -> List[Covector]:
    """Basis of the characteristic covectors at ``p``.

    Embedded: ``theta_mu = -i d'rho_mu + i d''rho_mu`` (equal to ``du`` for
    the Heisenberg hypersurface at 0).  Abstract: real kernel of the pairing
    with ``L_i(p)``.
    """
    if isinstance(M, AbstractCRStructure):
        return _abstract_characteristic(M, p)
    if p is None:
        p = _origin_or_fail(M)
    M.check_point(p)
    out = []
    for rho in M.defining:
        hol = {z(j): -I * rho.derive(z(j)).evaluate(p) for j in range(1, M.N + 1)}
        out.append(Covector(hol, None, p))
    return out


def _abstract_characteristic(S: AbstractCRStructure, p: Optional[PointAssignment]) -> List[Covector]:
    if p is None:
        p = PointAssignment({v.base: 0 for v in S.coordinates()})
    zs = [z(j) for j in range(1, S.n + 1)]
    ss = [real_var("s", l) for l in range(1, S.d + 1)]
    # unknowns: Re a_k, Im a_k for each z_k, then c_l
    rows = []
    for L in S.fields:
        vals = L.at(p)
        re_row, im_row = [], []
        for v in zs:
            cz = vals.get(v, ZERO)           # pairs with a_k
            cb = vals.get(v.conjugate(), ZERO)  # pairs with conj(a_k)
            # a*cz + conj(a)*cb with a = x + i y
            re_part_x = cz + cb
            re_part_y = (cz - cb) * I
            re_row += [re_part_x.re, re_part_y.re]
            im_row += [re_part_x.im, re_part_y.im]
        for v in ss:
            c = vals.get(v, ZERO)
            re_row.append(c.re)
            im_row.append(c.im)
        rows += [re_row, im_row]
    basis = nullspace([[GaussianRational(x) for x in r] for r in rows], None)
    out = []
    for vec in basis:
        hol = {}
        for k, v in enumerate(zs):
            hol[v] = GaussianRational(vec[2 * k].re, vec[2 * k + 1].re)
        real = {v: vec[2 * len(zs) + l] for l, v in enumerate(ss)}
        out.append(Covector(hol, real, p))
    return out


@dataclass
class LeviMatrix:
    entries: List[List[GaussianRational]]
    basis: List[VectorField] = field(default_factory=list, repr=False)

    def is_hermitian(self) -> bool:
        n = len(self.entries)
        return all(self.entries[i][j] == self.entries[j][i].conjugate()
                   for i in range(n) for j in range(n))

    def to_json(self):
        return [[x.to_json() for x in r] for r in self.entries]


def levi_form(M, p: Optional[PointAssignment], sigma: Covector) -> LeviMatrix:
    """``(1/2i) <sigma, [L_i, conj(L_j)](p)>`` for the CR basis at ``p``."""
    if isinstance(M, EmbeddedManifold) and p is None:
        p = _origin_or_fail(M)
    if p is None:
        p = PointAssignment({v.base: 0 for v in M.coordinates()})
    if isinstance(M, EmbeddedManifold):
        M.check_point(p)
    basis = cr_basis(M, p)
    for k, L in enumerate(basis, start=1):
        if sigma.pair(L, p) != 0 or sigma.pair(L.conj(), p) != 0:
            raise NonCharacteristicError(f"covector does not annihilate L_{k}(p)")
    factor = (2 * I).inverse()
    n = len(basis)
    bars = [L.conj() for L in basis]
    ent = [[factor * sigma.pair(basis[i].bracket(bars[j]), p) for j in range(n)] for i in range(n)]
    out = LeviMatrix(ent, basis)
    if not out.is_hermitian():
        raise GeometryError("Levi matrix is not Hermitian; basis fields are not tangent")
    return out


def hermitian_inertia(H: Sequence[Sequence[GaussianRational]]) -> Tuple[int, int, int]:
    """Exact (positive, negative, zero) counts by congruence reduction."""
    m = [[as_gaussian(x) for x in r] for r in H]
    n = len(m)
    for i in range(n):
        for j in range(n):
            if m[i][j] != m[j][i].conjugate():
                raise ValueError("matrix is not Hermitian")
    pos = neg = 0
    while m:
        k = next((i for i in range(len(m)) if m[i][i]), None)
        if k is not None:
            piv = m[k][k]
            if piv.re > 0:
                pos += 1
            else:
                neg += 1
            inv = piv.inverse()
            rest = [i for i in range(len(m)) if i != k]
            m = [[m[i][j] - m[i][k] * inv * m[k][j] for j in rest] for i in rest]
            continue
        pair = next(((i, j) for i in range(len(m)) for j in range(i + 1, len(m)) if m[i][j]), None)
        if pair is None:
            break
        i0, j0 = pair
        b = m[i0][j0]
        # [[0, b], [conj b, 0]] has inertia (1, 1); its inverse is [[0, 1/conj b], [1/b, 0]]
        pos += 1
        neg += 1
        binv = [[ZERO, b.conjugate().inverse()], [b.inverse(), ZERO]]
        blk = (i0, j0)
        rest = [i for i in range(len(m)) if i not in blk]
        new = []
        for i in rest:
            row = []
            for j in rest:
                s = m[i][j]
                for a in range(2):
                    for c in range(2):
                        if binv[a][c]:
                            s = s - m[i][blk[a]] * binv[a][c] * m[blk[c]][j]
                row.append(s)
            new.append(row)
        m = new
    zero = n - pos - neg
    return pos, neg, zero


def signature(H) -> Tuple[int, int, int]:
    entries = H.entries if isinstance(H, LeviMatrix) else H
    return hermitian_inertia(entries)
