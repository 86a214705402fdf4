"""Numerical FBI transform on gridded samples and directional decay classification.

The transform of ``u`` at probe ``x`` and frequency ``zeta`` is

    F(x, zeta) = int exp(i zeta.(x - y) - K |zeta| |x - y|^2) eta(y) u(y) dy

evaluated by tensor-product trapezoid quadrature.  Decay along a ray
``zeta = lam * d`` is judged from the L2-normalized magnitude
``|F| (K lam / pi)^(D/4)`` (D = number of variables), so that a jump across a
hyperplane decays like ``lam^-1`` in the conormal direction.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import nnls

__all__ = [
    "SampledFunction", "Cutoff", "DecayProfile", "ConeReport", "FBIError",
    "fbi_transform", "decay_profile", "cone_report", "sample_generator",
    "load_samples", "default_scales", "unit_directions", "levi_prediction",
    "ABSOLUTE_FLOOR",
]

ABSOLUTE_FLOOR = 1e-300
RAPID, SLOW, INCONCLUSIVE = "rapid-decay", "slow/no-decay", "inconclusive"


class FBIError(ValueError):
    pass


@dataclass
class SampledFunction:
    """Complex samples on a uniform box grid; ``axes[k] = (min, max, count)``."""

    axes: List[Tuple[float, float, int]]
    values: np.ndarray

    def __post_init__(self):
        self.axes = [(float(a), float(b), int(c)) for a, b, c in self.axes]
        shape = tuple(c for _, _, c in self.axes)
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != math.prod(shape):
            raise FBIError(f"{vals.size} samples do not fill a grid of shape {shape}")
        self.values = vals.reshape(shape)
        for a, b, c in self.axes:
            if c < 2 or not b > a:
                raise FBIError("each axis needs max > min and at least 2 samples")

    @property
    def dim(self) -> int:
        return len(self.axes)

    def grid(self, k: int) -> np.ndarray:
        a, b, c = self.axes[k]
        return np.linspace(a, b, c)

    def spacing(self) -> List[float]:
        return [(b - a) / (c - 1) for a, b, c in self.axes]

    def contains(self, x: Sequence[float]) -> bool:
        return all(a <= xi <= b for (a, b, _), xi in zip(self.axes, x))

    def coarsened(self) -> "SampledFunction":
        """Every other sample along each axis (the endpoints must survive)."""
        for _, _, c in self.axes:
            if c % 2 == 0:
                raise FBIError("coarsening needs an odd sample count on every axis")
        sl = tuple(slice(None, None, 2) for _ in self.axes)
        return SampledFunction([(a, b, (c + 1) // 2) for a, b, c in self.axes], self.values[sl])

    def shifted(self, offset: Sequence[float]) -> "SampledFunction":
        return SampledFunction([(a + o, b + o, c) for (a, b, c), o in zip(self.axes, offset)], self.values)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        if self.axes != other.axes:
            raise FBIError("grids differ")
        return SampledFunction(self.axes, self.values + other.values)

    def scale(self, c: complex) -> "SampledFunction":
        return SampledFunction(self.axes, self.values * c)

    def to_json(self):
        flat = self.values.ravel()
        return {"axes": [list(a) for a in self.axes],
                "samples": [{"re": float(x.real), "im": float(x.imag)} for x in flat]}


def _smooth_step(s: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        g = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return f / (f + g)


@dataclass(frozen=True)
class Cutoff:
    """Radial bump: 1 on ``|y - center| <= r``, 0 beyond ``sqrt(2) r``."""

    r: float
    center: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if not self.r > 0:
            raise FBIError("cutoff radius must be positive")

    @property
    def outer(self) -> float:
        return math.sqrt(2.0) * self.r

    def values(self, u: SampledFunction, center: Sequence[float]) -> np.ndarray:
        grids = np.meshgrid(*[u.grid(k) - c for k, c in enumerate(center)], indexing="ij")
        rad2 = sum(g * g for g in grids)
        # smooth in |y|^2 between r^2 and 2 r^2
        return 1.0 - _smooth_step((rad2 - self.r ** 2) / (self.r ** 2))


def _trapezoid_weights(a: float, b: float, c: int) -> np.ndarray:
    w = np.full(c, (b - a) / (c - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _cutoff_center(u: SampledFunction, eta: Cutoff, probe) -> Tuple[float, ...]:
    return tuple(eta.center) if eta.center is not None else tuple(probe)


def _check(u: SampledFunction, eta: Cutoff, probe, K: float):
    probe = tuple(float(x) for x in probe)
    if len(probe) != u.dim:
        raise FBIError(f"probe has {len(probe)} coordinates, samples have {u.dim}")
    if not u.contains(probe):
        raise FBIError("probe point lies outside the sample grid")
    if not K > 0:
        raise FBIError("K must be positive")
    center = _cutoff_center(u, eta, probe)
    if math.dist(center, probe) > eta.r:
        raise FBIError("probe point is outside the region where the cutoff equals 1")
    for (a, b, _), c in zip(u.axes, center):
        if c - eta.outer < a - 1e-12 or c + eta.outer > b + 1e-12:
            raise FBIError("cutoff support is not contained in the sample box")
    return probe, center


def fbi_transform(u: SampledFunction, eta: Cutoff, probe: Sequence[float], frequency: Sequence[float],
                  K: float = 1.0, _weighted: Optional[np.ndarray] = None) -> complex:
    """Trapezoid quadrature of the FBI integral; separable in each axis."""
    probe, center = _check(u, eta, probe, K)
    freq = np.asarray(frequency, dtype=float)
    if freq.shape != (u.dim,):
        raise FBIError("frequency has the wrong dimension")
    W = _weighted if _weighted is not None else eta.values(u, center) * u.values
    mod = float(np.linalg.norm(freq))
    acc = W
    # contract the last axis repeatedly
    for k in reversed(range(u.dim)):
        a, b, c = u.axes[k]
        d = probe[k] - u.grid(k)
        kern = np.exp(1j * freq[k] * d - K * mod * d * d) * _trapezoid_weights(a, b, c)
        acc = acc @ kern
    return complex(acc)


def default_scales() -> List[float]:
    return [4.0 * 2 ** j for j in range(7)]


@dataclass
class DecayProfile:
    direction: Tuple[float, ...]
    scales: List[float]
    magnitudes: List[float]          # normalized |F|
    floors: List[float]              # quadrature resolution estimate per scale
    used: List[bool]
    exp_rate: Optional[float]
    exp_residual: Optional[float]
    poly_order: Optional[float]
    poly_residual: Optional[float]
    classification: str
    floor_flag: bool = False
    thresholds: Dict[str, float] = field(default_factory=dict)

    def to_json(self):
        return {
            "direction": list(self.direction), "scales": self.scales,
            "magnitudes": self.magnitudes, "floors": self.floors, "used": self.used,
            "fit": {"exponential_rate": self.exp_rate, "exponential_residual": self.exp_residual,
                    "polynomial_order": self.poly_order, "polynomial_residual": self.poly_residual},
            "classification": self.classification, "floor_flag": self.floor_flag,
            "thresholds": self.thresholds,
        }


def _fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Least squares ``y ~ c + s x``: (slope, residual sum of squares)."""
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sum((A @ coef - y) ** 2))
    return float(coef[1]), res


def classify(scales, mags, floors, rapid_order: float = 6.0, slow_order: float = 2.0,
             floor_factor: float = 4.0):
    """Deterministic verdict from sampled magnitudes.

    Samples not clearly above their quadrature floor are dropped; decay
    into the floor counts as evidence of rapid decay.
    """
    scales = np.asarray(scales, dtype=float)
    mags = np.asarray(mags, dtype=float)
    floors = np.asarray(floors, dtype=float)
    used = (mags > ABSOLUTE_FLOOR) & (mags > floor_factor * floors)
    # once a sample sinks into the floor, later ones are not trusted either
    if not used.all():
        first = int(np.argmin(used))
        used[first:] = False
    out = dict(used=used.tolist(), exp_rate=None, exp_residual=None, poly_order=None,
               poly_residual=None, floor_flag=not used.all())
    if used.sum() < 3:
        out["classification"] = RAPID if out["floor_flag"] else INCONCLUSIVE
        return out
    lx, ly = scales[used], np.log(mags[used])
    rate, r_exp = _fit(lx, ly)
    slope, r_poly = _fit(np.log(lx), ly)
    rate, order = -rate, -slope
    out.update(exp_rate=rate, exp_residual=r_exp, poly_order=order, poly_residual=r_poly)
    if (r_exp < r_poly and rate > 0 and order > slow_order) or order >= rapid_order:
        verdict = RAPID
    elif order <= slow_order:
        verdict = SLOW
    elif out["floor_flag"]:
        verdict = RAPID
    else:
        verdict = INCONCLUSIVE
    out["classification"] = verdict
    return out


def _normalize(val: complex, lam: float, K: float, dim: int) -> float:
    return abs(val) * (K * lam / math.pi) ** (dim / 4.0)


def _profile_values(u, coarse, W, Wc, eta, probe, direction, scales, K):
    mags, floors = [], []
    for lam in scales:
        freq = lam * direction
        f = fbi_transform(u, eta, probe, freq, K, _weighted=W)
        if coarse is not None:
            fc = fbi_transform(coarse, eta, probe, freq, K, _weighted=Wc)
            fl = abs(f - fc)
        else:
            fl = 0.0
        mags.append(_normalize(f, lam, K, u.dim))
        floors.append(_normalize(fl, lam, K, u.dim) if fl else 0.0)
    return mags, floors


def _prepare(u, eta, probe):
    probe, center = _check(u, eta, probe, 1.0)
    W = eta.values(u, center) * u.values
    try:
        coarse = u.coarsened()
        Wc = eta.values(coarse, center) * coarse.values
    except FBIError:
        coarse, Wc = None, None
    return probe, W, coarse, Wc


def decay_profile(u: SampledFunction, eta: Cutoff, probe: Sequence[float], direction: Sequence[float],
                  scales: Optional[Sequence[float]] = None, K: float = 1.0, rapid_order: float = 6.0,
                  slow_order: float = 2.0, _prepared=None) -> DecayProfile:
    scales = [float(s) for s in (scales if scales is not None else default_scales())]
    if len(scales) < 6 or any(b <= a for a, b in zip(scales, scales[1:])) or scales[0] <= 0:
        raise FBIError("scales must be positive, increasing, and at least 6 of them")
    if not K > 0:
        raise FBIError("K must be positive")
    d = np.asarray(direction, dtype=float)
    nd = np.linalg.norm(d)
    if nd == 0:
        raise FBIError("direction must be nonzero")
    d = d / nd
    probe, W, coarse, Wc = _prepared or _prepare(u, eta, probe)
    mags, floors = _profile_values(u, coarse, W, Wc, eta, probe, d, scales, K)
    c = classify(scales, mags, floors, rapid_order, slow_order)
    return DecayProfile(direction=tuple(float(x) for x in d), scales=scales, magnitudes=mags, floors=floors,
                        used=c["used"], exp_rate=c["exp_rate"], exp_residual=c["exp_residual"],
                        poly_order=c["poly_order"], poly_residual=c["poly_residual"],
                        classification=c["classification"], floor_flag=c["floor_flag"],
                        thresholds={"rapid_order": rapid_order, "slow_order": slow_order, "K": K})


def unit_directions(dim: int, count: int) -> List[Tuple[float, ...]]:
    """Evenly spaced directions: a circle for dim 2, a Fibonacci sphere otherwise."""
    if dim == 1:
        return [(1.0,), (-1.0,)]
    if dim == 2:
        return [(math.cos(2 * math.pi * k / count), math.sin(2 * math.pi * k / count)) for k in range(count)]
    if dim == 3:
        golden = math.pi * (3 - math.sqrt(5))
        out = []
        for k in range(count):
            zc = 1 - 2 * (k + 0.5) / count
            rr = math.sqrt(1 - zc * zc)
            out.append((rr * math.cos(golden * k), rr * math.sin(golden * k), zc))
        return out
    rng = np.random.default_rng(0)
    out = []
    for _ in range(count):
        v = rng.standard_normal(dim)
        out.append(tuple(float(x) for x in v / np.linalg.norm(v)))
    return out


@dataclass
class ConeReport:
    directions: List[Tuple[float, ...]]
    profiles: List[DecayProfile]
    generators: List[Tuple[float, ...]]
    levi_check: Optional[dict] = None

    @property
    def classifications(self) -> List[str]:
        return [p.classification for p in self.profiles]

    def contains(self, direction: Sequence[float], tol: float = 1e-9) -> bool:
        """Is ``direction`` in the closed convex cone spanned by the generators?"""
        if not self.generators:
            return False
        G = np.array(self.generators, dtype=float).T
        d = np.asarray(direction, dtype=float)
        _, res = nnls(G, d)
        return res <= tol * max(1.0, np.linalg.norm(d))

    def is_empty(self) -> bool:
        return not self.generators

    def to_json(self):
        return {
            "directions": [list(d) for d in self.directions],
            "classifications": self.classifications,
            "cone_generators": [list(g) for g in self.generators],
            "profiles": [p.to_json() for p in self.profiles],
            "levi_check": self.levi_check,
        }


def _threads(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    import os
    env = os.environ.get("CRLAB_THREADS")
    return max(1, int(env)) if env else 1


def cone_report(u: SampledFunction, eta: Cutoff, probe: Sequence[float], directions: Sequence[Sequence[float]],
                scales: Optional[Sequence[float]] = None, K: float = 1.0, manifold=None, point=None,
                threads: Optional[int] = None, **kw) -> ConeReport:
    """Classify every direction and span the cone of slow directions.

    With ``manifold`` (an embedded graph manifold whose real coordinates are
    ordered ``x_1, y_1, ..., x_n, y_n, u_1, ..., u_d``) each slow direction is
    checked against the Levi-form prediction.
    """
    prepared = _prepare(u, eta, probe)
    dirs = [tuple(float(x) for x in d) for d in directions]

    def one(d):
        return decay_profile(u, eta, probe, d, scales, K, _prepared=prepared, **kw)

    with ThreadPoolExecutor(max_workers=_threads(threads)) as ex:
        profiles = list(ex.map(one, dirs))
    gens = [p.direction for p in profiles if p.classification == SLOW]
    rep = ConeReport(directions=[p.direction for p in profiles], profiles=profiles, generators=gens)
    if manifold is None:
        rep.levi_check = {"applicable": False, "reason": "no manifold supplied"}
    else:
        preds = [levi_prediction(manifold, point, p.direction) for p in profiles]
        bad = [list(p.direction) for p, pr in zip(profiles, preds)
               if p.classification == SLOW and pr["excluded"]]
        rep.levi_check = {"applicable": True, "predictions": preds, "violations": bad,
                          "consistent": not bad}
    return rep


def _tangent_pullback(M, p, theta) -> np.ndarray:
    """Real coefficients of ``theta`` restricted to M in graph coordinates."""
    from .gaussian import I
    from .poly import Poly, real_var, z, zbar
    g = M.require_graph()
    n, d = M.n, M.d
    Z = [Poly.var(z(k)) for k in range(1, n + 1)]
    Z += [Poly.var(real_var("u", mu)) + I * g.heights[mu - 1] for mu in range(1, d + 1)]
    fp = M.free_point(p)
    out = []
    for k in range(1, n + 1):
        for part in ("x", "y"):
            tot = 0j
            for j, Zj in enumerate(Z, start=1):
                a = complex(theta.coefficient(z(j)))
                dz = Zj.derive(z(k))
                dzb = Zj.derive(zbar(k))
                der = dz + dzb if part == "x" else (dz - dzb) * I
                tot += a * complex(der.evaluate(fp))
            out.append(2 * tot.real)
    for mu in range(1, d + 1):
        tot = 0j
        for j, Zj in enumerate(Z, start=1):
            a = complex(theta.coefficient(z(j)))
            tot += a * complex(Zj.derive(real_var("u", mu)).evaluate(fp))
        out.append(2 * tot.real)
    return np.array(out)


def levi_prediction(M, p, direction: Sequence[float]) -> dict:
    """Is ``direction`` excluded from the wave front set by the Levi form?

    Non-characteristic directions are excluded outright; a characteristic
    direction is excluded when the Levi form there has a negative eigenvalue.
    """
    from .geometry import characteristic_space, levi_form, signature
    if p is None:
        p = M.graph_point([0] * M.n, [0] * M.d)
    basis = characteristic_space(M, p)
    P = np.array([_tangent_pullback(M, p, th) for th in basis]).T
    d = np.asarray(direction, dtype=float)
    coef, *_ = np.linalg.lstsq(P, d, rcond=None)
    if np.linalg.norm(P @ coef - d) > 1e-8:
        return {"direction": [float(x) for x in d], "characteristic": False, "excluded": True, "signature": None}
    sigma = None
    for c, th in zip(coef, basis):
        term = th.scale(Fraction(float(c)).limit_denominator(10 ** 9))
        sigma = term if sigma is None else sigma + term
    sig = signature(levi_form(M, p, sigma))
    return {"direction": [float(x) for x in d], "characteristic": True, "excluded": sig[1] > 0, "signature": list(sig)}


# -- sample generators and file input ---------------------------------------------

def _grid(axes):
    return np.meshgrid(*[np.linspace(a, b, c) for a, b, c in axes], indexing="ij")


def _bump(r2):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(r2 < 1, np.exp(-1.0 / np.where(r2 < 1, 1 - r2, 1.0)), 0.0)


def sample_generator(name: str, axes, **params) -> SampledFunction:
    """Built-in test functions sampled on ``axes``."""
    axes = [(float(a), float(b), int(c)) for a, b, c in axes]
    X = _grid(axes)
    dim = len(axes)
    center = np.asarray(params.get("center", [0.0] * dim), dtype=float)
    if name == "zero":
        vals = np.zeros(X[0].shape, dtype=complex)
    elif name == "gaussian":
        width = float(params.get("width", 0.5))
        r2 = sum((x - c) ** 2 for x, c in zip(X, center))
        vals = np.exp(-r2 / (2 * width ** 2)).astype(complex)
    elif name == "bump":
        radius = float(params.get("radius", 0.5))
        r2 = sum((x - c) ** 2 for x, c in zip(X, center)) / radius ** 2
        vals = _bump(r2).astype(complex)
    elif name == "plane_wave":
        omega = np.asarray(params["omega"], dtype=float)
        vals = np.exp(1j * sum(o * x for o, x in zip(omega, X)))
    elif name == "heaviside":
        axis = int(params.get("axis", dim - 1))
        t = X[axis] - center[axis]
        vals = np.where(t > 0, 1.0, np.where(t < 0, 0.0, 0.5)).astype(complex)
    elif name == "heisenberg_sqrt":
        if dim % 2 != 1:
            raise FBIError("heisenberg_sqrt needs coordinates (x_1, y_1, ..., t)")
        Xc = [x - c for x, c in zip(X, center)]
        r2 = sum(x * x for x in Xc[:-1])
        vals = np.sqrt(Xc[-1] + 1j * r2)
    else:
        raise FBIError(f"unknown generator {name!r}")
    return SampledFunction(axes, vals)


def load_samples(source) -> SampledFunction:
    """From a path, a JSON string, or a parsed dict.

    Either ``{"axes": [[min, max, count], ...], "samples": [{"re", "im"}, ...]}``
    or ``{"generator": name, "axes": ..., "params": {...}}``.
    """
    if isinstance(source, str):
        if source.lstrip().startswith("{"):
            doc = json.loads(source)
        else:
            with open(source) as fh:
                doc = json.load(fh)
    else:
        doc = source
    if "axes" not in doc:
        raise FBIError("sample document needs 'axes'")
    if "generator" in doc:
        return sample_generator(doc["generator"], doc["axes"], **doc.get("params", {}))
    samples = doc.get("samples")
    if samples is None:
        raise FBIError("sample document needs 'samples' or 'generator'")
    vals = [complex(s["re"], s.get("im", 0.0)) if isinstance(s, dict) else complex(s) for s in samples]
    return SampledFunction(doc["axes"], np.array(vals))
