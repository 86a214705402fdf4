"""Manifest-driven command line front end (``crlab``).

A manifest is JSON with named ``manifolds``, ``maps`` and ``points`` plus an
ordered ``tasks`` list.  Polynomials are strings in the exact grammar, so
rationals never pass through floats.  Exit codes: 0 success, 1 some task
failed, 2 manifest/schema error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .gaussian import GaussianRational, as_gaussian
from .geometry import (
    AbstractCRStructure, Covector, EmbeddedManifold, GeometryError, LeviMatrix, VectorField,
    characteristic_space, cr_basis, involutivity_check, levi_form, signature,
)
from .parser import PolySyntaxError, VariableContext, parse_poly
from .poly import PointAssignment, Poly, RationalExpr, Variable

EXIT_OK, EXIT_FAILED, EXIT_SCHEMA, EXIT_INTERNAL = 0, 1, 2, 3


class ManifestError(ValueError):
    """Schema violation or unresolved reference."""


# -- JSON conversion ---------------------------------------------------------------

def to_jsonable(obj: Any) -> Any:
    """Exact values become strings ("a/b"), complex values ``{re, im}``."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, GaussianRational):
        return str(obj.re) if obj.is_real() else obj.to_json()
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, Poly):
        return str(obj)
    if isinstance(obj, RationalExpr):
        return {"num": str(obj.num), "den": str(obj.den)}
    if isinstance(obj, Variable):
        return str(obj)
    if isinstance(obj, PointAssignment):
        return {str(v): to_jsonable(x) for v, x in obj.items()}
    if isinstance(obj, VectorField):
        return str(obj)
    if isinstance(obj, (Covector, LeviMatrix)):
        return obj.to_json()
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {(",".join(str(x) for x in k) if isinstance(k, tuple) else str(k)): to_jsonable(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2)


# -- manifest parsing --------------------------------------------------------------

MANIFEST_SCHEMA = {
    "type": "object",
    "properties": {
        "seed": {"type": "integer"},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
        "variables": {"type": "object"},
        "manifolds": {"type": "object", "additionalProperties": {
            "type": "object",
            "properties": {
                "defining": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "N": {"type": "integer", "minimum": 1},
                "abstract": {"type": "object", "required": ["n", "d"]},
            },
        }},
        "maps": {"type": "object", "additionalProperties": {
            "type": "object",
            "required": ["source", "target", "components"],
            "properties": {"components": {"type": "array", "items": {"type": "string"}}},
        }},
        "points": {"type": "object", "additionalProperties": {
            "type": "object", "required": ["manifold"],
        }},
        "tasks": {"type": "array", "items": {
            "type": "object", "required": ["op"], "properties": {"op": {"type": "string"}},
        }},
    },
    "additionalProperties": True,
}


def _validate_schema(doc):
    import jsonschema
    try:
        jsonschema.validate(doc, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ManifestError(f"schema violation at {loc}: {exc.message}") from None


def _parse(text, where: str, context: Optional[VariableContext] = None) -> Poly:
    if not isinstance(text, str):
        text = str(text)
    try:
        return parse_poly(text, context)
    except PolySyntaxError as exc:
        raise ManifestError(f"{where}: {exc.message} at line {exc.line}, column {exc.column}") from None


def _constant(text, where: str) -> GaussianRational:
    if isinstance(text, (int, Fraction)):
        return as_gaussian(text)
    p = _parse(text, where, VariableContext(z=0, w=0, s=0, u=0, t=0))
    return p.constant_term()


def _rename_w(p: Poly) -> Poly:
    kinds = {v.kind for v in p.variables()}
    if "w" in kinds and "z" in kinds:
        raise ManifestError("a defining function mixes z and w variables")
    sub = {v: Poly.var(Variable("z", v.index, v.conj)) for v in p.variables() if v.kind == "w"}
    return p.substitute(sub) if sub else p


class Context:
    """Resolved manifest objects."""

    def __init__(self, doc: dict, seed: Optional[int] = None):
        _validate_schema(doc)
        self.doc = doc
        self.seed = seed if seed is not None else int(doc.get("seed", 0))
        self.tolerances = dict(doc.get("tolerances", {}))
        self.manifolds: Dict[str, Any] = {}
        self.maps: Dict[str, Any] = {}
        self.points: Dict[str, PointAssignment] = {}
        self.point_manifold: Dict[str, str] = {}
        self._echo: Dict[str, List[str]] = {}
        for name, spec in doc.get("manifolds", {}).items():
            self.manifolds[name] = self._manifold(name, spec)
        for name, spec in doc.get("maps", {}).items():
            self.maps[name] = self._map(name, spec)
        for name, spec in doc.get("points", {}).items():
            self.points[name] = self._point(name, spec)
        self.tasks = list(doc.get("tasks", []))
        for k, task in enumerate(self.tasks):
            self._check_refs(k, task)

    def _check_refs(self, k, task):
        if task["op"] not in OPS:
            raise ManifestError(f"tasks[{k}]: unknown op {task['op']!r}")
        for key, table in (("manifold", self.manifolds), ("map", self.maps), ("point", self.points)):
            name = task.get(key)
            if name is not None and name not in table:
                raise ManifestError(f"tasks[{k}]: unknown {key} {name!r}")
        for name in task.get("points", []):
            if name not in self.points:
                raise ManifestError(f"tasks[{k}]: unknown point {name!r}")

    def echo(self) -> dict:
        """Parse-normalized polynomials of every declared object."""
        out = {"manifolds": {}, "maps": {}}
        for name, M in self.manifolds.items():
            if name in self._echo:
                out["manifolds"][name] = self._echo[name]
            else:
                out["manifolds"][name] = [str(L) for L in M.fields]
        for name, F in self.maps.items():
            out["maps"][name] = [str(h) for h in F.components]
        return out

    def _manifold(self, name, spec):
        try:
            if "abstract" in spec:
                ab = spec["abstract"]
                n, d = int(ab["n"]), int(ab["d"])
                ctx = VariableContext(z=n, w=0, s=d, u=0, t=0)
                a = {_pair(k): _parse(v, f"manifolds.{name}.abstract.a[{k}]", ctx) for k, v in ab.get("a", {}).items()}
                b = {_pair(k): _parse(v, f"manifolds.{name}.abstract.b[{k}]", ctx) for k, v in ab.get("b", {}).items()}
                return AbstractCRStructure(n, d, a, b)
            if "defining" not in spec:
                raise ManifestError(f"manifold {name!r} needs 'defining' or 'abstract'")
            raw = [_parse(t, f"manifolds.{name}.defining[{k}]", VariableContext(s=0, u=0, t=0))
                   for k, t in enumerate(spec["defining"])]
            self._echo[name] = [str(r) for r in raw]
            rhos = [_rename_w(r) for r in raw]
            return EmbeddedManifold(rhos, spec.get("N"), name=name)
        except GeometryError as exc:
            raise ManifestError(f"manifold {name!r}: {exc}") from None

    def _map(self, name, spec):
        from .jets import CRMap
        src, tgt = self.manifold(spec["source"]), self.manifold(spec["target"])
        if not isinstance(src, EmbeddedManifold) or not isinstance(tgt, EmbeddedManifold):
            raise ManifestError(f"map {name!r}: source and target must be embedded manifolds")
        ctx = VariableContext(z=src.N, w=0, s=0, u=0, t=0)
        comps = [_parse(t, f"maps.{name}.components[{k}]", ctx) for k, t in enumerate(spec["components"])]
        try:
            return CRMap(src, tgt, comps, name=name)
        except GeometryError as exc:
            raise ManifestError(f"map {name!r}: {exc}") from None

    def _point(self, name, spec):
        M = self.manifold(spec["manifold"])
        self.point_manifold[name] = spec["manifold"]
        where = f"points.{name}"
        try:
            if "free" in spec:
                if not isinstance(M, EmbeddedManifold):
                    raise ManifestError(f"{where}: 'free' coordinates need an embedded manifold")
                fr = spec["free"]
                zs = [_constant(x, where) for x in fr.get("z", [])]
                us = [_constant(x, where) for x in fr.get("u", [0] * M.d)]
                return M.graph_point(zs, us)
            coords = spec.get("coords")
            if coords is None:
                raise ManifestError(f"{where}: need 'coords' or 'free'")
            vals = {}
            for key, x in coords.items():
                v = _parse(key, where).variables()
                if len(v) != 1:
                    raise ManifestError(f"{where}: bad coordinate name {key!r}")
                vals[next(iter(v))] = _constant(x, where)
            p = PointAssignment(vals)
            if isinstance(M, EmbeddedManifold):
                M.check_point(p)
            return p
        except (GeometryError, KeyError) as exc:
            raise ManifestError(f"{where}: {exc}") from None

    def manifold(self, name):
        if name not in self.manifolds:
            raise ManifestError(f"unknown manifold {name!r}")
        return self.manifolds[name]

    def map(self, name):
        if name not in self.maps:
            raise ManifestError(f"unknown map {name!r}")
        return self.maps[name]

    def point(self, name, manifold=None) -> PointAssignment:
        if name is None:
            return None
        if name not in self.points:
            raise ManifestError(f"unknown point {name!r}")
        if manifold is not None and self.point_manifold[name] != manifold:
            raise ManifestError(f"point {name!r} belongs to {self.point_manifold[name]!r}, not {manifold!r}")
        return self.points[name]


def _pair(key: str):
    try:
        i, j = (int(x) for x in str(key).split(","))
    except ValueError:
        raise ManifestError(f"coefficient key {key!r} must look like 'i,j'") from None
    return i, j


# -- tasks -------------------------------------------------------------------------

def _req(task, key):
    if key not in task:
        raise ManifestError(f"task {task.get('op')!r} needs parameter {key!r}")
    return task[key]


def _map_point(ctx, task):
    F = ctx.map(_req(task, "map"))
    p = ctx.point(_req(task, "point"), ctx.doc["maps"][task["map"]]["source"])
    return F, p


def _sigma(ctx, M, p, task):
    basis = characteristic_space(M, p)
    k = int(task.get("sigma", 0))
    if not 0 <= k < len(basis):
        raise ManifestError(f"sigma index {k} out of range (d = {len(basis)})")
    s = basis[k]
    return -s if task.get("sign", 1) < 0 else s


def op_parse(ctx, task):
    p = _parse(_req(task, "poly"), "task.poly")
    return {"normalized": str(p), "roundtrip": parse_poly(str(p)) == p}


def op_derive(ctx, task):
    p = _parse(_req(task, "poly"), "task.poly")
    v = _parse(_req(task, "var"), "task.var")
    if len(v.variables()) != 1 or len(v) != 1:
        raise ManifestError("task.var must be a single variable")
    return {"derivative": str(p.derive(next(iter(v.variables()))))}


def op_evaluate(ctx, task):
    p = _parse(_req(task, "poly"), "task.poly")
    return {"value": p.evaluate(ctx.point(_req(task, "point")))}


def op_cr_basis(ctx, task):
    M = ctx.manifold(_req(task, "manifold"))
    p = ctx.point(task.get("point"), task["manifold"])
    return {"basis": [str(L) for L in cr_basis(M, p)]}


def op_involutivity(ctx, task):
    ok, wit = involutivity_check(ctx.manifold(_req(task, "manifold")))
    return {"involutive": ok, "witness": wit}


def op_characteristic(ctx, task):
    M = ctx.manifold(_req(task, "manifold"))
    p = ctx.point(task.get("point"), task["manifold"])
    return {"covectors": characteristic_space(M, p)}


def op_levi(ctx, task):
    M = ctx.manifold(_req(task, "manifold"))
    p = ctx.point(task.get("point"), task["manifold"])
    s = _sigma(ctx, M, p, task)
    H = levi_form(M, p, s)
    return {"sigma": s, "matrix": H, "signature": list(signature(H))}


def op_verify_map(ctx, task):
    from .jets import verify_map_into_target
    ok, res = verify_map_into_target(ctx.map(_req(task, "map")))
    return {"passed": ok, "residuals": res}


def op_a_vector(ctx, task):
    from .jets import a_vector
    return {"a": a_vector(ctx.map(_req(task, "map")))}


def op_rank(ctx, task):
    from .jets import jet_report
    F, p = _map_point(ctx, task)
    l = int(_req(task, "l"))
    rep = jet_report(F, p, l)
    return {"rank": rep.ranks[l], "report": rep}


def op_k0(ctx, task):
    from .jets import DEFAULT_MAX_ORDER, jet_report
    F, p = _map_point(ctx, task)
    max_l = int(task.get("max_l", DEFAULT_MAX_ORDER))
    rep = jet_report(F, p, max_l)
    return {"k0": rep.order, "ranks": rep.ranks}


def op_generic_rank(ctx, task):
    from .jets import generic_rank_l
    F = ctx.map(_req(task, "map"))
    return {"generic_rank": generic_rank_l(F, int(_req(task, "l")), seed=ctx.seed)}


def op_degree(ctx, task):
    from .jets import degenerate_degree
    F, p = _map_point(ctx, task)
    return degenerate_degree(F, p, task.get("k"))


def op_quotients(ctx, task):
    from .jets import reflection_quotients
    F, p = _map_point(ctx, task)
    return reflection_quotients(F, p, int(_req(task, "l")), task.get("columns"))


def op_hypotheses(ctx, task):
    from .jets import check_theorem25_hypotheses
    F = ctx.map(_req(task, "map"))
    src = ctx.doc["maps"][task["map"]]["source"]
    pts = [ctx.point(n, src) for n in _req(task, "points")]
    return {"points": check_theorem25_hypotheses(F, pts)}


def _matrix(rows, where):
    return [[_constant(x, where) for x in r] for r in rows]


def op_obstruction(ctx, task):
    from .jets import quadric_linear_obstruction
    return quadric_linear_obstruction(int(_req(task, "N")), int(_req(task, "Nprime")),
                                      _constant(_req(task, "lambda"), "task.lambda"),
                                      _matrix(_req(task, "A"), "task.A"))


def op_select_frame(ctx, task):
    from .normalization import select_frame
    F, p = _map_point(ctx, task)
    return select_frame(F, p, int(_req(task, "l")))


def op_normalize(ctx, task):
    from .normalization import Tolerances, normalize_frame
    F, p = _map_point(ctx, task)
    fields = Tolerances.__dataclass_fields__
    tol = Tolerances(**{k: float(v) for k, v in ctx.tolerances.items() if k in fields})
    res = normalize_frame(F, p, int(_req(task, "l")), tol, translate=bool(task.get("translate", False)))
    return res.to_json()


def op_minor(ctx, task):
    from .determinants import minor_det
    return {"det": minor_det(_matrix(_req(task, "matrix"), "task.matrix"), _req(task, "rows"), _req(task, "cols"))}


def op_lemma44(ctx, task):
    from .determinants import lemma44_check
    lhs, rhs, eq = lemma44_check(_matrix(_req(task, "matrix"), "task.matrix"), _req(task, "i_set"), _req(task, "j_set"))
    return {"lhs": lhs, "rhs": rhs, "equal": eq}


def op_lemma45(ctx, task):
    from .determinants import lemma45_check
    lhs, rhs, eq = lemma45_check(_matrix(_req(task, "matrix"), "task.matrix"))
    return {"lhs": lhs, "rhs": rhs, "equal": eq}


def op_lemma46(ctx, task):
    from .determinants import lemma46_check
    return {"displays": lemma46_check(_matrix(_req(task, "matrix"), "task.matrix"))}


def op_lemma47(ctx, task):
    from .determinants import lemma47_solve
    cols = _matrix(_req(task, "columns"), "task.columns")
    a = [_constant(x, "task.a") for x in _req(task, "a")]
    return lemma47_solve(cols, a)


def parse_dims(spec) -> List[int]:
    if isinstance(spec, list):
        return [int(x) for x in spec]
    s = str(spec)
    if ".." in s:
        lo, hi = s.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in s.split(",")]


def op_identities(ctx, task):
    from .determinants import run_identity_trials
    return run_identity_trials(parse_dims(task.get("dims", "3..6")), int(task.get("trials", 1000)),
                               int(task.get("seed", ctx.seed)))


def parse_scales(spec) -> Optional[List[float]]:
    """``"4:256"`` doubles from 4 to 256; a list is taken as given."""
    if spec is None:
        return None
    if isinstance(spec, list):
        return [float(x) for x in spec]
    lo, hi = (float(x) for x in str(spec).split(":"))
    out = [lo]
    while out[-1] * 2 <= hi * (1 + 1e-12):
        out.append(out[-1] * 2)
    return out


def _fbi_inputs(ctx, task):
    from .fbi import Cutoff, load_samples, unit_directions
    u = load_samples(_req(task, "input"))
    probe = [float(x) for x in task.get("probe", [0.0] * u.dim)]
    if "radius" in task:
        r = float(task["radius"])
    else:
        half = min(min(x - a, b - x) for (a, b, _), x in zip(u.axes, probe))
        r = half / np.sqrt(2.0)
    dirs = task.get("directions", 64)
    dirs = unit_directions(u.dim, int(dirs)) if isinstance(dirs, int) else [tuple(map(float, d)) for d in dirs]
    return u, Cutoff(r), probe, dirs, parse_scales(task.get("scales")), float(task.get("K", 1.0))


def op_fbi(ctx, task):
    from .fbi import cone_report
    u, eta, probe, dirs, scales, K = _fbi_inputs(ctx, task)
    M = ctx.manifold(task["manifold"]) if "manifold" in task else None
    p = ctx.point(task["point"], task["manifold"]) if "point" in task else None
    rep = cone_report(u, eta, probe, dirs, scales, K, manifold=M, point=p, threads=1)
    out = rep.to_json()
    out["cutoff_radius"] = eta.r
    return out


def op_fbi_transform(ctx, task):
    from .fbi import fbi_transform
    u, eta, probe, _, _, K = _fbi_inputs(ctx, task)
    return {"value": fbi_transform(u, eta, probe, [float(x) for x in _req(task, "frequency")], K)}


OPS: Dict[str, Callable] = {
    "parse": op_parse, "derive": op_derive, "evaluate": op_evaluate,
    "cr_basis": op_cr_basis, "involutivity_check": op_involutivity,
    "characteristic_space": op_characteristic, "levi_form": op_levi, "signature": op_levi,
    "verify_map_into_target": op_verify_map, "a_vector": op_a_vector,
    "rank_l": op_rank, "k0_order": op_k0, "generic_rank_l": op_generic_rank,
    "degenerate_degree": op_degree, "reflection_quotients": op_quotients,
    "check_hypotheses": op_hypotheses, "quadric_linear_obstruction": op_obstruction,
    "select_frame": op_select_frame, "normalize_frame": op_normalize,
    "minor_det": op_minor, "lemma44_check": op_lemma44, "lemma45_check": op_lemma45,
    "lemma46_check": op_lemma46, "lemma47_solve": op_lemma47,
    "verify_identities": op_identities, "fbi_cone": op_fbi, "fbi_transform": op_fbi_transform,
}

# tasks whose result carries a pass/fail flag
_FLAG_KEYS = ("passed", "all_equal", "equal")


def _matches(expected, got) -> bool:
    if isinstance(expected, dict) and isinstance(got, dict):
        return all(k in got and _matches(v, got[k]) for k, v in expected.items())
    return expected == got


def run_task(ctx: Context, index: int, task: dict) -> dict:
    op = task.get("op")
    entry = {"index": index, "op": op, "inputs": task}
    fn = OPS.get(op)
    if fn is None:
        entry.update(status="failed", error=f"unknown op {op!r}")
        return entry
    try:
        result = to_jsonable(fn(ctx, task))
    except ManifestError:
        raise
    except (ValueError, ArithmeticError, KeyError, GeometryError) as exc:
        entry.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        return entry
    except Exception as exc:   # noqa: BLE001 - reported as an internal error
        entry.update(status="error", error=f"{type(exc).__name__}: {exc}")
        return entry
    entry["result"] = result
    status = "ok"
    if isinstance(result, dict):
        for k in _FLAG_KEYS:
            if result.get(k) is False:
                status = "failed"
    if "expect" in task and not _matches(to_jsonable(task["expect"]), result):
        status = "failed"
        entry["error"] = "result does not match 'expect'"
    entry["status"] = status
    return entry


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CRLAB_THREADS", "1")))
    except ValueError:
        return 1


def run_manifest(doc, seed: Optional[int] = None) -> dict:
    """Execute every task; results are ordered by task index."""
    ctx = Context(doc, seed)
    random.seed(ctx.seed)
    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        entries = list(ex.map(lambda it: run_task(ctx, *it), enumerate(ctx.tasks)))
    return {
        "provenance": {"package": "crlab", "version": __version__, "seed": ctx.seed,
                       "numpy": np.__version__},
        "objects": ctx.echo(),
        "tasks": entries,
        "summary": {"total": len(entries),
                    "failed": sum(e["status"] == "failed" for e in entries),
                    "errors": sum(e["status"] == "error" for e in entries)},
    }


def exit_code(report: dict) -> int:
    if report["summary"]["errors"]:
        return EXIT_INTERNAL
    return EXIT_FAILED if report["summary"]["failed"] else EXIT_OK


# -- command line ------------------------------------------------------------------

def _map_manifest(args, ops):
    src = [s for s in args.source.split(";") if s.strip()]
    tgt = [s for s in args.target.split(";") if s.strip()]
    comps = [s for s in args.map.split(";")]
    return {
        "seed": args.seed,
        "manifolds": {"source": {"defining": src}, "target": {"defining": tgt}},
        "maps": {"F": {"source": "source", "target": "target", "components": comps}},
        "points": {"p": {"manifold": "source", "coords": _coords(args.point)}},
        "tasks": ops,
    }


def _coords(text: str) -> dict:
    out = {}
    for part in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in part:
            raise ManifestError(f"point coordinate {part!r} must look like name=value")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crlab", description="CR-geometric invariants of polynomial maps.")
    ap.add_argument("--version", action="version", version=f"crlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("run", help="execute a manifest")
    p.add_argument("manifest")
    common(p)

    for name, extra in (("rank", "--l"), ("nondegen", "--max-l"), ("normalize", "--l")):
        p = sub.add_parser(name, help=f"{name} for a single map (synthesizes a manifest)")
        p.add_argument("--source", required=True, help="defining functions separated by ';'")
        p.add_argument("--target", required=True, help="target defining functions separated by ';'")
        p.add_argument("--map", required=True, help="map components separated by ';'")
        p.add_argument("--point", required=True, help="e.g. z1=0,z2=0")
        p.add_argument(extra, type=int, default=None)
        if name == "normalize":
            p.add_argument("--translate", action="store_true")
        common(p)

    p = sub.add_parser("levi", help="Levi form and signature")
    p.add_argument("--manifold", required=True, help="defining functions separated by ';'")
    p.add_argument("--point", default="", help="e.g. z1=0,z2=0 (default: origin)")
    p.add_argument("--sigma", type=int, default=0)
    p.add_argument("--sign", type=int, choices=(1, -1), default=1)
    common(p)

    p = sub.add_parser("fbi", help="FBI decay classification")
    p.add_argument("--input", required=True, help="sample JSON file or inline generator JSON")
    p.add_argument("--probe", default=None, help="comma separated coordinates")
    p.add_argument("--directions", type=int, default=64)
    p.add_argument("--scales", default="4:256")
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--radius", type=float, default=None)
    common(p)

    p = sub.add_parser("verify-identities", help="randomized determinant identity trials")
    p.add_argument("--dims", default="3..6")
    p.add_argument("--trials", type=int, default=1000)
    common(p)
    return ap


def _synthesize(args) -> dict:
    seed = args.seed if args.seed is not None else 0
    args.seed = seed
    if args.command == "rank":
        return _map_manifest(args, [{"op": "rank_l", "map": "F", "point": "p", "l": args.l if args.l is not None else 1}])
    if args.command == "nondegen":
        task = {"op": "k0_order", "map": "F", "point": "p"}
        if args.max_l is not None:
            task["max_l"] = args.max_l
        return _map_manifest(args, [task])
    if args.command == "normalize":
        return _map_manifest(args, [{"op": "normalize_frame", "map": "F", "point": "p",
                                     "l": args.l if args.l is not None else 1, "translate": args.translate}])
    if args.command == "levi":
        doc = {"seed": seed, "manifolds": {"M": {"defining": [s for s in args.manifold.split(";") if s.strip()]}},
               "tasks": [{"op": "levi_form", "manifold": "M", "sigma": args.sigma, "sign": args.sign}]}
        if args.point:
            doc["points"] = {"p": {"manifold": "M", "coords": _coords(args.point)}}
            doc["tasks"][0]["point"] = "p"
        return doc
    if args.command == "fbi":
        task = {"op": "fbi_cone", "input": args.input, "directions": args.directions,
                "scales": args.scales, "K": args.K}
        if args.probe:
            task["probe"] = [float(x) for x in args.probe.split(",")]
        if args.radius is not None:
            task["radius"] = args.radius
        return {"seed": seed, "tasks": [task]}
    if args.command == "verify-identities":
        return {"seed": seed, "tasks": [{"op": "verify_identities", "dims": args.dims,
                                         "trials": args.trials, "seed": seed}]}
    raise ManifestError(f"unknown command {args.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            with open(args.manifest) as fh:
                try:
                    doc = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise ManifestError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
            report = run_manifest(doc, args.seed)
        else:
            report = run_manifest(_synthesize(args))
    except (ManifestError, OSError) as exc:
        print(f"crlab: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except Exception as exc:   # noqa: BLE001
        print(f"crlab: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    text = dumps(report) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
