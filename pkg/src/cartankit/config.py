"""Run configuration: parsing, validation, and artifact construction.

A config is one JSON document selecting a geometry (catalog name or inline
group description with row-major basis matrices), a discretized domain, a
form source, anchors, tolerances, and output options. ``parse_config``
validates everything it can before any numerics run and names the
offending key in every diagnostic.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import algebroid, expressions, klein, liegroup, testmaps
from .errors import ParseError, UnknownGeometry, ValidationError
from .mesh import MeshDomain, circle_mesh, grid_mesh, interval_mesh

DEFAULT_TOLERANCES = {
    "lin_tol": 1e-10,
    "membership_tol": 1e-8,
    "step": 1e-3,
    "triviality_tol": 1e-6,
}


@dataclass(frozen=True)
class RunConfig:
    geometry: klein.GeometrySpec
    domain: MeshDomain
    form: dict
    anchors: dict
    tolerances: dict
    outputs: dict
    route: list = None
    symmetry: dict = None
    seed: int = 0
    raw: dict = field(default=None, repr=False)
    config_hash: str = ""


def _require(cond, key, msg):
    if not cond:
        raise ValidationError(f"{key}: {msg}")


def _parse_geometry(node) -> klein.GeometrySpec:
    if isinstance(node, str):
        return klein.get_geometry(node)
    _require(isinstance(node, dict), "geometry", "must be a name or an object")
    for key in ("name", "basis", "action"):
        _require(key in node, f"geometry.{key}", "is required for inline groups")
    basis = np.asarray(node["basis"], dtype=float)
    _require(basis.ndim == 3 and basis.shape[1] == basis.shape[2],
             "geometry.basis", "must be a list of square matrices (row-major)")
    membership = node.get("membership", "none")
    spec = liegroup.make_group_spec(node["name"], basis, membership=membership)
    spec, _ = algebroid.calibrate_bracket_sign(spec)
    action = node["action"]
    kind = action.get("kind") if isinstance(action, dict) else action
    _require(kind in ("linear", "sphere", "affine", "group"),
             "geometry.action", f"unknown action kind {kind!r}")
    if kind == "group":
        return klein.group_geometry(spec, name=node["name"])
    n = spec.n
    p = n - 1 if kind == "affine" else n
    dim_m = p - 1 if kind == "sphere" else p
    basepoint = np.zeros(p)
    if kind == "sphere":
        basepoint[-1] = 1.0
    if isinstance(action, dict) and "basepoint" in action:
        basepoint = np.asarray(action["basepoint"], dtype=float)
    constraint = "unit_norm" if kind == "sphere" else "none"
    return klein.GeometrySpec(name=node["name"], group=spec, action=kind,
                              p=p, dim_m=dim_m, basepoint=basepoint,
                              constraint=constraint)


def _parse_domain(node, key="domain") -> MeshDomain:
    _require(isinstance(node, dict), key, "must be an object")
    kind = node.get("kind", "grid")
    x0 = int(node.get("x0", 0))
    if kind == "circle":
        res = node.get("resolution")
        _require(isinstance(res, int) and res >= 2, f"{key}.resolution",
                 "must be an integer >= 2")
        return circle_mesh(float(node.get("circumference", 2 * np.pi)), res, x0=x0)
    if kind == "interval":
        res = node.get("resolution")
        _require(isinstance(res, int) and res >= 2, f"{key}.resolution",
                 "must be an integer >= 2")
        lo, hi = node.get("extent", (0.0, 1.0))
        return interval_mesh(float(lo), float(hi), res, x0=x0)
    if kind in ("grid", "torus"):
        res = node.get("resolution")
        if isinstance(res, int):
            res = [res, res]
        _require(isinstance(res, (list, tuple)) and len(res) >= 1,
                 f"{key}.resolution", "must be an integer or a list")
        for r in res:
            _require(isinstance(r, int) and r >= 2, f"{key}.resolution",
                     "entries must be integers >= 2")
        extents = node.get("extents", [[0.0, 1.0]] * len(res))
        _require(len(extents) == len(res), f"{key}.extents",
                 "must match the resolution list")
        identify = node.get("identify", [kind == "torus"] * len(res))
        return grid_mesh(extents, res, identify=identify, x0=x0)
    raise ValidationError(f"{key}.kind: unknown domain kind {kind!r}")


_FORM_SOURCES = ("expressions", "samples", "log-derivative-of", "frenet")


def _parse_form(node, geometry, domain) -> dict:
    _require(isinstance(node, dict), "form", "must be an object")
    source = node.get("source")
    _require(source in _FORM_SOURCES, "form.source",
             f"must be one of {_FORM_SOURCES}")
    if source == "expressions":
        rows = node.get("coeffs")
        d = geometry.group.d
        _require(isinstance(rows, list) and len(rows) == domain.sigma,
                 "form.coeffs", f"needs {domain.sigma} coefficient rows")
        for row in rows:
            _require(isinstance(row, list) and len(row) == d, "form.coeffs",
                     f"each row needs {d} expressions")
        # compile now so syntax errors surface during validation
        expressions.compile_form_coeffs(rows, domain.sigma)
    elif source == "samples":
        arr = np.asarray(node.get("coeffs"), dtype=float)
        want = (domain.n_nodes, domain.sigma, geometry.group.d)
        _require(arr.shape == want, "form.coeffs",
                 f"sample array must have shape {want}, got {arr.shape}")
    elif source == "log-derivative-of":
        name = node.get("map")
        tm = testmaps.get_test_map(name)
        _require(tm.sigma == domain.sigma, "form.map",
                 f"{name} expects a {tm.sigma}-dimensional domain")
    else:  # frenet
        _require(geometry.action == "affine" and geometry.p in (2, 3),
                 "form.curvature",
                 "frenet forms need a Euclidean geometry of dimension 2 or 3")
        _require("curvature" in node, "form.curvature", "is required")
        if geometry.p == 3:
            _require("torsion" in node, "form.torsion",
                     "is required in dimension 3")
    return dict(node)


def _parse_anchors(node, geometry, domain) -> dict:
    node = dict(node or {})
    x0 = int(node.get("x0", domain.x0))
    _require(0 <= x0 < domain.n_nodes, "anchors.x0", "node index out of range")
    out = {"x0": x0}
    if "g0" in node:
        g0 = np.asarray(node["g0"], dtype=float)
        if g0.ndim == 1:
            g0 = g0.reshape(geometry.group.n, geometry.group.n)
        r = liegroup.membership_residual(geometry.group, g0)
        _require(r <= geometry.group.membership_tol, "anchors.g0",
                 f"membership residual {r:.3e} above tolerance")
        out["g0"] = g0
    if "m0" in node:
        m0 = np.asarray(node["m0"], dtype=float)
        _require(m0.shape == (geometry.p,), "anchors.m0",
                 f"must have {geometry.p} coordinates")
        r = klein.constraint_residual(geometry, m0)
        _require(r <= geometry.point_tol, "anchors.m0",
                 f"constraint residual {r:.3e} above tolerance")
        out["m0"] = m0
    return out


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("top level: config must be a JSON object")

    _require("geometry" in raw, "geometry", "is required")
    geometry = _parse_geometry(raw["geometry"])

    _require("domain" in raw, "domain", "is required")
    domain = _parse_domain(raw["domain"])

    form = _parse_form(raw["form"], geometry, domain) if "form" in raw else None
    _require(form is not None or "symmetry" in raw, "form", "is required")

    anchors = _parse_anchors(raw.get("anchors"), geometry, domain)

    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(raw.get("tolerances", {}))
    for key, val in tolerances.items():
        _require(isinstance(val, (int, float)) and val > 0,
                 f"tolerances.{key}", "must be a positive number")

    outputs = {"dir": "out", "formats": ["csv", "json"], "figures": True}
    outputs.update(raw.get("outputs", {}))

    route = raw.get("route")
    if route is not None:
        _require(isinstance(route, list) and
                 all(isinstance(i, int) and 0 <= i < domain.n_nodes
                     for i in route),
                 "route", "must be a list of valid node indices")

    digest = hashlib.sha256(
        json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    return RunConfig(geometry=geometry, domain=domain, form=form,
                     anchors=anchors, tolerances=tolerances, outputs=outputs,
                     route=route, symmetry=raw.get("symmetry"),
                     seed=int(raw.get("seed", 0)), raw=raw, config_hash=digest)


def build_form(cfg: RunConfig):
    """Materialize the configured form as an MCFormField. For
    ``log-derivative-of`` sources of point-valued maps this is the pullback
    field; frenet sources are handled by the frenet command instead."""
    source = cfg.form["source"]
    if source == "expressions":
        evaluator = expressions.compile_form_coeffs(cfg.form["coeffs"],
                                                    cfg.domain.sigma)
        return algebroid.ordinary_form(cfg.domain, cfg.geometry,
                                       evaluator=evaluator)
    if source == "samples":
        coeffs = np.asarray(cfg.form["coeffs"], dtype=float)
        return algebroid.ordinary_form(cfg.domain, cfg.geometry, coeffs=coeffs)
    if source == "log-derivative-of":
        f = testmaps.map_field(cfg.form["map"], cfg.domain, cfg.geometry)
        return algebroid.log_derivative(f)
    raise ValidationError("form.source: frenet forms are curve data; "
                          "run the frenet command")
