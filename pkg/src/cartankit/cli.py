"""Command-line interface.

Subcommands: validate, develop, monodromy, reconstruct, roundtrip, frenet,
symmetry. Every run reads one JSON config (--config), writes a JSON report
plus CSV tables (and PNG figures unless disabled) into --out, and exits
with 0 on pass, 2 on a quantitative failure (a residual above its
tolerance), 3 on a structural failure (axiom violation, nontrivial
monodromy when reconstruction was requested, basepoint mismatch), and 1 on
configuration or I/O errors. Verbosity via the CARTANKIT_LOG environment
variable (debug, info, warning, error).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import algebroid, klein, liegroup, monodromy, reconstruct, report, testmaps
from .config import RunConfig, build_form, parse_config
from .errors import (AxiomViolated, BasepointMismatch, CartanKitError,
                     IoError, NontrivialMonodromy, NotNormalizing, ParseError,
                     RankDeficient, UnknownGeometry, ValidationError)

log = logging.getLogger("cartankit")

COMMANDS = ("validate", "develop", "monodromy", "reconstruct", "roundtrip",
            "frenet", "symmetry")

_STRUCTURAL = (AxiomViolated, NontrivialMonodromy, BasepointMismatch,
               RankDeficient)
_CONFIG_ERRORS = (ParseError, ValidationError, UnknownGeometry, IoError)


def _base_report(cmd: str, cfg: RunConfig) -> dict:
    return {
        "command": cmd,
        "config_hash": cfg.config_hash,
        "geometry": cfg.geometry.name,
        "step": cfg.tolerances["step"],
        "tolerances": dict(cfg.tolerances),
    }


def _node_rows(domain, values, residuals):
    rows = []
    for i in range(domain.n_nodes):
        rows.append(tuple(float(v) for v in domain.nodes[i])
                    + tuple(float(v) for v in np.atleast_1d(values[i]))
                    + (float(residuals[i]),))
    return rows


def _node_header(domain, image_dim, image_prefix="f"):
    params = [f"p{j}" for j in range(domain.sigma)] if domain.sigma > 1 else ["t"]
    imgs = [f"{image_prefix}{ax}" for ax in ("x", "y", "z", "w")[:image_dim]]
    if image_dim > 4:
        imgs = [f"{image_prefix}{j}" for j in range(image_dim)]
    return params + imgs + ["residual"]


# ------------------------------------------------------------- commands


def _cmd_validate(cfg: RunConfig) -> tuple:
    form = build_form(cfg)
    rep = algebroid.axiom_report(form, cfg.geometry)
    res = algebroid.morphism_residual(form)
    out = _base_report("validate", cfg)
    out.update({
        "axioms_ok": rep.ok,
        "violations": [{"axiom": a, "node": n} for a, n in rep.violations],
        "maximal": rep.maximal,
        "rank_bounds": [rep.rank_lower, rep.rank_upper],
        "rank_min": int(np.min(rep.rank)),
        "rank_max": int(np.max(rep.rank)),
        "anchored_point": None if rep.m3_point is None else list(rep.m3_point),
        "anchored_residual": rep.m3_residual,
        "flatness_max": float(np.max(res)),
        "flatness_mean": float(np.mean(res)),
    })
    code = 0
    if not rep.ok:
        code = 3
    elif "flatness_tol" in cfg.tolerances and \
            out["flatness_max"] > cfg.tolerances["flatness_tol"]:
        code = 2
    table = ("validate_residuals", _node_header(cfg.domain, 0)[:-1] + ["residual"],
             _node_rows(cfg.domain, np.zeros((cfg.domain.n_nodes, 0)), res))
    figs = [("validate_residuals", "residuals", res,
             cfg.tolerances.get("flatness_tol"))]
    return code, out, [table], figs


def _default_route(cfg: RunConfig):
    if cfg.route is not None:
        return list(cfg.route)
    if cfg.domain.sigma == 1:
        order = np.argsort(cfg.domain.nodes[:, 0])
        return [int(i) for i in order]
    raise ValidationError("route: required for multi-dimensional domains")


def _cmd_develop(cfg: RunConfig) -> tuple:
    form = build_form(cfg)
    route_nodes = _default_route(cfg)
    route = cfg.domain.route_from_nodes(route_nodes)
    step = cfg.tolerances["step"]
    edge_ids = [e for e, _ in route]
    dirs = [d for _, d in route]
    devs = monodromy.develop_edges(form, edge_ids, dirs, step=step)
    fine = monodromy.develop_edges(form, edge_ids, dirs, step=step / 2.0)
    n = cfg.geometry.group.n
    samples = [np.eye(n)]
    final_fine = np.eye(n)
    for g, gf in zip(devs, fine):
        samples.append(g @ samples[-1])
        final_fine = gf @ final_fine
    samples = np.stack(samples)
    err_est = float(np.max(np.abs(samples[-1] - final_fine))) / 15.0

    geo = cfg.geometry
    m0 = cfg.anchors.get("m0", geo.basepoint)
    orbit = reconstruct._act_stack(geo, samples, m0) if geo.action != "group" \
        else samples.reshape(len(samples), -1)
    memb = np.array([liegroup.membership_residual(geo.group, g)
                     for g in samples])
    arc = np.concatenate([[0.0], np.cumsum(
        np.linalg.norm(cfg.domain.edge_disp[edge_ids], axis=1))])

    out = _base_report("develop", cfg)
    out.update({
        "route": route_nodes,
        "final": report.matrix_payload(samples[-1]),
        "err_est": err_est,
        "membership_max": float(np.max(memb)),
    })
    code = 0
    if "integration_tol" in cfg.tolerances and \
            err_est > cfg.tolerances["integration_tol"]:
        code = 2
    header = ["t"] + [f"m{j}" for j in range(orbit.shape[1])] + ["residual"]
    rows = [(float(arc[i]),) + tuple(float(v) for v in orbit[i]) + (float(memb[i]),)
            for i in range(len(samples))]
    figs = [("develop_orbit", "development", (arc, orbit), None)]
    return code, out, [("develop_samples", header, rows)], figs


def _cmd_monodromy(cfg: RunConfig) -> tuple:
    form = build_form(cfg)
    m0 = cfg.anchors.get("m0", cfg.geometry.basepoint)
    rep = monodromy.pointed_monodromy(
        form, cfg.domain, m0, cfg.geometry, step=cfg.tolerances["step"],
        triviality_tol=cfg.tolerances["triviality_tol"])
    out = _base_report("monodromy", cfg)
    out.update({
        "m0": list(map(float, rep.m0)),
        "x0": rep.x0,
        "n_cycles": rep.n_cycles,
        "trivial": rep.trivial,
        "triviality_tol": rep.tolerance,
        "cycles": [{
            "development": report.matrix_payload(rep.developments[i]),
            "image": [float(v) for v in rep.images[i]],
            "deviation": float(rep.deviations[i]),
            "winding": [float(v) for v in rep.windings[i]],
        } for i in range(rep.n_cycles)],
    })
    header = ["cycle"] + [f"w{j}" for j in range(cfg.domain.sigma)] + ["residual"]
    rows = [(i,) + tuple(float(v) for v in rep.windings[i])
            + (float(rep.deviations[i]),) for i in range(rep.n_cycles)]
    figs = [("monodromy_deviations", "residuals", rep.deviations,
             rep.tolerance)]
    return 0, out, [("monodromy_cycles", header, rows)], figs


def _per_node_cycle_residual(pf: reconstruct.PrimitiveField) -> np.ndarray:
    mesh = pf.domain
    non_tree = reconstruct._non_tree_edges(mesh)
    out = np.zeros(mesh.n_nodes)
    for res, e in zip(pf.cycle_residuals, non_tree):
        a, b = mesh.edges[e]
        out[a] = max(out[a], res)
        out[b] = max(out[b], res)
    return out


def _cmd_reconstruct(cfg: RunConfig) -> tuple:
    form = build_form(cfg)
    step = cfg.tolerances["step"]
    out = _base_report("reconstruct", cfg)
    if "g0" in cfg.anchors:
        f = reconstruct.reconstruct_group_primitive(
            form, cfg.anchors["g0"], step=step,
            triviality_tol=cfg.tolerances["triviality_tol"])
        values = f.values.reshape(len(f.values), -1)
        residuals = np.array([liegroup.membership_residual(cfg.geometry.group,
                                                           g) for g in f.values])
        out["anchor"] = {"x0": cfg.domain.x0,
                         "g0": report.matrix_payload(cfg.anchors["g0"])}
        out["max_residual"] = float(np.max(residuals))
        worst = out["max_residual"]
    else:
        m0 = cfg.anchors.get("m0", cfg.geometry.basepoint)
        pf = reconstruct.reconstruct_primitive(
            form, m0, step=step,
            triviality_tol=cfg.tolerances["triviality_tol"])
        values = pf.values
        residuals = _per_node_cycle_residual(pf)
        out["anchor"] = {"x0": pf.x0, "m0": [float(v) for v in pf.m0]}
        out["cycle_residual_max"] = pf.max_residual
        out["isotropy_residual"] = pf.isotropy_residual
        out["max_residual"] = pf.max_residual
        worst = pf.max_residual
    code = 0 if worst <= cfg.tolerances["triviality_tol"] else 2
    table = ("reconstruct_field", _node_header(cfg.domain, values.shape[1]),
             _node_rows(cfg.domain, values, residuals))
    figs = [("reconstruct_field", "points", values, None)]
    return code, out, [table], figs


def _cmd_roundtrip(cfg: RunConfig) -> tuple:
    if cfg.form["source"] != "log-derivative-of":
        raise ValidationError(
            "form.source: roundtrip needs a log-derivative-of form")
    f = testmaps.map_field(cfg.form["map"], cfg.domain, cfg.geometry)
    form = algebroid.log_derivative(f)
    step = cfg.tolerances["step"]
    x0 = cfg.domain.x0
    if f.target == "group":
        rec = reconstruct.reconstruct_group_primitive(
            form, f.values[x0], step=step,
            triviality_tol=cfg.tolerances["triviality_tol"])
        err = float(np.max(np.abs(rec.values - f.values)))
        values = rec.values.reshape(len(rec.values), -1)
        per_node = np.max(np.abs(rec.values - f.values), axis=(-2, -1))
    else:
        pf = reconstruct.reconstruct_primitive(
            form, f.values[x0], step=step,
            triviality_tol=cfg.tolerances["triviality_tol"])
        err = float(np.max(np.abs(pf.values - f.values)))
        values = pf.values
        per_node = np.max(np.abs(pf.values - f.values), axis=-1)
    tol = cfg.tolerances.get("roundtrip_tol", 1e-6)
    out = _base_report("roundtrip", cfg)
    out.update({"map": cfg.form["map"], "max_error": err,
                "roundtrip_tol": tol})
    code = 0 if err <= tol else 2
    table = ("roundtrip_field", _node_header(cfg.domain, values.shape[1]),
             _node_rows(cfg.domain, values, per_node))
    figs = [("roundtrip_error", "residuals", per_node, tol)]
    return code, out, [table], figs


def _scalar_source(node):
    if isinstance(node, str):
        from .expressions import compile_expression
        fn = compile_expression(node, ["t"])
        return lambda arc: fn(np.asarray(arc)[..., None])
    if isinstance(node, list):
        return np.asarray(node, dtype=float)
    return float(node)


def _cmd_frenet(cfg: RunConfig) -> tuple:
    if cfg.form["source"] != "frenet":
        raise ValidationError("form.source: frenet command needs a frenet form")
    geo = cfg.geometry
    length = float(cfg.form.get("length", 2.0 * np.pi))
    kappa = _scalar_source(cfg.form["curvature"])
    tau = _scalar_source(cfg.form["torsion"]) if "torsion" in cfg.form else None
    step = cfg.tolerances["step"]
    t_arc, pts, dev = klein.frenet_curve(geo, kappa, tau, length=length,
                                         step=step)
    closure = float(np.max(np.abs(pts[-1] - pts[0])))
    memb = np.array([liegroup.membership_residual(geo.group, g)
                     for g in dev.g_samples])
    out = _base_report("frenet", cfg)
    out.update({
        "length": length,
        "closure_error": closure,
        "start": [float(v) for v in pts[0]],
        "end": [float(v) for v in pts[-1]],
        "membership_max": float(np.max(memb)),
    })
    code = 0
    if cfg.form.get("expect_closed"):
        tol = cfg.tolerances.get("closure_tol", 1e-6)
        out["closure_tol"] = tol
        code = 0 if closure <= tol else 2
    header = ["t"] + [f"f{ax}" for ax in ("x", "y", "z")[:geo.p]] + ["residual"]
    rows = [(float(t_arc[i]),) + tuple(float(v) for v in pts[i])
            + (float(memb[i]),) for i in range(len(t_arc))]
    figs = [("frenet_curve", "points", pts, None)]
    return code, out, [("frenet_curve", header, rows)], figs


def read_primitive_csv(path: str, sigma: int):
    """Parameter coordinates and image coordinates from a result table."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    data = np.atleast_2d(data)
    return data[:, :sigma], data[:, sigma:-1]


def _cmd_symmetry(cfg: RunConfig) -> tuple:
    node = cfg.symmetry or {}
    geo = cfg.geometry
    out = _base_report("symmetry", cfg)
    cand = node.get("candidate", {})
    m0 = np.asarray(cand.get("m0", geo.basepoint), dtype=float)
    l = np.asarray(cand.get("l", np.eye(geo.group.n)), dtype=float)
    r = np.asarray(cand.get("r", np.eye(geo.group.n)), dtype=float)
    code = 0
    try:
        pair = klein.is_symmetry_pair(geo, l, r, m0)
        out["pair_valid"] = True
        out["normalizer_residual"] = pair.normalizer_residual
    except NotNormalizing as exc:
        out["pair_valid"] = False
        out["normalizer_residual"] = exc.residual
        out["error"] = str(exc)
        return 2, out, [], []

    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(8):
        g = liegroup.exp(geo.group, 0.5 * rng.standard_normal(geo.group.d))
        m = klein.act(geo, g, m0, check=False)
        lhs = klein.apply_symmetry(geo, pair, klein.act(geo, g, m, check=False))
        rhs = klein.act(geo, l @ g @ np.linalg.inv(l),
                        klein.apply_symmetry(geo, pair, m), check=False)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    out["equivariance_residual"] = worst

    files = node.get("files")
    if files:
        if len(files) != 2:
            raise ValidationError("symmetry.files: needs exactly two paths")
        _, v1 = read_primitive_csv(files[0], cfg.domain.sigma)
        _, v2 = read_primitive_csv(files[1], cfg.domain.sigma)
        verdict = reconstruct.uniqueness_up_to_symmetry(
            v1, v2, candidate=pair, geo=geo,
            tol=cfg.tolerances["triviality_tol"])
        out["uniqueness"] = {
            "related": verdict.related,
            "max_deviation": verdict.max_deviation,
            "argmax_node": verdict.argmax_node,
            "kind": verdict.kind,
        }
        if not verdict.related:
            code = 2
    return code, out, [], []


_HANDLERS = {
    "validate": _cmd_validate,
    "develop": _cmd_develop,
    "monodromy": _cmd_monodromy,
    "reconstruct": _cmd_reconstruct,
    "roundtrip": _cmd_roundtrip,
    "frenet": _cmd_frenet,
    "symmetry": _cmd_symmetry,
}


def run_command(cmd: str, cfg: RunConfig) -> tuple:
    """Dispatch one command; returns (exit_code, report, tables, figures).
    Structural errors are folded into the report with exit code 3."""
    handler = _HANDLERS[cmd]
    try:
        return handler(cfg)
    except _STRUCTURAL as exc:
        out = _base_report(cmd, cfg)
        out["error"] = str(exc)
        out["error_kind"] = type(exc).__name__
        rep = getattr(exc, "report", None)
        if rep is not None:
            out["monodromy_deviation_max"] = float(np.max(rep.deviations))
        return 3, out, [], []


def emit_outputs(result, cfg: RunConfig, out_dir: str) -> list:
    """Write the JSON report, CSV tables, and figures; returns paths."""
    code, rep, tables, figs = result
    report.ensure_dir(out_dir)
    rep = dict(rep)
    rep["exit_code"] = code
    paths = []
    cmd = rep["command"]
    for name, header, rows in tables:
        paths.append(report.write_csv(os.path.join(out_dir, f"{name}.csv"),
                                      header, rows))
    if cfg.outputs.get("figures", True):
        for name, kind, payload, tol in figs:
            png = os.path.join(out_dir, f"{name}.png")
            try:
                if kind == "residuals":
                    report.figure_residuals(png, payload, name, tolerance=tol)
                elif kind == "points":
                    report.figure_point_field(png, cfg.domain.nodes, payload,
                                              name)
                elif kind == "development":
                    arc, orbit = payload
                    report.figure_development(png, arc, orbit, name)
                paths.append(png)
            except Exception as exc:   # figures must never break a run
                log.warning("figure %s failed: %s", name, exc)
    rep["outputs"] = [os.path.basename(p) for p in paths]
    paths.insert(0, report.write_json(os.path.join(out_dir,
                                                   f"{cmd}_report.json"), rep))
    return paths


def _setup_logging():
    level = os.environ.get("CARTANKIT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(
        prog="cartankit",
        description="Maurer-Cartan form validation, development, monodromy, "
                    "and primitive reconstruction")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--step", type=float, default=None,
                        help="integrator step override")
    parser.add_argument("--tol", type=float, default=None,
                        help="triviality tolerance override")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized property commands")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        if args.step is not None:
            cfg = replace(cfg, tolerances={**cfg.tolerances, "step": args.step})
        if args.tol is not None:
            cfg = replace(cfg, tolerances={**cfg.tolerances,
                                           "triviality_tol": args.tol})
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        result = run_command(args.command, cfg)
        out_dir = args.out or cfg.outputs.get("dir", "out")
        paths = emit_outputs(result, cfg, out_dir)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CartanKitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3

    code, rep, _, _ = result
    status = {0: "pass", 2: "quantitative failure", 3: "structural failure"}
    print(f"{args.command}: {status.get(code, code)} "
          f"(report: {paths[0]})")
    for key in ("max_error", "max_residual", "flatness_max", "closure_error",
                "err_est"):
        if key in rep:
            print(f"  {key} = {rep[key]:.6e}")
    if "trivial" in rep:
        print(f"  monodromy trivial: {rep['trivial']}")
    return code


if __name__ == "__main__":
    sys.exit(main())
