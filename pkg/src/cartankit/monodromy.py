"""Pointed monodromy of a form on a meshed domain.

Routes through the mesh are developed edge by edge: every edge is its own
A-path on [0, 1] (so the concatenation identity gives the route development
as an ordered product) and all edges of a route are integrated as one
batched stack. The integrator step is interpreted in domain arc length, so
a configured step of 1e-3 puts ~16 Runge-Kutta steps on a 1/64 grid edge.

The monodromy is evaluated on the winding-nontrivial fundamental cycles
(the mesh-scale generators of the fundamental group); contractible
fundamental cycles develop trivially for flat forms and are exercised by
the reconstruction cycle residuals instead. Pass ``include_contractible``
to fold them into the report as a flatness integration test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebroid, klein, liegroup, paths
from .errors import BasepointMismatch
from .klein import GeometrySpec
from .mesh import MeshDomain, Route, cycle_basis  # noqa: F401  (re-export)


@dataclass(frozen=True)
class MonodromyReport:
    """Per-generator development data and the triviality verdict."""

    developments: np.ndarray      # (C, n, n)
    images: np.ndarray            # (C, p)
    deviations: np.ndarray        # (C,)
    windings: np.ndarray          # (C, sigma)
    trivial: bool
    m0: np.ndarray
    x0: int
    tolerance: float

    @property
    def n_cycles(self) -> int:
        return len(self.deviations)


def _edge_matrix_fn(omega, edge_ids, dirs):
    """Batched realized-matrix evaluator for a stack of edges, each
    parameterized on [0, 1]."""
    mesh = omega.domain
    spec = omega.group_spec
    edge_ids = np.asarray(edge_ids, dtype=int)
    dirs = np.asarray(dirs, dtype=int)
    tails = np.where(dirs > 0, mesh.edges[edge_ids, 0], mesh.edges[edge_ids, 1])
    heads = np.where(dirs > 0, mesh.edges[edge_ids, 1], mesh.edges[edge_ids, 0])
    starts = mesh.nodes[tails]
    disps = dirs[:, None] * mesh.edge_disp[edge_ids]

    if omega.has_evaluator:
        if omega.kind == "ordinary":
            def mat_fn(times):
                pos = starts + times[:, None, None] * disps
                coeffs = omega.coeff_at(pos)                   # (T, B, s, d)
                xi = np.einsum("tbsd,bs->tbd", coeffs, disps)
                return liegroup.realize(spec, xi)
        else:
            def mat_fn(times):
                pos = starts + times[:, None, None] * disps
                fg, fv, _ = omega.fiber_at(pos)
                vel = np.broadcast_to(disps, pos.shape)
                xi, _ = paths.lift_through_anchor(fg, fv, vel)
                return liegroup.realize(spec, xi)
        return mat_fn, np.max(np.linalg.norm(disps, axis=1), initial=0.0)

    # node-sampled forms: endpoint values, linear along the edge
    if omega.kind == "ordinary":
        xi0 = np.einsum("bsd,bs->bd", omega.coeffs[tails], disps)
        xi1 = np.einsum("bsd,bs->bd", omega.coeffs[heads], disps)
    else:
        fg, fv = omega.frames_g, omega.frames_v
        xi0, _ = paths.lift_through_anchor(fg[tails], fv[tails], disps)
        xi1, _ = paths.lift_through_anchor(fg[heads], fv[heads], disps)

    def mat_fn(times):
        xi = xi0 + times[:, None, None] * (xi1 - xi0)
        return liegroup.realize(spec, xi)

    return mat_fn, np.max(np.linalg.norm(disps, axis=1), initial=0.0)


def develop_edges(omega, edge_ids, dirs, step: float = 1e-3) -> np.ndarray:
    """Develop a stack of single edges from the identity: (B, n, n)."""
    if len(edge_ids) == 0:
        n = omega.group_spec.n
        return np.zeros((0, n, n))
    mat_fn, max_len = _edge_matrix_fn(omega, edge_ids, dirs)
    substeps = max(1, int(np.ceil(max_len / step)))
    return paths.integrate_matrix_ode(mat_fn, [0.0, 1.0], [substeps],
                                      record=False)[0]


def develop_route(omega, route: Route, step: float = 1e-3) -> np.ndarray:
    """Development along a route: ordered product of the per-edge
    developments (later edges multiply from the left)."""
    if not route:
        return np.eye(omega.group_spec.n)
    edge_ids = [e for e, _ in route]
    dirs = [d for _, d in route]
    devs = develop_edges(omega, edge_ids, dirs, step=step)
    out = devs[0]
    for g in devs[1:]:
        out = g @ out
    return out


def develop_along(omega, route, geo: GeometrySpec = None,
                  step: float = 1e-3) -> np.ndarray:
    """Development of the lifted A-path along a node path (or an edge
    route) in the mesh."""
    if route and isinstance(route[0], (int, np.integer)):
        route = omega.domain.route_from_nodes(list(route))
    return develop_route(omega, route, step=step)


def check_anchored_basepoint(omega, m0: np.ndarray, geo: GeometrySpec = None,
                             tol: float = 1e-8) -> float:
    """Verify the anchored condition at the base node: the form of every
    kernel vector must lie in the isotropy algebra at m0. Raises
    BasepointMismatch naming the violating kernel vector."""
    geo = geo or omega.geometry
    fib = omega.node_fiber(omega.domain.x0)
    kernels = fib.kernel_g()
    if kernels.shape[0] == 0:
        return 0.0
    gen = klein.generator_matrix(geo, np.asarray(m0, dtype=float))
    worst = 0.0
    for j, kappa in enumerate(kernels):
        r = float(np.max(np.abs(gen @ kappa)))
        if r > tol:
            raise BasepointMismatch(
                f"kernel vector {j} at the base node does not stabilize m0 "
                f"(generator residual {r:.3e})", kernel_vector=kappa, residual=r)
        worst = max(worst, r)
    return worst


def pointed_monodromy(omega, mesh: MeshDomain = None, m0: np.ndarray = None,
                      geo: GeometrySpec = None, step: float = 1e-3,
                      triviality_tol: float = 1e-6,
                      include_contractible: bool = False,
                      basepoint_tol: float = 1e-8,
                      check_axioms: bool = True) -> MonodromyReport:
    """Image of the fundamental-group generators under development acting
    on m0, with the triviality verdict.

    Preconditions are enforced: the axiom report must pass and m0 must
    satisfy the anchored condition at the base node.
    """
    mesh = mesh or omega.domain
    geo = geo or omega.geometry
    m0 = np.asarray(m0, dtype=float)
    klein.point_check(geo, m0)
    if check_axioms:
        algebroid.axiom_report(omega, geo, m0_hint=m0, strict=True)
    check_anchored_basepoint(omega, m0, geo, tol=basepoint_tol)

    cycles = mesh.cycles if include_contractible else mesh.monodromy_cycles
    devs = []
    images = []
    deviations = []
    windings = []
    for route in cycles:
        g = develop_route(omega, route, step=step)
        image = klein.act(geo, g, m0, check=False)
        devs.append(g)
        images.append(image)
        deviations.append(float(np.max(np.abs(image - m0))))
        windings.append(mesh.route_winding(route))
    n = omega.group_spec.n
    devs = np.array(devs) if devs else np.zeros((0, n, n))
    images = np.array(images) if images else np.zeros((0, geo.p))
    deviations = np.array(deviations)
    windings = np.array(windings) if windings else np.zeros((0, mesh.sigma))
    trivial = bool(np.all(deviations <= triviality_tol)) if len(deviations) else True
    return MonodromyReport(developments=devs, images=images,
                           deviations=deviations, windings=windings,
                           trivial=trivial, m0=m0, x0=mesh.x0,
                           tolerance=triviality_tol)
