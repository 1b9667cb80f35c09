"""Concrete algebroid fibers, logarithmic derivatives, and form residuals.

Every form handled here is an anchored sub-bundle of g (+) T-Sigma with the
g-projection as the form: an *ordinary* field stores the coefficients of
the form on coordinate directions per node (the fiber is the graph of the
form over the full tangent space), a *generalized* field stores an explicit
fiber per node. Pullback fibers of a map f into M collect the pairs
(xi, v) with generator(xi, f(x)) = Tf v; their frames are built as sigma
minimum-norm lifts of the coordinate directions followed by an orthonormal
basis of the isotropy kernel, so ``kernel_index`` is always the trailing
block.

Evaluators are vectorized callables over stacked (and complex) parameter
points; analytic tangent maps are taken by complex-step differentiation,
sampled ones by second-order grid stencils.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import klein, liegroup, mesh as meshmod
from .errors import (AxiomViolated, NotInAlgebra, NotInFiber, NotTransitive,
                     RankDeficient)
from .klein import GeometrySpec
from .liegroup import GroupSpec
from .mesh import MeshDomain

_CSTEP = 1e-30


def complex_step_partials(fn, pts: np.ndarray, sigma: int) -> np.ndarray:
    """Exact-to-roundoff partial derivatives of an analytic vectorized map:
    returns (..., sigma, *out_shape)."""
    pts = np.asarray(pts, dtype=float)
    outs = []
    for a in range(sigma):
        z = pts.astype(complex)
        z[..., a] += 1j * _CSTEP
        outs.append(np.imag(np.asarray(fn(z))) / _CSTEP)
    return np.stack(outs, axis=pts.ndim - 1)


@dataclass(frozen=True)
class AlgebroidFiber:
    """One fiber of an anchored sub-bundle of g (+) T-Sigma.

    Frame row j is the pair (frame_g[j], frame_v[j]); rows listed in
    ``kernel_index`` have zero anchor part and span the isotropy.
    """

    x: np.ndarray
    frame_g: np.ndarray      # (r, d)
    frame_v: np.ndarray      # (r, sigma)
    kernel_index: tuple

    @property
    def rank(self) -> int:
        return self.frame_g.shape[0]

    def kernel_g(self) -> np.ndarray:
        return self.frame_g[list(self.kernel_index)]


@dataclass(frozen=True)
class MapField:
    """Sampled map from a mesh into a point space or into the group.

    ``evaluator``, when present, must be vectorized and complex-safe; it
    overrides the samples wherever derivatives or off-node values are
    needed.
    """

    domain: MeshDomain
    geometry: GeometrySpec
    values: np.ndarray              # (N, p) points or (N, n, n) matrices
    target: str = "point"           # point | group
    evaluator: object = None

    def at(self, pts):
        if self.evaluator is not None:
            return np.asarray(self.evaluator(pts))
        if self.target == "group":
            n = self.values.shape[-1]
            flat = meshmod.grid_interpolate(
                self.domain, self.values.reshape(len(self.values), -1), pts)
            return flat.reshape(np.shape(pts)[:-1] + (n, n))
        return meshmod.grid_interpolate(self.domain, self.values, pts)


@dataclass(frozen=True)
class MCFormField:
    """Ordinary or generalized Maurer-Cartan form on a mesh domain."""

    domain: MeshDomain
    geometry: GeometrySpec
    kind: str                        # ordinary | generalized
    coeffs: np.ndarray = None        # ordinary: (N, sigma, d)
    evaluator: object = None         # ordinary: pts -> (..., sigma, d)
    frames_g: np.ndarray = None      # generalized: (N, r, d)
    frames_v: np.ndarray = None      # generalized: (N, r, sigma)
    kernel_index: tuple = ()
    fiber_evaluator: object = None   # pts -> (frame_g, frame_v)
    source_map: MapField = None

    @property
    def group_spec(self) -> GroupSpec:
        return self.geometry.group

    @property
    def sigma(self) -> int:
        return self.domain.sigma

    @property
    def has_evaluator(self) -> bool:
        return (self.evaluator is not None if self.kind == "ordinary"
                else self.fiber_evaluator is not None)

    def coeff_at(self, pts, nearest_nodes=None):
        if self.kind != "ordinary":
            raise ValueError("coeff_at is only defined for ordinary forms")
        if self.evaluator is not None:
            return np.asarray(self.evaluator(pts))
        flat = meshmod.grid_interpolate(
            self.domain, self.coeffs.reshape(len(self.coeffs), -1), pts)
        return flat.reshape(np.shape(pts)[:-1] + self.coeffs.shape[1:])

    def fiber_at(self, pts):
        """(frame_g, frame_v, kernel_mask) stacked over query points."""
        sigma = self.sigma
        if self.kind == "ordinary":
            fg = self.coeff_at(pts)
            lead = fg.shape[:-2]
            fv = np.broadcast_to(np.eye(sigma), lead + (sigma, sigma))
            return fg, fv, np.zeros(sigma, dtype=bool)
        if self.fiber_evaluator is not None:
            fg, fv = self.fiber_evaluator(pts)
        else:
            n = len(self.frames_g)
            fg = meshmod.grid_interpolate(
                self.domain, self.frames_g.reshape(n, -1), pts)
            fg = fg.reshape(np.shape(pts)[:-1] + self.frames_g.shape[1:])
            fv = meshmod.grid_interpolate(
                self.domain, self.frames_v.reshape(n, -1), pts)
            fv = fv.reshape(np.shape(pts)[:-1] + self.frames_v.shape[1:])
        mask = np.zeros(fg.shape[-2], dtype=bool)
        mask[list(self.kernel_index)] = True
        return fg, fv, mask

    def node_fiber(self, i: int) -> AlgebroidFiber:
        if self.kind == "ordinary":
            sigma = self.sigma
            return AlgebroidFiber(x=self.domain.nodes[i],
                                  frame_g=self.coeffs[i],
                                  frame_v=np.eye(sigma), kernel_index=())
        return AlgebroidFiber(x=self.domain.nodes[i],
                              frame_g=self.frames_g[i],
                              frame_v=self.frames_v[i],
                              kernel_index=self.kernel_index)


def ordinary_form(domain: MeshDomain, geometry: GeometrySpec,
                  coeffs: np.ndarray = None, evaluator=None) -> MCFormField:
    """Ordinary form from per-node coefficients and/or an analytic
    evaluator ``pts -> (..., sigma, d)``."""
    if coeffs is None:
        if evaluator is None:
            raise ValueError("need coefficients or an evaluator")
        coeffs = np.asarray(evaluator(domain.nodes))
    return MCFormField(domain=domain, geometry=geometry, kind="ordinary",
                       coeffs=np.asarray(coeffs, dtype=float),
                       evaluator=evaluator)


# ----------------------------------------------------- logarithmic derivative


def _map_partials(f: MapField) -> np.ndarray:
    """Tangent data of a map field at the nodes: (N, sigma, *value_shape)."""
    if f.evaluator is not None:
        return complex_step_partials(f.evaluator, f.domain.nodes, f.domain.sigma)
    return meshmod.grid_partials(f.domain, f.values)


def log_derivative_ordinary(f: MapField, spec: GroupSpec = None) -> MCFormField:
    """Right logarithmic derivative of a group-valued map as an ordinary
    form: omega(d_j) = (d_j f) f^-1 expanded in the basis.

    Raises NotInAlgebra when the derivative leaves span(basis), which
    signals values that are not actually group elements.
    """
    if f.target != "group":
        raise ValueError("log_derivative_ordinary needs a group-valued map")
    spec = spec or f.geometry.group
    partials = _map_partials(f)                       # (N, sigma, n, n)
    inv = np.linalg.inv(f.values)
    deriv = partials @ inv[:, None]
    coeffs, resid = liegroup.project_to_algebra(spec, deriv)
    worst = float(np.max(resid))
    scale = max(1.0, float(np.max(np.abs(deriv))))
    if worst > 1e-6 * scale:
        raise NotInAlgebra(
            f"logarithmic derivative leaves span(basis): residual {worst:.3e}",
            residual=worst)

    evaluator = None
    if f.evaluator is not None:
        def evaluator(pts, _f=f.evaluator, _spec=spec):
            pts = np.asarray(pts)
            vals = np.asarray(_f(pts))
            part = complex_step_partials(_f, pts, pts.shape[-1])
            dd = part @ np.linalg.inv(vals)[..., None, :, :]
            cc, _ = liegroup.project_to_algebra(_spec, dd)
            return cc

    geometry = f.geometry if f.geometry.action == "group" else \
        klein.group_geometry(spec)
    return MCFormField(domain=f.domain, geometry=geometry, kind="ordinary",
                       coeffs=coeffs, evaluator=evaluator, source_map=f)


def _fiber_data(geo: GeometrySpec, values: np.ndarray, tangents: np.ndarray):
    """Pullback fiber frames over stacked points.

    ``values``: (..., p) image points, ``tangents``: (..., sigma, p).
    Returns (frame_g, frame_v, kernel_dim): sigma lifts then kernel rows.
    """
    sigma = tangents.shape[-2]
    G = klein.generator_matrix(geo, values)           # (..., p, d)
    d = G.shape[-1]
    u, s, vt = np.linalg.svd(G)
    smax = np.maximum(s[..., :1], 1e-300)
    ranks = np.sum(s > smax * geo.group.lin_tol * max(G.shape[-2:]), axis=-1)
    if np.min(ranks) < geo.dim_m:
        raise NotTransitive(
            f"{geo.name}: generator rank below dim M along the map")
    k = d - geo.dim_m
    kernels = vt[..., geo.dim_m:, :]                  # (..., k, d)
    lifts = np.swapaxes(np.linalg.pinv(G) @ np.swapaxes(tangents, -1, -2),
                        -1, -2)                       # (..., sigma, d)
    lead = values.shape[:-1]
    frame_g = np.concatenate([lifts, kernels], axis=-2)
    eye = np.broadcast_to(np.eye(sigma), lead + (sigma, sigma))
    zeros = np.zeros(lead + (k, sigma))
    frame_v = np.concatenate([eye, zeros], axis=-2)
    return frame_g, frame_v, k


def pullback_fiber(f: MapField, x: int, geo: GeometrySpec = None) -> AlgebroidFiber:
    """Fiber of the pullback algebroid of f at mesh node ``x``: all pairs
    (xi, v) whose generator at f(x) matches Tf v."""
    geo = geo or f.geometry
    tangents = _map_partials(f)[x][None]
    fg, fv, k = _fiber_data(geo, f.values[x][None], tangents)
    sigma = f.domain.sigma
    return AlgebroidFiber(x=f.domain.nodes[x], frame_g=fg[0], frame_v=fv[0],
                          kernel_index=tuple(range(sigma, sigma + k)))


def pullback_form(f: MapField, geo: GeometrySpec = None) -> MCFormField:
    """Generalized form delta-f on the full mesh: the pullback fibers with
    the g-projection. Raises RankDeficient when the tangent rank of f jumps
    between nodes."""
    geo = geo or f.geometry
    if f.target == "group":
        return log_derivative_ordinary(f)
    tangents = _map_partials(f)                        # (N, sigma, p)
    sv = np.linalg.svd(tangents, compute_uv=False)
    scale = max(float(np.max(sv)), 1e-300)
    ranks = np.sum(sv > 1e-8 * scale, axis=-1)
    if np.min(ranks) != np.max(ranks):
        node = int(np.argmin(ranks))
        raise RankDeficient(
            f"tangent rank of f drops from {int(np.max(ranks))} to "
            f"{int(ranks[node])} at node {node}", node=node)
    fg, fv, k = _fiber_data(geo, f.values, tangents)
    sigma = f.domain.sigma

    fiber_evaluator = None
    if f.evaluator is not None:
        def fiber_evaluator(pts, _f=f, _geo=geo):
            pts = np.asarray(pts)
            vals = np.asarray(_f.evaluator(pts))
            tang = complex_step_partials(_f.evaluator, pts, pts.shape[-1])
            out_g, out_v, _ = _fiber_data(_geo, vals, tang)
            return out_g, out_v

    return MCFormField(domain=f.domain, geometry=geo, kind="generalized",
                       frames_g=fg, frames_v=fv,
                       kernel_index=tuple(range(sigma, sigma + k)),
                       fiber_evaluator=fiber_evaluator, source_map=f)


def log_derivative(f: MapField) -> MCFormField:
    """Logarithmic derivative of a map field: ordinary for group targets,
    pullback fibers for point targets."""
    if f.target == "group":
        return log_derivative_ordinary(f)
    return pullback_form(f)


# ------------------------------------------------------------- residuals


def _fiber_distance(frame_g, frame_v, vec_g, vec_v):
    """Max-norm distance of (vec_g, vec_v) from span of the fiber frame,
    computed per stacked point by least squares in g (+) R^sigma."""
    stacked = np.concatenate([frame_g, frame_v], axis=-1)
    target = np.concatenate([vec_g, vec_v], axis=-1)[..., None]
    basis_t = np.swapaxes(stacked, -1, -2)
    coeff = np.linalg.pinv(basis_t) @ target
    return np.max(np.abs(basis_t @ coeff - target), axis=(-2, -1))


def morphism_residual(omega: MCFormField, geo: GeometrySpec = None) -> np.ndarray:
    """Per-node flatness residual of the form.

    Ordinary: the structure-equation defect ``d_i w_j - d_j w_i +
    [w_i, w_j]`` over coordinate bivectors (second-order stencils), maxed
    over pairs and components. Generalized: bracket-closure defect of the
    canonical coordinate-lift and kernel sections against the fiber, plus
    the anchor-compatibility defect against the source map when present.
    """
    geo = geo or omega.geometry
    spec = geo.group
    sigma = omega.sigma
    n_nodes = omega.domain.n_nodes

    if omega.kind == "ordinary":
        coeffs = omega.coeffs                            # (N, sigma, d)
        partials = meshmod.grid_partials(omega.domain, coeffs)  # (N, a, j, d)
        out = np.zeros(n_nodes)
        for i in range(sigma):
            for j in range(i + 1, sigma):
                resid = (partials[:, i, j] - partials[:, j, i]
                         + liegroup.bracket(spec, coeffs[:, i], coeffs[:, j]))
                out = np.maximum(out, np.max(np.abs(resid), axis=-1))
        return out

    # generalized: canonical sections are the sigma coordinate lifts and the
    # kernel projections of the base-node kernel frame
    lifts = omega.frames_g[:, :sigma]                    # (N, sigma, d)
    kernels = omega.frames_g[:, sigma:]                  # (N, k, d)
    k = kernels.shape[1]
    proj = np.swapaxes(kernels, -1, -2) @ kernels        # (N, d, d)
    kappa_ref = kernels[omega.domain.x0]                 # (k, d)
    kappa = np.einsum("nab,kb->nka", proj, kappa_ref)    # (N, k, d)

    sections = np.concatenate([lifts, kappa], axis=1)    # (N, s, d)
    anchors = np.concatenate(
        [np.broadcast_to(np.eye(sigma), (n_nodes, sigma, sigma)),
         np.zeros((n_nodes, k, sigma))], axis=1)
    if omega.fiber_evaluator is not None:
        # analytic fibers: evaluate the canonical sections at tightly
        # shifted points instead of differencing across grid cells
        h_fd = 1e-5

        def sections_at(pts):
            fg, _ = omega.fiber_evaluator(pts)
            lifts_p = fg[..., :sigma, :]
            ker_p = fg[..., sigma:, :]
            proj_p = np.swapaxes(ker_p, -1, -2) @ ker_p
            kap_p = np.einsum("...ab,kb->...ka", proj_p, kappa_ref)
            return np.concatenate([lifts_p, kap_p], axis=-2)

        cols = []
        for a in range(sigma):
            shift = np.zeros(sigma)
            shift[a] = h_fd
            plus = sections_at(omega.domain.nodes + shift)
            minus = sections_at(omega.domain.nodes - shift)
            cols.append((plus - minus) / (2 * h_fd))
        dsec = np.stack(cols, axis=1)
    else:
        dsec = meshmod.grid_partials(
            omega.domain, sections.reshape(n_nodes, -1)
        ).reshape(n_nodes, sigma, sections.shape[1], spec.d)

    out = np.zeros(n_nodes)
    s_count = sections.shape[1]
    for i in range(s_count):
        for j in range(i + 1, s_count):
            # nabla_{#Xi} Xj - nabla_{#Xj} Xi + {Xi, Xj}; anchor parts of
            # the canonical sections are constant so their Lie bracket is 0
            di = np.einsum("na,najd->njd", anchors[:, i], dsec)[:, j]
            dj = np.einsum("na,najd->njd", anchors[:, j], dsec)[:, i]
            g_part = di - dj + liegroup.bracket(spec, sections[:, i],
                                                sections[:, j])
            dist = _fiber_distance(omega.frames_g, omega.frames_v,
                                   g_part, np.zeros((n_nodes, sigma)))
            out = np.maximum(out, dist)

    if omega.source_map is not None:
        f = omega.source_map
        tangents = _map_partials(f)                      # (N, sigma, p)
        gen = klein.generator_matrix(geo, f.values)      # (N, p, d)
        push = np.einsum("npd,nrd->nrp", gen, omega.frames_g)
        pull = np.einsum("nsp,nrs->nrp", tangents, omega.frames_v)
        out = np.maximum(out, np.max(np.abs(push - pull), axis=(-2, -1)))
    return out


# ----------------------------------------------------------- axiom report


@dataclass(frozen=True)
class AxiomReport:
    m1_ok: np.ndarray
    m1_residual: np.ndarray
    m2_ok: np.ndarray
    m2_residual: np.ndarray
    rank: np.ndarray
    rank_lower: int
    rank_upper: int
    maximal: bool
    m3_node: int
    m3_point: np.ndarray
    m3_residual: float
    m3prime_ok: np.ndarray
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def anchored_point_solve(geo: GeometrySpec, kernel_g: np.ndarray,
                         hint: np.ndarray = None):
    """Point m whose isotropy algebra contains the given kernel vectors:
    the common zero of their generator fields, by catalog closed forms.
    Returns (m, residual) or (None, inf)."""
    hint = geo.basepoint if hint is None else np.asarray(hint, dtype=float)
    k = kernel_g.shape[0]
    if k == 0:
        return hint.copy(), 0.0
    basis = geo.group.basis
    p = geo.p
    if geo.action == "affine":
        A = np.einsum("kd,dij->kij", kernel_g, basis[:, :p, :p]).reshape(k * p, p)
        b = np.einsum("kd,di->ki", kernel_g, basis[:, :p, p]).reshape(k * p)
        m, *_ = np.linalg.lstsq(A, -b, rcond=None)
        null = klein._nullspace(A, geo.group.lin_tol)
        if null.shape[0]:
            m = m + null.T @ (null @ (hint - m))
        residual = float(np.max(np.abs(A @ m + b))) if k else 0.0
        return m, residual
    if geo.action in ("linear", "sphere"):
        A = np.einsum("kd,dij->kij", kernel_g, basis).reshape(k * p, p)
        null = klein._nullspace(A, geo.group.lin_tol)
        if null.shape[0] == 0:
            return None, float("inf")
        m = null.T @ (null @ hint)
        nm = np.linalg.norm(m)
        if geo.constraint == "unit_norm":
            if nm < 1e-9:
                m = null[0]
            else:
                m = m / nm
        residual = float(np.max(np.abs(A @ m)))
        return m, residual
    if geo.action == "group":
        if float(np.max(np.abs(kernel_g))) < geo.group.lin_tol:
            return hint.copy(), 0.0
        return None, float("inf")
    raise ValueError(f"unknown action {geo.action!r}")


def axiom_report(omega: MCFormField, geo: GeometrySpec = None,
                 m0_hint: np.ndarray = None, strict: bool = False) -> AxiomReport:
    """Check the Maurer-Cartan axioms node by node: anchor surjectivity,
    injectivity of the form on the isotropy, the anchored-point solve at
    the base node, the rank bounds, and (for maximal forms) the pointwise
    isotropy-dimension equality. ``strict`` promotes the first violation to
    an AxiomViolated error."""
    geo = geo or omega.geometry
    n_nodes = omega.domain.n_nodes
    sigma = omega.sigma
    d = geo.group.d
    tol = geo.group.lin_tol

    m1_res = np.zeros(n_nodes)
    m2_res = np.zeros(n_nodes)
    m1_ok = np.ones(n_nodes, dtype=bool)
    m2_ok = np.ones(n_nodes, dtype=bool)
    rank = np.zeros(n_nodes, dtype=int)
    violations = []
    for i in range(n_nodes):
        fib = omega.node_fiber(i)
        rank[i] = fib.rank
        sv = np.linalg.svd(fib.frame_v, compute_uv=False)
        m1_res[i] = float(sv[min(sigma, len(sv)) - 1]) if len(sv) >= sigma else 0.0
        m1_ok[i] = m1_res[i] > tol
        if not m1_ok[i]:
            violations.append(("M1", i))
        ker = fib.kernel_g()
        if ker.shape[0]:
            svk = np.linalg.svd(ker, compute_uv=False)
            m2_res[i] = float(svk[-1])
            m2_ok[i] = m2_res[i] > tol
        if not m2_ok[i]:
            violations.append(("M2", i))

    x0 = omega.domain.x0
    fib0 = omega.node_fiber(x0)
    m3_point, m3_res = anchored_point_solve(geo, fib0.kernel_g(), hint=m0_hint)
    if m3_point is None or m3_res > 1e3 * geo.point_tol:
        violations.append(("M3", x0))

    lower, upper = d - geo.dim_m, d - geo.dim_m + sigma
    for i in range(n_nodes):
        if not (lower <= rank[i] <= upper):
            violations.append(("rank", i))
    maximal = bool(np.all(rank == upper)) and not violations

    m3prime_ok = np.ones(n_nodes, dtype=bool)
    if maximal:
        iso_dim = d - geo.dim_m
        for i in range(n_nodes):
            fib = omega.node_fiber(i)
            ker = fib.kernel_g()
            m_i, res_i = anchored_point_solve(geo, ker)
            good = (m_i is not None and res_i <= 1e3 * geo.point_tol
                    and ker.shape[0] == iso_dim)
            m3prime_ok[i] = good
            if not good:
                violations.append(("M3'", i))

    report = AxiomReport(m1_ok=m1_ok, m1_residual=m1_res, m2_ok=m2_ok,
                         m2_residual=m2_res, rank=rank, rank_lower=lower,
                         rank_upper=upper, maximal=maximal, m3_node=x0,
                         m3_point=m3_point, m3_residual=float(m3_res),
                         m3prime_ok=m3prime_ok, violations=tuple(violations))
    if strict and violations:
        axiom, node = violations[0]
        raise AxiomViolated(f"axiom {axiom} fails at node {node}",
                            axiom=axiom, node=node)
    return report


# ------------------------------------------------------- section calculus


def bracket_sections(X, Y, omega: MCFormField, fd_step: float = 1e-5,
                     check: bool = True):
    """Bracket of two smooth sections given as callables x -> (xi, v).

    The g-part is the flat-connection formula (directional derivatives of
    the g coefficients along the anchors plus the pointwise algebra
    bracket); the anchor part is the finite-difference Jacobi-Lie bracket
    of the anchor fields. When ``check`` is set, each evaluation verifies
    the result lies in the fiber and raises NotInFiber otherwise.
    """
    spec = omega.group_spec

    def section(x):
        x = np.asarray(x, dtype=float)
        xg, xv = (np.asarray(a, dtype=float) for a in X(x))
        yg, yv = (np.asarray(a, dtype=float) for a in Y(x))

        def dd(f, direction):
            if np.max(np.abs(direction)) == 0.0:
                g0, v0 = f(x)
                return np.zeros_like(np.asarray(g0, dtype=float)), \
                    np.zeros_like(np.asarray(v0, dtype=float))
            fp = f(x + fd_step * direction)
            fm = f(x - fd_step * direction)
            return (np.asarray(fp[0], dtype=float) - np.asarray(fm[0], dtype=float)) / (2 * fd_step), \
                   (np.asarray(fp[1], dtype=float) - np.asarray(fm[1], dtype=float)) / (2 * fd_step)

        dy_g, dy_v = dd(Y, xv)
        dx_g, dx_v = dd(X, yv)
        g_part = dy_g - dx_g + liegroup.bracket(spec, xg, yg)
        v_part = dy_v - dx_v
        if check:
            fg, fv, _ = omega.fiber_at(x[None])
            dist = float(_fiber_distance(fg[0], fv[0], g_part, v_part))
            if dist > 1e-3:
                raise NotInFiber(
                    f"section bracket leaves the fiber (distance {dist:.3e})",
                    residual=dist)
        return g_part, v_part

    return section


@dataclass(frozen=True)
class AnchorRightInverse:
    """Least-squares right inverse of the anchor at a point: maps tangent
    vectors to minimum-norm fiber elements."""

    fiber: AlgebroidFiber
    coeff_map: np.ndarray      # (r, sigma): v -> frame coefficients

    def __call__(self, v: np.ndarray):
        c = self.coeff_map @ np.asarray(v, dtype=float)
        return c @ self.fiber.frame_g, c @ self.fiber.frame_v


def anchor_right_inverse(omega: MCFormField, x: int) -> AnchorRightInverse:
    """Right inverse of the anchor at node ``x``; requires transitivity
    there."""
    fib = omega.node_fiber(x)
    vT = fib.frame_v.T                      # (sigma, r)
    sv = np.linalg.svd(vT, compute_uv=False)
    if len(sv) < omega.sigma or sv[min(omega.sigma, len(sv)) - 1] <= omega.geometry.group.lin_tol:
        raise NotTransitive(f"anchor not onto at node {x}")
    coeff_map = np.linalg.pinv(vT)          # (r, sigma)
    return AnchorRightInverse(fiber=fib, coeff_map=coeff_map)


# ------------------------------------------------------ sign calibration


def calibrate_bracket_sign(spec: GroupSpec):
    """Select the matrix-level bracket sign by the self-consistency
    criterion: the structure-equation residual of a pulled-back canonical
    form must vanish at the discretization rate.

    Returns (calibrated GroupSpec, diagnostics). Abelian algebras keep the
    incoming sign (both residuals vanish).
    """
    basis = spec.basis
    d = spec.d
    comm = basis[:, None] @ basis[None, :] - basis[None, :] @ basis[:, None]
    norms = np.max(np.abs(comm), axis=(-2, -1))
    i, j = np.unravel_index(int(np.argmax(norms)), (d, d))
    diag = {"pair": (int(i), int(j)), "residual": {}}
    if norms[i, j] < 1e-14:
        diag["abelian"] = True
        return spec, diag

    Ei, Ej = basis[i], basis[j]

    def f_eval(pts):
        pts = np.asarray(pts)
        a = pts[..., 0][..., None, None] * Ei
        b = pts[..., 1][..., None, None] * Ej
        return liegroup.expm_stack(a) @ liegroup.expm_stack(b)

    domain = meshmod.grid_mesh([(0.0, 0.4), (0.0, 0.4)], [9, 9])
    values = f_eval(domain.nodes)
    best = None
    for sign in (-1.0, 1.0):
        variant = liegroup.make_group_spec(spec.name, basis,
                                           membership=spec.membership,
                                           lin_tol=spec.lin_tol,
                                           membership_tol=spec.membership_tol,
                                           bracket_sign=sign)
        f = MapField(domain=domain, geometry=klein.group_geometry(variant),
                     values=values, target="group", evaluator=f_eval)
        res = float(np.max(morphism_residual(log_derivative_ordinary(f, variant))))
        diag["residual"][sign] = res
        if best is None or res < best[1]:
            best = (variant, res, sign)
    diag["sign"] = best[2]
    return best[0], diag
