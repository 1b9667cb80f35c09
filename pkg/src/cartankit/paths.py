"""A-paths, g-paths, and their development into the group.

An :class:`APath` stores coefficient samples ``xi`` (values of the form
composed with the path) on a strictly increasing grid over [0, 1], the
covered domain path ``gamma``, and optional analytic evaluators which take
precedence over the samples. Development solves the right-logarithmic-
derivative equation ``g'(t) = Xi(t) g(t)``, ``g(0) = I`` with a 4th-order
Runge-Kutta-Munthe-Kaas scheme: stages are corrected by the truncated
inverse of the exponential differential (commutator terms up to second
order) and each step updates by a matrix exponential, so every sample is a
group element up to the accuracy of ``expm``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import liegroup
from .errors import NotComposable, StepTooLarge
from .liegroup import GroupSpec, expm_stack


@dataclass(frozen=True)
class PathPolyline:
    """Sampled path in a parameter domain; ``velocity`` holds d(gamma)/dt
    per sample when known analytically (piecewise data otherwise)."""

    t: np.ndarray                 # (K,)
    points: np.ndarray            # (K, sigma)
    velocity: np.ndarray = None   # (K, sigma) optional
    point_fn: object = None       # t -> (..., sigma)
    velocity_fn: object = None


@dataclass(frozen=True)
class APath:
    t: np.ndarray                 # (K,) grid on [0, 1]
    xi: np.ndarray                # (K, d) form-along-path coefficients
    gamma: np.ndarray             # (K, sigma) covered path
    meta: str = ""
    xi_fn: object = None          # t -> (..., d), overrides samples
    gamma_fn: object = None
    anchor_residual: float = 0.0


@dataclass(frozen=True)
class DevelopmentResult:
    g_samples: np.ndarray         # (K, n, n), g_samples[0] = identity
    final: np.ndarray             # (n, n)
    step: float
    err_est: float


def validate_apath(path: APath) -> None:
    t = np.asarray(path.t)
    if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
        raise ValueError("APath grid must increase strictly from 0 to 1")
    if not np.all(np.isfinite(path.xi)):
        raise ValueError("APath has non-finite coefficients")


def _interp_rows(t_grid, values, t):
    """Piecewise-linear interpolation of (K, m) rows at times t (...,)."""
    t = np.asarray(t)
    idx = np.clip(np.searchsorted(t_grid, t, side="right") - 1, 0, len(t_grid) - 2)
    t0 = t_grid[idx]
    t1 = t_grid[idx + 1]
    w = np.where(t1 > t0, (t - t0) / np.where(t1 > t0, t1 - t0, 1.0), 0.0)
    return values[idx] + w[..., None] * (values[idx + 1] - values[idx])


def path_xi_at(path: APath, t) -> np.ndarray:
    """Coefficients xi(t); analytic when available, else linear in samples."""
    if path.xi_fn is not None:
        return np.asarray(path.xi_fn(np.asarray(t)))
    return _interp_rows(np.asarray(path.t), np.asarray(path.xi), t)


def path_gamma_at(path: APath, t) -> np.ndarray:
    if path.gamma_fn is not None:
        return np.asarray(path.gamma_fn(np.asarray(t)))
    return _interp_rows(np.asarray(path.t), np.asarray(path.gamma), t)


# --------------------------------------------------------------- integrator


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def dexpinv_trunc(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inverse differential of exp at u applied to v, truncated after the
    second commutator (sufficient for 4th-order RKMK)."""
    c1 = commutator(u, v)
    return v - 0.5 * c1 + (1.0 / 12.0) * commutator(u, c1)


def integrate_matrix_ode(mat_fn, t_knots, substeps, g0=None, record=True):
    """Solve g' = M(t) g with RKMK4, recording g at each knot.

    ``mat_fn(times)`` maps a (T,) time array to (T, *B, n, n) matrices; the
    integration is carried out for the whole stack at once. ``substeps[k]``
    RK steps are taken on [t_k, t_{k+1}]. Returns (K, *B, n, n).
    """
    t_knots = np.asarray(t_knots, dtype=float)
    probe = np.asarray(mat_fn(t_knots[:1]))
    batch = probe.shape[1:-2]
    n = probe.shape[-1]
    g = np.broadcast_to(np.eye(n), batch + (n, n)).copy() if g0 is None else np.array(g0)
    samples = [g.copy()] if record else None
    for k in range(len(t_knots) - 1):
        t0, t1 = t_knots[k], t_knots[k + 1]
        ns = int(substeps[k])
        h = (t1 - t0) / ns
        ends = t0 + h * np.arange(ns + 1)
        mids = t0 + h * (np.arange(ns) + 0.5)
        m_end = np.asarray(mat_fn(ends))
        m_mid = np.asarray(mat_fn(mids))
        for i in range(ns):
            k1 = m_end[i]
            a_mid = m_mid[i]
            k2 = dexpinv_trunc(0.5 * h * k1, a_mid)
            k3 = dexpinv_trunc(0.5 * h * k2, a_mid)
            k4 = dexpinv_trunc(h * k3, m_end[i + 1])
            theta = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            g = expm_stack(theta) @ g
        if record:
            samples.append(g.copy())
    if record:
        return np.stack(samples, axis=0)
    return g[None]


def _substep_counts(t_knots, step):
    spans = np.diff(np.asarray(t_knots, dtype=float))
    return np.maximum(1, np.ceil(spans / step - 1e-12).astype(int))


def develop(path: APath, spec: GroupSpec, step: float = 1e-3,
            tol: float = None, richardson: bool = True) -> DevelopmentResult:
    """Development of an A-path: the group path with right logarithmic
    derivative equal to the realized xi stream.

    ``step`` is measured in the path parameter; the error estimate comes
    from a step-halving (Richardson) comparison of the final element.
    Raises StepTooLarge when ``tol`` is given and the estimate exceeds it.
    """
    validate_apath(path)
    if step <= 0:
        raise ValueError("step must be positive")

    def mat_fn(times):
        return liegroup.realize(spec, path_xi_at(path, times))

    counts = _substep_counts(path.t, step)
    samples = integrate_matrix_ode(mat_fn, path.t, counts)
    err = 0.0
    if richardson:
        fine = integrate_matrix_ode(mat_fn, path.t, 2 * counts, record=False)
        err = float(np.max(np.abs(samples[-1] - fine[-1]))) / 15.0
        if tol is not None and err > tol:
            raise StepTooLarge(
                f"Richardson estimate {err:.3e} exceeds tolerance {tol:.1e}",
                estimate=err)
    return DevelopmentResult(g_samples=samples, final=samples[-1],
                             step=step, err_est=err)


# ------------------------------------------------------- path constructions


def lift_through_anchor(frame_g: np.ndarray, frame_v: np.ndarray,
                        velocity: np.ndarray):
    """Minimum-norm fiber lift of a tangent velocity through the anchor.

    ``frame_g``: (..., r, d) g-parts of fiber frame vectors, ``frame_v``:
    (..., r, sigma) anchor parts, ``velocity``: (..., sigma). Returns the
    g-coefficients of the lift and the anchor residual per point.
    """
    vT = np.swapaxes(frame_v, -1, -2)                  # (..., sigma, r)
    coeff = np.linalg.pinv(vT) @ velocity[..., None]   # (..., r, 1)
    resid = np.max(np.abs(vT @ coeff - velocity[..., None]), axis=(-2, -1))
    xi = np.swapaxes(frame_g, -1, -2) @ coeff
    return xi[..., 0], resid


def a_path_from_path(gamma: PathPolyline, omega) -> APath:
    """A-path covering a sampled path: tangent lift for ordinary forms,
    minimum-norm anchor right-inverse lift for generalized ones.

    ``omega`` is an ``algebroid.MCFormField``; only its evaluation interface
    is used here.
    """
    t = np.asarray(gamma.t, dtype=float)
    pts = np.asarray(gamma.points, dtype=float)
    if gamma.velocity is not None:
        vel = np.asarray(gamma.velocity, dtype=float)
    else:
        vel = np.gradient(pts, t, axis=0, edge_order=2 if len(t) > 2 else 1)

    def gamma_fn(tt):
        if gamma.point_fn is not None:
            return gamma.point_fn(tt)
        return _interp_rows(t, pts, tt)

    def vel_fn(tt):
        if gamma.velocity_fn is not None:
            return gamma.velocity_fn(tt)
        return _interp_rows(t, vel, tt)

    if omega.kind == "ordinary":
        coeffs = omega.coeff_at(pts)
        xi = np.einsum("kjd,kj->kd", coeffs, vel)
        anchor_residual = 0.0
        xi_fn = None
        if omega.has_evaluator:
            def xi_fn(tt):
                return np.einsum("...jd,...j->...d",
                                 omega.coeff_at(gamma_fn(tt)), vel_fn(tt))
    else:
        frame_g, frame_v, _ = omega.fiber_at(pts)
        xi, resid = lift_through_anchor(frame_g, frame_v, vel)
        anchor_residual = float(np.max(resid))
        xi_fn = None
        if omega.has_evaluator:
            def xi_fn(tt):
                fg, fv, _ = omega.fiber_at(gamma_fn(tt))
                lifted, _ = lift_through_anchor(fg, fv, vel_fn(tt))
                return lifted

    return APath(t=t, xi=np.asarray(xi, dtype=float), gamma=pts,
                 meta=f"lift:{omega.kind}", xi_fn=xi_fn, gamma_fn=gamma_fn,
                 anchor_residual=anchor_residual)


def _smoothstep(t):
    """7th-order smoothstep: fixed endpoints, derivative vanishing to third
    order there, strictly increasing inside."""
    t = np.asarray(t)
    return t ** 4 * (35.0 - 84.0 * t + 70.0 * t ** 2 - 20.0 * t ** 3)


def _smoothstep_d(t):
    t = np.asarray(t)
    return 140.0 * t ** 3 * (1.0 - t) ** 3


def smooth_reparam(path: APath) -> APath:
    """Endpoint-smoothing change of parameter: the development is unchanged
    while the rescaled xi vanishes at both endpoints."""
    validate_apath(path)
    t = np.asarray(path.t)
    tau = _smoothstep(t)
    xi = _smoothstep_d(t)[:, None] * path_xi_at(path, tau)
    gam = path_gamma_at(path, tau)
    xi_fn = None
    if path.xi_fn is not None:
        def xi_fn(tt):
            tt = np.asarray(tt)
            return _smoothstep_d(tt)[..., None] * path.xi_fn(_smoothstep(tt))
    gamma_fn = None
    if path.gamma_fn is not None:
        def gamma_fn(tt):
            return path.gamma_fn(_smoothstep(np.asarray(tt)))
    return replace(path, xi=xi, gamma=gam, xi_fn=xi_fn, gamma_fn=gamma_fn,
                   meta=path.meta + "|smoothed")


def concatenate(a1: APath, a0: APath, tol: float = 1e-9) -> APath:
    """Time-compressed concatenation (a0 first, then a1) after endpoint
    smoothing each factor so the joint is smooth."""
    validate_apath(a0)
    validate_apath(a1)
    if np.max(np.abs(np.asarray(a0.gamma)[-1] - np.asarray(a1.gamma)[0])) > tol:
        raise NotComposable("a0 must end where a1 begins")
    s0 = smooth_reparam(a0)
    s1 = smooth_reparam(a1)

    t = np.concatenate([0.5 * np.asarray(s0.t), 0.5 + 0.5 * np.asarray(s1.t)[1:]])
    xi = np.concatenate([2.0 * np.asarray(s0.xi), 2.0 * np.asarray(s1.xi)[1:]])
    gam = np.concatenate([np.asarray(s0.gamma), np.asarray(s1.gamma)[1:]])

    xi_fn = None
    if s0.xi_fn is not None and s1.xi_fn is not None:
        def xi_fn(tt):
            tt = np.asarray(tt, dtype=float)
            lo = 2.0 * path_like_eval(s0.xi_fn, np.clip(2.0 * tt, 0.0, 1.0))
            hi = 2.0 * path_like_eval(s1.xi_fn, np.clip(2.0 * tt - 1.0, 0.0, 1.0))
            return np.where((tt <= 0.5)[..., None], lo, hi)
    gamma_fn = None
    if s0.gamma_fn is not None and s1.gamma_fn is not None:
        def gamma_fn(tt):
            tt = np.asarray(tt, dtype=float)
            lo = path_like_eval(s0.gamma_fn, np.clip(2.0 * tt, 0.0, 1.0))
            hi = path_like_eval(s1.gamma_fn, np.clip(2.0 * tt - 1.0, 0.0, 1.0))
            return np.where((tt <= 0.5)[..., None], lo, hi)
    return APath(t=t, xi=xi, gamma=gam,
                 meta=f"({a1.meta})*({a0.meta})", xi_fn=xi_fn,
                 gamma_fn=gamma_fn,
                 anchor_residual=max(a0.anchor_residual, a1.anchor_residual))


def path_like_eval(fn, tt):
    return np.asarray(fn(tt))


def constant_apath(spec: GroupSpec, xi_coeffs, base_point, n_samples: int = 9,
                   sigma: int = 1) -> APath:
    """g-path with constant coefficients covering a constant domain path."""
    t = np.linspace(0.0, 1.0, n_samples)
    xi = np.tile(np.asarray(xi_coeffs, dtype=float), (n_samples, 1))
    gam = np.tile(np.asarray(base_point, dtype=float).reshape(1, -1), (n_samples, 1))
    coeffs = np.asarray(xi_coeffs, dtype=float)

    def xi_fn(tt):
        tt = np.asarray(tt)
        return np.broadcast_to(coeffs, tt.shape + coeffs.shape).copy()

    return APath(t=t, xi=xi, gamma=gam, meta="constant-g-path", xi_fn=xi_fn)
