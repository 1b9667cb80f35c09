"""Klein geometries: transitive matrix-group actions on point spaces.

A :class:`GeometrySpec` couples a :class:`~cartankit.liegroup.GroupSpec`
with one of four catalog action kinds:

``linear``   g . m = g m on R^p (p = n)
``sphere``   the linear action restricted to the unit sphere
``affine``   homogeneous-coordinate action, last row of g is (0,..,0,1)
``group``    the group acting on itself by left translation; points are
             flattened n x n matrices

Points are plain numpy vectors of length ``p`` (= coordinate count, not
necessarily the manifold dimension: sphere points carry their ambient
coordinates). Isotropy algebras, normalizer checks and coset representative
solves all use per-kind closed forms, so no orbit optimization is ever run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import liegroup, paths
from .errors import (ConstraintViolated, DimensionUnsupported, NotNormalizing,
                     NotTransitive, RepresentativeNotFound)
from .liegroup import GroupSpec, make_group_spec

DEFAULT_POINT_TOL = 1e-8


@dataclass(frozen=True)
class GeometrySpec:
    name: str
    group: GroupSpec
    action: str                     # linear | sphere | affine | group
    p: int                          # coordinate length of a point
    dim_m: int                      # manifold dimension of M
    basepoint: np.ndarray
    constraint: str = "none"        # none | unit_norm | membership
    point_tol: float = DEFAULT_POINT_TOL
    weakly_connected: bool = True
    discrete_isotropy_reps: tuple = ()   # matrices in H beyond H-identity cpt
    extra_normalizer_reps: tuple = ()    # catalog N_G(H) \ H representatives
    improper_extension: np.ndarray = None  # recorded extension matrix, if any


@dataclass(frozen=True)
class SymmetryPair:
    """Symmetry data (l, r): the map g.m0 -> l g r^-1 . m0 for r in the
    normalizer of the isotropy group at m0."""

    l: np.ndarray
    r: np.ndarray
    m0: np.ndarray
    normalizer_residual: float


def constraint_residual(geo: GeometrySpec, m: np.ndarray) -> float:
    m = np.asarray(m, dtype=float)
    if geo.constraint == "none":
        return 0.0
    if geo.constraint == "unit_norm":
        return float(np.max(np.abs(np.sum(m * m, axis=-1) - 1.0)))
    if geo.constraint == "membership":
        n = geo.group.n
        return liegroup.membership_residual(geo.group, m.reshape(n, n))
    raise ValueError(f"unknown constraint {geo.constraint!r}")


def point_check(geo: GeometrySpec, m: np.ndarray) -> None:
    r = constraint_residual(geo, m)
    if r > geo.point_tol:
        raise ConstraintViolated(
            f"{geo.name}: point constraint residual {r:.3e}", residual=r)


def act(geo: GeometrySpec, g: np.ndarray, m: np.ndarray,
        check: bool = True) -> np.ndarray:
    """Left action of a group element on points (broadcasts over leading
    axes of ``m``). Raises ConstraintViolated when the result leaves the
    constraint locus."""
    g = np.asarray(g)
    m = np.asarray(m)
    if geo.action in ("linear", "sphere"):
        out = m @ np.swapaxes(g, -1, -2)
    elif geo.action == "affine":
        out = m @ g[:-1, :-1].T + g[:-1, -1]
    elif geo.action == "group":
        n = geo.group.n
        mat = m.reshape(m.shape[:-1] + (n, n))
        out = (g @ mat).reshape(m.shape)
    else:
        raise ValueError(f"unknown action {geo.action!r}")
    if check and np.isrealobj(out):
        r = constraint_residual(geo, np.atleast_2d(out))
        if r > geo.point_tol:
            raise ConstraintViolated(
                f"{geo.name}: action output off the constraint locus "
                f"(residual {r:.3e})", residual=r)
    return out


def generator_matrix(geo: GeometrySpec, m: np.ndarray) -> np.ndarray:
    """Stacked infinitesimal generators: (..., p, d) with column i the
    generator of basis vector E_i at m."""
    m = np.asarray(m)
    basis = geo.group.basis
    if geo.action in ("linear", "sphere"):
        gen = np.einsum("dij,...j->...id", basis, m)
    elif geo.action == "affine":
        p = geo.p
        gen = (np.einsum("dij,...j->...id", basis[:, :p, :p], m)
               + np.moveaxis(basis[:, :p, p], 0, -1))
    elif geo.action == "group":
        n = geo.group.n
        mat = m.reshape(m.shape[:-1] + (n, n))
        gen = np.einsum("dij,...jk->...ikd", basis, mat)
        gen = gen.reshape(m.shape[:-1] + (n * n, geo.group.d))
    else:
        raise ValueError(f"unknown action {geo.action!r}")
    return gen


def generator(geo: GeometrySpec, xi: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Value of the infinitesimal generator of xi at m: the t-derivative of
    exp(t xi) . m at t = 0, in closed form."""
    return generator_matrix(geo, m) @ np.asarray(xi)


def isotropy_algebra(geo: GeometrySpec, m: np.ndarray) -> np.ndarray:
    """Orthonormal basis (k, d) of the stabilizer subalgebra at m. Raises
    NotTransitive when the generators span less than the manifold."""
    G = generator_matrix(geo, np.asarray(m, dtype=float))
    u, s, vt = np.linalg.svd(G)
    tol = geo.group.lin_tol
    smax = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > smax * tol * max(G.shape)))
    if rank < geo.dim_m:
        raise NotTransitive(
            f"{geo.name}: generator rank {rank} < dim M = {geo.dim_m} at {m}")
    return vt[rank:]


def isotropy_contains(geo: GeometrySpec, g: np.ndarray, m: np.ndarray,
                      tol: float = None):
    """(stabilizes?, residual) for a group element at a point."""
    liegroup.group_check(geo.group, g)
    residual = float(np.max(np.abs(act(geo, g, m, check=False) - np.asarray(m))))
    tol = geo.point_tol if tol is None else tol
    return residual <= tol, residual


# -------------------------------------------------------------- symmetries


def coset_representative(geo: GeometrySpec, m: np.ndarray) -> np.ndarray:
    """Closed-form group element taking the catalog basepoint to m."""
    m = np.asarray(m, dtype=float)
    if geo.action == "affine":
        g = np.eye(geo.group.n)
        g[:-1, -1] = m
        return g
    if geo.action == "sphere":
        u = geo.basepoint / np.linalg.norm(geo.basepoint)
        nm = np.linalg.norm(m)
        if abs(nm - 1.0) > 1e-6:
            raise RepresentativeNotFound(f"{geo.name}: point not on sphere")
        v = m / nm
        c = float(u @ v)
        if c < -1.0 + 1e-12:
            # antipodal: rotate by pi in a plane containing u
            q = np.zeros_like(u)
            q[int(np.argmin(np.abs(u)))] = 1.0
            q = q - (q @ u) * u
            q /= np.linalg.norm(q)
            return np.eye(geo.p) - 2.0 * np.outer(u, u) - 2.0 * np.outer(q, q)
        w = u + v
        return np.eye(geo.p) - np.outer(w, w) / (1.0 + c) + 2.0 * np.outer(v, u)
    if geo.action == "group":
        return m.reshape(geo.group.n, geo.group.n).copy()
    if geo.action == "linear":
        raise RepresentativeNotFound(
            f"{geo.name}: no catalog coset solve for plain linear actions")
    raise ValueError(f"unknown action {geo.action!r}")


def _conjugated_reps(geo: GeometrySpec, m0: np.ndarray):
    """Discrete isotropy representatives moved from the basepoint to m0."""
    if not geo.discrete_isotropy_reps:
        return []
    gm = coset_representative(geo, m0)
    gm_inv = np.linalg.inv(gm)
    return [gm @ h @ gm_inv for h in geo.discrete_isotropy_reps]


def is_symmetry_pair(geo: GeometrySpec, l: np.ndarray, r: np.ndarray,
                     m0: np.ndarray, tol: float = None) -> SymmetryPair:
    """Validate that r normalizes the isotropy group at m0.

    The continuous part is checked through Ad-invariance of the isotropy
    algebra, the discrete part through the catalogued component
    representatives. Raises NotNormalizing with the offending residual.
    """
    tol = geo.point_tol if tol is None else tol
    liegroup.group_check(geo.group, l)
    liegroup.group_check(geo.group, r)
    point_check(geo, m0)
    kappa = isotropy_algebra(geo, m0)
    residual = 0.0
    if kappa.shape[0]:
        ad_k = np.stack([liegroup.adjoint(geo.group, r, k) for k in kappa])
        proj = ad_k @ np.linalg.pinv(kappa) @ kappa
        residual = float(np.max(np.abs(ad_k - proj)))
    r_inv = np.linalg.inv(r)
    for h in _conjugated_reps(geo, m0):
        _, dev = isotropy_contains(geo, r @ h @ r_inv, m0, tol=np.inf)
        residual = max(residual, dev)
    if residual > tol:
        raise NotNormalizing(
            f"{geo.name}: r does not normalize the isotropy at m0 "
            f"(residual {residual:.3e})", residual=residual)
    return SymmetryPair(l=np.asarray(l, dtype=float),
                        r=np.asarray(r, dtype=float),
                        m0=np.asarray(m0, dtype=float),
                        normalizer_residual=residual)


def apply_symmetry(geo: GeometrySpec, s: SymmetryPair, m: np.ndarray) -> np.ndarray:
    """Evaluate the symmetry at a point: write m = g . m0 by the catalog
    coset solve and return (l g r^-1) . m0."""
    g_m = coset_representative(geo, np.asarray(m, dtype=float))
    g_m0 = coset_representative(geo, s.m0)
    g = g_m @ np.linalg.inv(g_m0)
    dev = float(np.max(np.abs(act(geo, g, s.m0, check=False) - np.asarray(m))))
    if dev > 1e3 * geo.point_tol:
        raise RepresentativeNotFound(
            f"{geo.name}: coset solve failed (residual {dev:.3e})")
    return act(geo, s.l @ g @ np.linalg.inv(s.r), s.m0, check=False)


def symmetry_map(geo: GeometrySpec, s: SymmetryPair):
    """Closed-form vectorized evaluator of the symmetry on points.

    For the catalog actions the map m -> l g_m r^-1 . m0 is affine in m;
    the returned callable accepts stacked (and complex) coordinates, which
    makes symmetric images of analytic test maps differentiable again.
    """
    if geo.action == "affine":
        # validated pairs have linear r fixing the origin basepoint
        L = s.l[:-1, :-1].copy()
        c = s.l[:-1, -1].copy()
        return lambda pts: np.asarray(pts) @ L.T + c
    if geo.action in ("sphere", "linear"):
        sign = float(np.sign(s.m0 @ (np.linalg.inv(s.r) @ s.m0)))
        L = sign * s.l
        return lambda pts: np.asarray(pts) @ L.T
    if geo.action == "group":
        n = geo.group.n
        r_inv = np.linalg.inv(s.r)

        def fn(pts):
            pts = np.asarray(pts)
            mat = pts.reshape(pts.shape[:-1] + (n, n))
            return (s.l @ mat @ r_inv).reshape(pts.shape)

        return fn
    raise ValueError(f"unknown action {geo.action!r}")


def sample_normalizer(geo: GeometrySpec, rng: np.random.Generator) -> np.ndarray:
    """Random element of N_G(H) at the catalog basepoint, for property
    sampling."""
    name = geo.name
    if geo.action == "affine":
        # N_G(H) = H: random linear isotropy element
        d_lin = geo.group.d - geo.p
        xi = np.zeros(geo.group.d)
        xi[:d_lin] = 0.7 * rng.standard_normal(d_lin)
        r = liegroup.exp(geo.group, xi)
        if geo.discrete_isotropy_reps and rng.random() < 0.5:
            r = r @ geo.discrete_isotropy_reps[0]
        return r
    if geo.action == "sphere":
        axis = geo.basepoint / np.linalg.norm(geo.basepoint)
        theta = rng.uniform(0, 2 * math.pi)
        r = _rotation_about(geo.p, axis, theta)
        if geo.extra_normalizer_reps and rng.random() < 0.5:
            r = r @ geo.extra_normalizer_reps[
                rng.integers(len(geo.extra_normalizer_reps))]
        return r
    if geo.action == "group":
        return liegroup.exp(geo.group, 0.5 * rng.standard_normal(geo.group.d))
    raise ValueError(f"no normalizer sampler for {name}")


def _rotation_about(p: int, axis: np.ndarray, theta: float) -> np.ndarray:
    """Rotation of R^p fixing ``axis`` (p = 2, 3, 4 catalog spheres)."""
    if p == 2:
        return np.eye(2) if abs(theta) < 1e-300 else np.array(
            [[math.cos(theta), -math.sin(theta)],
             [math.sin(theta), math.cos(theta)]])
    if p == 3:
        K = np.array([[0.0, -axis[2], axis[1]],
                      [axis[2], 0.0, -axis[0]],
                      [-axis[1], axis[0], 0.0]])
        return np.eye(3) + math.sin(theta) * K + (1 - math.cos(theta)) * (K @ K)
    # rotate in a plane orthogonal to axis
    basis = [v for v in np.eye(p)]
    vecs = [axis] + basis
    q, _ = np.linalg.qr(np.stack(vecs, axis=1)[:, :p])
    u, v = q[:, 1], q[:, 2]
    R = np.eye(p)
    R += (math.cos(theta) - 1) * (np.outer(u, u) + np.outer(v, v))
    R += math.sin(theta) * (np.outer(v, u) - np.outer(u, v))
    return R


# ----------------------------------------------- weak-connectedness report


@dataclass(frozen=True)
class WeakConnectednessReport:
    declared: bool
    isotropy_dim: int
    normalizer_dim_structure: int
    normalizer_dim_sampled: int
    group_level_residual: float
    consistent: bool

    @property
    def weakly_connected(self) -> bool:
        return self.declared


def weakly_connected_report(geo: GeometrySpec, m0: np.ndarray = None,
                            fd_eps: float = 1e-6) -> WeakConnectednessReport:
    """Catalog weak-connectedness flag plus an algebra-level sanity check:
    the normalizer subalgebra of the isotropy computed from structure
    constants must match the one from finite-difference Ad-invariance, and
    exponentials of it must conjugate the catalogued discrete isotropy
    representatives back into the isotropy group."""
    spec = geo.group
    m0 = geo.basepoint if m0 is None else np.asarray(m0, dtype=float)
    kappa = isotropy_algebra(geo, m0)
    k = kappa.shape[0]
    if k == 0:
        return WeakConnectednessReport(True, 0, spec.d, spec.d, 0.0, True)

    perp = np.eye(spec.d) - np.linalg.pinv(kappa) @ kappa

    # bracket route: rows of P_perp ad_(.)(kappa_i), stacked over i
    blocks = [perp @ np.einsum("ajm,j->ma", spec.structure_constants, ki).T
              for ki in kappa]
    stacked = np.concatenate([b for b in blocks], axis=0)
    n1 = _nullspace(stacked, spec.lin_tol)

    # sampled route: finite-difference Ad-invariance
    fd_blocks = []
    for ki in kappa:
        cols = []
        for a in range(spec.d):
            e = np.zeros(spec.d)
            e[a] = fd_eps
            g1 = liegroup.exp(spec, e)
            ad = liegroup.adjoint(spec, g1, ki)
            cols.append((ad - ki) / fd_eps)
        fd_blocks.append(perp @ np.stack(cols, axis=1))
    n2 = _nullspace(np.concatenate(fd_blocks, axis=0), 1e-4)

    residual = 0.0
    reps = _conjugated_reps(geo, m0)
    for nu in n1:
        for scale in (0.7, 1.3):
            g = liegroup.exp(spec, scale * nu)
            ad_k = np.stack([liegroup.adjoint(spec, g, ki) for ki in kappa])
            proj = ad_k @ np.linalg.pinv(kappa) @ kappa
            residual = max(residual, float(np.max(np.abs(ad_k - proj))))
            g_inv = np.linalg.inv(g)
            for h in reps:
                _, dev = isotropy_contains(geo, g @ h @ g_inv, m0, tol=np.inf)
                residual = max(residual, dev)
    consistent = (n1.shape[0] == n2.shape[0]) and residual <= 1e-6
    return WeakConnectednessReport(geo.weakly_connected, k, n1.shape[0],
                                   n2.shape[0], residual, consistent)


def _nullspace(mat: np.ndarray, tol: float) -> np.ndarray:
    u, s, vt = np.linalg.svd(mat)
    if s.size == 0:
        return vt
    rank = int(np.sum(s > s[0] * tol * max(mat.shape))) if s[0] > 0 else 0
    return vt[rank:]


# ------------------------------------------------------------------ Frenet


def frenet_xi(geo: GeometrySpec, kappa, tau=None, length: float = 1.0,
              n_fine: int = 2048) -> paths.APath:
    """g-path whose development carries the frame at time 0 to the frame at
    time t for the unit-speed curve with the given curvature (and torsion).

    ``kappa``/``tau`` may be constants, arc-length callables, or sample
    arrays over [0, length]. The curve's moving frame solves a body-frame
    equation; its right logarithmic derivative is produced by integrating
    the frame once on a fine grid and conjugating, so the returned path is
    in the convention :func:`cartankit.paths.develop` expects.
    """
    ambient = geo.p
    if geo.action != "affine" or ambient not in (2, 3):
        raise DimensionUnsupported(
            "Frenet paths require a Euclidean geometry of dimension 2 or 3")
    if ambient == 3 and tau is None:
        raise DimensionUnsupported("dimension 3 requires torsion samples")
    spec = geo.group
    kappa_fn = _scalar_fn(kappa, length)
    tau_fn = _scalar_fn(0.0 if tau is None else tau, length)

    def body_coeffs(tt):
        # coefficients on [0,1]; arc derivative rescaled by total length
        tt = np.asarray(tt, dtype=float)
        arc = length * tt
        kap = kappa_fn(arc)
        out = np.zeros(tt.shape + (spec.d,))
        if ambient == 2:
            out[..., 0] = kap
            out[..., 1] = 1.0
        else:
            out[..., 0] = tau_fn(arc)
            out[..., 2] = kap
            out[..., 3] = 1.0
        return length * out

    t_fine = np.linspace(0.0, 1.0, n_fine + 1)

    def neg_body_mat(times):
        return -liegroup.realize(spec, body_coeffs(times))

    h_samples = paths.integrate_matrix_ode(neg_body_mat, t_fine,
                                           np.ones(n_fine, dtype=int))
    frames = np.linalg.inv(h_samples)          # G(t), G(0) = I
    body = liegroup.realize(spec, body_coeffs(t_fine))
    spatial = frames @ body @ h_samples        # G Xi_b G^-1
    coeffs, resid = liegroup.project_to_algebra(spec, spatial)
    if float(np.max(resid)) > 1e-8:
        raise DimensionUnsupported("frame conjugation left the algebra span")

    def xi_fn(tt):
        return paths._interp_rows(t_fine, coeffs, np.asarray(tt))

    gamma = (length * t_fine)[:, None]
    return paths.APath(t=t_fine, xi=coeffs, gamma=gamma, meta="frenet",
                       xi_fn=xi_fn)


def frenet_curve(geo: GeometrySpec, kappa, tau=None, length: float = 1.0,
                 step: float = 1e-3, n_fine: int = 2048):
    """Reconstructed curve and frames: develops the Frenet g-path and acts
    on the origin. Returns (t_arc, points, development)."""
    path = frenet_xi(geo, kappa, tau, length=length, n_fine=n_fine)
    dev = paths.develop(path, geo.group, step=max(step / max(length, 1e-12), 1e-6),
                        richardson=False)
    origin = geo.basepoint
    pts = np.stack([act(geo, g, origin, check=False) for g in dev.g_samples])
    return path.t * length, pts, dev


def _scalar_fn(value, length: float):
    if callable(value):
        return lambda arc: np.asarray(value(np.asarray(arc)), dtype=float)
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        c = float(arr[0])
        return lambda arc: np.full(np.shape(arc), c)
    grid = np.linspace(0.0, length, arr.size)
    return lambda arc: np.interp(np.asarray(arc), grid, arr)


# ----------------------------------------------------------------- catalog


def _se_basis(p: int) -> np.ndarray:
    """Basis of se(p): rotations first, then translations."""
    mats = []
    if p == 2:
        J = np.zeros((3, 3))
        J[0, 1], J[1, 0] = -1.0, 1.0
        mats.append(J)
    else:
        for a, b in ((1, 2), (2, 0), (0, 1)):   # rotations about x, y, z
            K = np.zeros((4, 4))
            K[b, a], K[a, b] = 1.0, -1.0
            mats.append(K)
    for i in range(p):
        T = np.zeros((p + 1, p + 1))
        T[i, p] = 1.0
        mats.append(T)
    return np.stack(mats)


def _so_basis(p: int) -> np.ndarray:
    mats = []
    for a in range(p):
        for b in range(a + 1, p):
            K = np.zeros((p, p))
            K[b, a], K[a, b] = 1.0, -1.0
            mats.append(K)
    return np.stack(mats)


def _euclidean_geometry(p: int, name: str) -> GeometrySpec:
    group = make_group_spec(f"E({p})", _se_basis(p), membership="affine_orthogonal")
    reflection = np.eye(p + 1)
    reflection[p - 1, p - 1] = -1.0
    return GeometrySpec(name=name, group=group, action="affine", p=p,
                        dim_m=p, basepoint=np.zeros(p),
                        weakly_connected=True,
                        discrete_isotropy_reps=(reflection,))


def _sphere_geometry(p: int, name: str) -> GeometrySpec:
    group = make_group_spec(f"SO({p})", _so_basis(p),
                            membership="special_orthogonal")
    base = np.zeros(p)
    base[-1] = 1.0
    extras = ()
    improper = None
    if p >= 3:
        # pi-rotation in the (e_1, e_p) plane: sends the basepoint to its
        # antipode while normalizing the isotropy subgroup
        flip = np.eye(p)
        flip[0, 0] = -1.0
        flip[-1, -1] = -1.0
        extras = (flip,)
        improper = -np.eye(p) if p % 2 == 1 else None
    return GeometrySpec(name=name, group=group, action="sphere", p=p,
                        dim_m=p - 1, basepoint=base, constraint="unit_norm",
                        weakly_connected=True, extra_normalizer_reps=extras,
                        improper_extension=improper)


def _affine_geometry(p: int, name: str, unimodular: bool) -> GeometrySpec:
    mats = []
    if unimodular:
        for m in (np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [0.0, 0.0]]),
                  np.array([[0.0, 0.0], [1.0, 0.0]])):
            M = np.zeros((p + 1, p + 1))
            M[:p, :p] = m
            mats.append(M)
    else:
        for i in range(p):
            for j in range(p):
                M = np.zeros((p + 1, p + 1))
                M[i, j] = 1.0
                mats.append(M)
    for i in range(p):
        T = np.zeros((p + 1, p + 1))
        T[i, p] = 1.0
        mats.append(T)
    kind = "affine_unimodular" if unimodular else "affine"
    gname = ("SL" if unimodular else "GL") + f"({p})xR{p}"
    group = make_group_spec(gname, np.stack(mats), membership=kind)
    reps = ()
    if not unimodular:
        refl = np.eye(p + 1)
        refl[0, 0] = -1.0
        reps = (refl,)
    return GeometrySpec(name=name, group=group, action="affine", p=p,
                        dim_m=p, basepoint=np.zeros(p),
                        weakly_connected=True, discrete_isotropy_reps=reps)


def group_geometry(spec: GroupSpec, name: str = None) -> GeometrySpec:
    """The group acting on itself by left translation (points are flattened
    matrices)."""
    return GeometrySpec(name=name or f"{spec.name}-as-space", group=spec,
                        action="group", p=spec.n * spec.n, dim_m=spec.d,
                        basepoint=np.eye(spec.n).ravel(),
                        constraint="membership", weakly_connected=True)


_CATALOG = {}


def geometry_catalog() -> dict:
    if not _CATALOG:
        _CATALOG["se2-plane"] = _euclidean_geometry(2, "se2-plane")
        _CATALOG["e3-space"] = _euclidean_geometry(3, "e3-space")
        _CATALOG["so2-circle"] = _sphere_geometry(2, "so2-circle")
        _CATALOG["so3-sphere"] = _sphere_geometry(3, "so3-sphere")
        _CATALOG["so4-sphere3"] = _sphere_geometry(4, "so4-sphere3")
        _CATALOG["affine2-plane"] = _affine_geometry(2, "affine2-plane", False)
        _CATALOG["equiaffine2-plane"] = _affine_geometry(2, "equiaffine2-plane", True)
    return _CATALOG


def get_geometry(name: str) -> GeometrySpec:
    catalog = geometry_catalog()
    if name == "e2-plane":
        name = "se2-plane"
    if name not in catalog:
        from .errors import UnknownGeometry
        raise UnknownGeometry(
            f"unknown geometry {name!r}; catalog: {sorted(catalog)}")
    return catalog[name]
