"""Primitive reconstruction and uniqueness-up-to-symmetry checks.

Reconstruction anchors at (x0, m0), develops the form along spanning-tree
paths (cached parent-to-child so each edge is integrated once, batched per
tree level), and acts on m0. Path independence is then *verified*: every
non-tree edge contributes a cycle residual comparing the transported value
against the stored one, and each node value must keep the form's kernel
inside its isotropy algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import algebroid, klein, liegroup, monodromy as monodromy_mod
from .errors import IsotropyDrift, NontrivialMonodromy, NoSolution
from .klein import GeometrySpec, SymmetryPair
from .mesh import MeshDomain, cycle_basis


@dataclass(frozen=True)
class PrimitiveField:
    """Reconstructed map values with their consistency residuals."""

    domain: MeshDomain
    geometry: GeometrySpec
    values: np.ndarray              # (N, p)
    x0: int
    m0: np.ndarray
    cycle_residuals: np.ndarray     # per non-tree edge
    max_residual: float
    isotropy_residual: float


@dataclass(frozen=True)
class MorphismWitness:
    """Per-node linear frame maps lambda with delta-f(lambda(a)) = Ad_l w(a)
    and matching anchors."""

    l: np.ndarray
    lambdas: np.ndarray             # (N, r2, r1)
    residual: float
    injective: bool
    min_singular_value: float


@dataclass(frozen=True)
class UniquenessVerdict:
    related: bool
    kind: str                       # right-translation | symmetry
    max_deviation: float
    argmax_node: int
    translation: np.ndarray = None
    pair: SymmetryPair = None


def develop_tree(omega, step: float = 1e-3) -> np.ndarray:
    """Developments from the base node to every node along tree paths,
    one batched integration per tree level: (N, n, n)."""
    mesh = omega.domain
    n = omega.group_spec.n
    out = np.empty((mesh.n_nodes, n, n))
    out[mesh.x0] = np.eye(n)
    depths = mesh.depth
    for level in range(1, int(np.max(depths)) + 1):
        children = np.flatnonzero(depths == level)
        if len(children) == 0:
            break
        edge_ids = mesh.tree_edge[children]
        dirs = mesh.tree_dir[children]
        devs = monodromy_mod.develop_edges(omega, edge_ids, dirs, step=step)
        out[children] = devs @ out[mesh.tree_parent[children]]
    return out


def _reroot(mesh: MeshDomain, x0) -> MeshDomain:
    if x0 is None or int(x0) == mesh.x0:
        return mesh
    return cycle_basis(replace(mesh, x0=int(x0), cycles=()))


def reconstruct_primitive(omega, m0, mesh: MeshDomain = None, x0: int = None,
                          geo: GeometrySpec = None, step: float = 1e-3,
                          triviality_tol: float = 1e-6,
                          isotropy_tol: float = 1e-7) -> PrimitiveField:
    """Primitive of a form with trivial monodromy: f(x) = (development
    along the tree path to x) . m0.

    Raises NontrivialMonodromy (with the offending report) otherwise, and
    IsotropyDrift when a reconstructed value violates the per-node anchored
    condition.
    """
    geo = geo or omega.geometry
    mesh = _reroot(mesh or omega.domain, x0)
    if mesh is not omega.domain:
        omega = replace(omega, domain=mesh)
    m0 = np.asarray(m0, dtype=float)

    report = monodromy_mod.pointed_monodromy(
        omega, mesh, m0, geo, step=step, triviality_tol=triviality_tol)
    if not report.trivial:
        raise NontrivialMonodromy(
            f"monodromy deviation {float(np.max(report.deviations)):.3e} "
            f"exceeds {triviality_tol:.1e}; no primitive through m0",
            report=report)

    devs = develop_tree(omega, step=step)
    values = _act_stack(geo, devs, m0)

    # path independence across the closing edges
    non_tree = _non_tree_edges(mesh)
    cycle_res = np.zeros(len(non_tree))
    if non_tree:
        edevs = monodromy_mod.develop_edges(omega, non_tree,
                                            np.ones(len(non_tree), dtype=int),
                                            step=step)
        tails = mesh.edges[non_tree, 0]
        heads = mesh.edges[non_tree, 1]
        transported = _act_stack(geo, edevs, None, points=values[tails])
        cycle_res = np.max(np.abs(transported - values[heads]), axis=-1)

    iso_res = _isotropy_residuals(omega, geo, values)
    if float(np.max(iso_res, initial=0.0)) > isotropy_tol:
        node = int(np.argmax(iso_res))
        raise IsotropyDrift(
            f"kernel of the form leaves the isotropy at node {node} "
            f"(residual {float(iso_res[node]):.3e})",
            node=node, residual=float(iso_res[node]))

    return PrimitiveField(domain=mesh, geometry=geo, values=values,
                          x0=mesh.x0, m0=m0, cycle_residuals=cycle_res,
                          max_residual=float(np.max(cycle_res, initial=0.0)),
                          isotropy_residual=float(np.max(iso_res, initial=0.0)))


def _act_stack(geo: GeometrySpec, gs: np.ndarray, m0, points=None) -> np.ndarray:
    """Stacked action: gs (N, n, n) applied to one point (or pointwise to
    ``points``)."""
    if geo.action == "group":
        n = geo.group.n
        base = (np.broadcast_to(m0, (len(gs), n * n)) if points is None
                else points)
        return (gs @ base.reshape(-1, n, n)).reshape(len(gs), n * n)
    src = np.broadcast_to(m0, (len(gs), geo.p)) if points is None else points
    if geo.action == "affine":
        return np.einsum("nij,nj->ni", gs[:, :-1, :-1], src) + gs[:, :-1, -1]
    return np.einsum("nij,nj->ni", gs, src)


def _isotropy_residuals(omega, geo: GeometrySpec, values: np.ndarray) -> np.ndarray:
    """Per-node residual of the anchored condition x -> f(x): generators of
    the fiber kernel vectors evaluated at the reconstructed values."""
    n_nodes = omega.domain.n_nodes
    if omega.kind == "ordinary" or not omega.kernel_index:
        return np.zeros(n_nodes)
    kernels = omega.frames_g[:, list(omega.kernel_index)]
    gen = klein.generator_matrix(geo, values)
    return np.max(np.abs(np.einsum("npd,nkd->nkp", gen, kernels)), axis=(-2, -1))


def reconstruct_group_primitive(omega, g0: np.ndarray, mesh: MeshDomain = None,
                                spec=None, step: float = 1e-3,
                                triviality_tol: float = 1e-6,
                                flatness_tol: float = None) -> algebroid.MapField:
    """Group-valued primitive on a mesh whose cycles all develop trivially:
    f(x) = (development along the tree path) g0.

    Cycle triviality is checked through the tree cache: the fundamental
    cycle of a non-tree edge is trivial exactly when that edge's
    development carries the tail's tree development to the head's.
    """
    spec = spec or omega.group_spec
    mesh = mesh or omega.domain
    liegroup.group_check(spec, g0)
    if flatness_tol is not None:
        worst = float(np.max(algebroid.morphism_residual(omega)))
        if worst > flatness_tol:
            raise NontrivialMonodromy(
                f"structure-equation residual {worst:.3e} exceeds "
                f"{flatness_tol:.1e}")
    devs = develop_tree(omega, step=step)
    non_tree = _non_tree_edges(mesh)
    if non_tree:
        edevs = monodromy_mod.develop_edges(omega, non_tree,
                                            np.ones(len(non_tree), dtype=int),
                                            step=step)
        closure = edevs @ devs[mesh.edges[non_tree, 0]] \
            - devs[mesh.edges[non_tree, 1]]
        worst = float(np.max(np.abs(closure)))
        if worst > triviality_tol:
            raise NontrivialMonodromy(
                f"a cycle develops nontrivially (deviation {worst:.3e})")
    values = devs @ np.asarray(g0, dtype=float)
    geometry = omega.geometry if omega.geometry.action == "group" \
        else klein.group_geometry(spec)
    return algebroid.MapField(domain=mesh, geometry=geometry, values=values,
                              target="group")


def _non_tree_edges(mesh: MeshDomain) -> list:
    tree_edges = set(int(mesh.tree_edge[v]) for v in range(mesh.n_nodes)
                     if mesh.tree_edge[v] >= 0)
    return [e for e in range(len(mesh.edges)) if e not in tree_edges]


# ----------------------------------------------------- morphism witnesses


def _solve_frame_maps(src_g, src_v, dst_g, dst_v, ad=None):
    """Least-squares lambda per node with dst-frame . lambda = (ad src_g,
    src_v); returns (lambdas, residual, min_sv)."""
    tgt_g = src_g if ad is None else np.einsum("ab,nrb->nra", ad, src_g)
    target = np.concatenate([tgt_g, src_v], axis=-1)          # (N, r1, D)
    basis = np.concatenate([dst_g, dst_v], axis=-1)           # (N, r2, D)
    basis_t = np.swapaxes(basis, -1, -2)                      # (N, D, r2)
    lam = np.linalg.pinv(basis_t) @ np.swapaxes(target, -1, -2)  # (N, r2, r1)
    resid = float(np.max(np.abs(basis_t @ lam - np.swapaxes(target, -1, -2))))
    sv = np.linalg.svd(lam, compute_uv=False)
    min_sv = float(np.min(sv[..., -1]))
    return lam, resid, min_sv


def check_morphism(omega1, omega2, l: np.ndarray, geo: GeometrySpec = None,
                   tol: float = 1e-6) -> MorphismWitness:
    """Witness for a morphism omega1 -> omega2 over the identity with group
    element l: per node, solve for the frame map lambda with
    omega2(lambda(a)) = Ad_l omega1(a) and unchanged anchors."""
    geo = geo or omega1.geometry
    spec = geo.group
    if omega1.domain.n_nodes != omega2.domain.n_nodes:
        raise ValueError("forms must share a mesh")
    liegroup.group_check(spec, l)
    ad = np.stack([liegroup.adjoint(spec, l, e)
                   for e in np.eye(spec.d)]).T       # coeff matrix of Ad_l
    f1 = [omega1.node_fiber(i) for i in range(omega1.domain.n_nodes)]
    f2 = [omega2.node_fiber(i) for i in range(omega2.domain.n_nodes)]
    src_g = np.stack([f.frame_g for f in f1])
    src_v = np.stack([f.frame_v for f in f1])
    dst_g = np.stack([f.frame_g for f in f2])
    dst_v = np.stack([f.frame_v for f in f2])
    lam, resid, min_sv = _solve_frame_maps(src_g, src_v, dst_g, dst_v, ad=ad)
    if resid > tol:
        raise NoSolution(
            f"no morphism witness: best frame-map residual {resid:.3e}",
            residual=resid)
    return MorphismWitness(l=np.asarray(l, dtype=float), lambdas=lam,
                           residual=resid,
                           injective=min_sv > spec.lin_tol,
                           min_singular_value=min_sv)


def verify_principal_primitive(omega, f: algebroid.MapField,
                               geo: GeometrySpec = None,
                               tol: float = 1e-6) -> MorphismWitness:
    """Witness that f is a principal primitive of omega: the fiber of omega
    must map into the pullback fiber of f with matching form values and
    anchors (l = identity)."""
    geo = geo or omega.geometry
    delta = algebroid.log_derivative(f)
    return check_morphism(omega, delta, np.eye(geo.group.n), geo=geo, tol=tol)


# -------------------------------------------------- uniqueness / symmetry


def procrustes_isometry(src: np.ndarray, dst: np.ndarray,
                        allow_reflection: bool = False) -> np.ndarray:
    """Best-fit rigid motion src -> dst (Kabsch); returns a homogeneous
    matrix. With ``allow_reflection`` the improper fit is returned."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    p = src.shape[1]
    cs = src.mean(axis=0)
    cd = dst.mean(axis=0)
    H = (src - cs).T @ (dst - cd)
    u, s, vt = np.linalg.svd(H)
    signs = np.ones(p)
    det = np.linalg.det(vt.T @ u.T)
    want = -1.0 if allow_reflection else 1.0
    if det * want < 0:
        signs[-1] = -1.0
    R = vt.T @ np.diag(signs) @ u.T
    out = np.eye(p + 1)
    out[:p, :p] = R
    out[:p, p] = cd - R @ cs
    return out


def catalog_symmetry_candidates(geo: GeometrySpec, f1_values: np.ndarray,
                                f2_values: np.ndarray, m0: np.ndarray = None):
    """Finite candidate list for the uniqueness check: identity, the
    Procrustes fits (proper and improper where the geometry allows them),
    and the catalogued normalizer representatives."""
    m0 = geo.basepoint if m0 is None else np.asarray(m0, dtype=float)
    eye = np.eye(geo.group.n)
    candidates = [SymmetryPair(l=eye, r=eye, m0=m0, normalizer_residual=0.0)]
    if geo.action == "affine":
        for reflect in (False, True):
            l = procrustes_isometry(f1_values, f2_values, allow_reflection=reflect)
            if liegroup.membership_residual(geo.group, l) < 1e-8:
                candidates.append(SymmetryPair(l=l, r=eye, m0=m0,
                                               normalizer_residual=0.0))
    for r in geo.extra_normalizer_reps:
        candidates.append(klein.is_symmetry_pair(geo, eye, r, m0))
    return candidates


def uniqueness_up_to_symmetry(f1, f2, candidate=None, geo: GeometrySpec = None,
                              tol: float = 1e-6) -> UniquenessVerdict:
    """Check whether two maps differ by the allowed symmetries.

    Group-valued maps: the two reconstructions must differ by one constant
    right translation, which is returned. Point-valued maps: the candidate
    symmetry pair (or a Procrustes-synthesized one for Euclidean
    geometries) must carry f1 onto f2 node by node.
    """
    v1 = f1.values if hasattr(f1, "values") else np.asarray(f1)
    v2 = f2.values if hasattr(f2, "values") else np.asarray(f2)
    if v1.shape != v2.shape:
        raise ValueError("maps must share a mesh")

    if v1.ndim == 3:  # group-valued
        g = np.linalg.inv(v1[0]) @ v2[0]
        dev = np.max(np.abs(v1 @ g - v2), axis=(-2, -1))
        node = int(np.argmax(dev))
        worst = float(dev[node])
        return UniquenessVerdict(related=worst <= tol, kind="right-translation",
                                 max_deviation=worst, argmax_node=node,
                                 translation=g)

    geo = geo or (f1.geometry if hasattr(f1, "geometry") else None)
    if geo is None:
        raise ValueError("point-valued uniqueness needs a geometry")
    if candidate is None:
        if geo.action != "affine":
            raise ValueError("automatic symmetry synthesis is only provided "
                             "for Euclidean geometries; pass a candidate")
        m0 = v1[0]
        best = None
        for cand in catalog_symmetry_candidates(geo, v1, v2, m0=m0):
            phi = klein.symmetry_map(geo, cand)
            dev = np.max(np.abs(phi(v1) - v2), axis=-1)
            node = int(np.argmax(dev))
            worst = float(dev[node])
            if best is None or worst < best.max_deviation:
                best = UniquenessVerdict(related=worst <= tol, kind="symmetry",
                                         max_deviation=worst, argmax_node=node,
                                         pair=cand)
        return best
    phi = klein.symmetry_map(geo, candidate)
    dev = np.max(np.abs(phi(v1) - v2), axis=-1)
    node = int(np.argmax(dev))
    worst = float(dev[node])
    return UniquenessVerdict(related=worst <= tol, kind="symmetry",
                             max_deviation=worst, argmax_node=node,
                             pair=candidate)
