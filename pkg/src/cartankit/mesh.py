"""Graph-discretized parameter domains.

A :class:`MeshDomain` is a set of parameter points joined by straight
edges. Periodic identifications (circle / torus domains) are encoded in
per-edge displacement vectors, so a wrap edge carries the true step in the
covering space rather than the chord between stored coordinates. Analytic
field evaluators on identified domains must therefore be defined on the
covering space (periodic in the identified axes).

Fundamental cycles are one per non-tree edge: tree path from the base node
to the edge tail, the edge itself, tree path from the head back to base.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import Disconnected

# A route is a list of (edge_index, direction) pairs; direction +1 traverses
# edges[e, 0] -> edges[e, 1], -1 the reverse.
Route = list


@dataclass(frozen=True)
class MeshDomain:
    nodes: np.ndarray            # (N, sigma)
    edges: np.ndarray            # (E, 2) int
    edge_disp: np.ndarray        # (E, sigma) displacement incl. wraps
    x0: int = 0
    periods: tuple = ()          # per-axis period or None
    grid_shape: tuple = ()       # node counts per axis (grid meshes only)
    grid_axes: tuple = ()        # node coordinates per axis
    # spanning-tree data, filled by cycle_basis
    tree_parent: np.ndarray = field(default=None, repr=False)   # (N,) int
    tree_edge: np.ndarray = field(default=None, repr=False)     # (N,) int
    tree_dir: np.ndarray = field(default=None, repr=False)      # (N,) int
    depth: np.ndarray = field(default=None, repr=False)         # (N,) int
    cycles: tuple = ()           # Route per non-tree edge

    @property
    def sigma(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def tree_route(self, node: int) -> Route:
        """Route along tree edges from x0 to ``node``."""
        hops = []
        u = node
        while self.tree_parent[u] >= 0:
            hops.append((int(self.tree_edge[u]), int(self.tree_dir[u])))
            u = int(self.tree_parent[u])
        hops.reverse()
        return hops

    def route_between(self, u: int, v: int) -> Route:
        """Tree route u -> v (through the nearest common ancestor)."""
        up = [(e, -d) for e, d in reversed(self.tree_route(u))]
        down = self.tree_route(v)
        # cancel the shared x0-side prefix of both legs
        while up and down and up[-1][0] == down[0][0]:
            up.pop()
            down.pop(0)
        return up + down

    def route_from_nodes(self, node_seq) -> Route:
        """Resolve a node path into a route; consecutive nodes must share
        an edge."""
        lookup = {}
        for e, (a, b) in enumerate(self.edges):
            lookup.setdefault((int(a), int(b)), e)
        hops = []
        for a, b in zip(node_seq[:-1], node_seq[1:]):
            if (a, b) in lookup:
                hops.append((lookup[(a, b)], 1))
            elif (b, a) in lookup:
                hops.append((lookup[(b, a)], -1))
            else:
                raise ValueError(f"nodes {a} and {b} are not joined by an edge")
        return hops

    def route_nodes(self, route: Route) -> list:
        """Node sequence visited by a route."""
        if not route:
            return [self.x0]
        e0, d0 = route[0]
        out = [int(self.edges[e0, 0 if d0 > 0 else 1])]
        for e, d in route:
            out.append(int(self.edges[e, 1 if d > 0 else 0]))
        return out

    def route_winding(self, route: Route) -> np.ndarray:
        """Total displacement of a closed route; nonzero entries count
        wraps around identified axes."""
        w = np.zeros(self.sigma)
        for e, d in route:
            w += d * self.edge_disp[e]
        return w

    @property
    def monodromy_cycles(self) -> tuple:
        """Fundamental cycles with nonzero winding: the mesh-scale
        generators of the fundamental group. Contractible fundamental
        cycles stay in ``cycles`` and feed reconstruction cycle
        residuals."""
        out = []
        for c in self.cycles:
            if np.max(np.abs(self.route_winding(c))) > 1e-9:
                out.append(c)
        return tuple(out)


def cycle_basis(mesh: MeshDomain) -> MeshDomain:
    """Breadth-first spanning tree rooted at ``mesh.x0`` plus one
    fundamental cycle per non-tree edge. Raises Disconnected."""
    n = mesh.n_nodes
    adjacency = [[] for _ in range(n)]
    for e, (a, b) in enumerate(mesh.edges):
        adjacency[int(a)].append((int(b), e, 1))
        adjacency[int(b)].append((int(a), e, -1))

    parent = np.full(n, -1, dtype=int)
    tree_edge = np.full(n, -1, dtype=int)
    tree_dir = np.zeros(n, dtype=int)
    depth = np.full(n, -1, dtype=int)
    depth[mesh.x0] = 0
    queue = [mesh.x0]
    tree_edges = set()
    while queue:
        nxt = []
        for u in queue:
            for v, e, d in adjacency[u]:
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    parent[v] = u
                    tree_edge[v] = e
                    tree_dir[v] = d
                    tree_edges.add(e)
                    nxt.append(v)
        queue = nxt
    if np.any(depth < 0):
        missing = int(np.sum(depth < 0))
        raise Disconnected(f"mesh graph is disconnected ({missing} unreachable nodes)")

    out = replace(mesh, tree_parent=parent, tree_edge=tree_edge,
                  tree_dir=tree_dir, depth=depth)
    cycles = []
    for e, (a, b) in enumerate(mesh.edges):
        if e in tree_edges:
            continue
        to_a = out.tree_route(int(a))
        from_b = [(ed, -d) for ed, d in reversed(out.tree_route(int(b)))]
        cycles.append(to_a + [(e, 1)] + from_b)
    return replace(out, cycles=tuple(cycles))


def grid_mesh(extents, resolution, identify=None, x0: int = 0) -> MeshDomain:
    """Regular grid on a box. ``resolution[a]`` counts nodes along axis
    ``a``; an identified axis wraps its last node back to the first, so the
    stated extent is the period."""
    extents = [tuple(map(float, e)) for e in extents]
    resolution = [int(r) for r in resolution]
    sigma = len(extents)
    identify = tuple(bool(i) for i in (identify or (False,) * sigma))
    axes = []
    spacing = []
    periods = []
    for (lo, hi), res, wrap in zip(extents, resolution, identify):
        if res < 2:
            raise ValueError("grid resolution must be >= 2")
        if wrap:
            h = (hi - lo) / res
            axes.append(lo + h * np.arange(res))
            periods.append(hi - lo)
        else:
            h = (hi - lo) / (res - 1)
            axes.append(np.linspace(lo, hi, res))
            periods.append(None)
        spacing.append(h)

    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    shape = tuple(len(a) for a in axes)
    idx = np.arange(nodes.shape[0]).reshape(shape)

    edges = []
    disps = []
    for a in range(sigma):
        res = shape[a]
        n_steps = res if identify[a] else res - 1
        step = np.zeros(sigma)
        step[a] = spacing[a]
        for k in range(n_steps):
            src = np.take(idx, k, axis=a)
            dst = np.take(idx, (k + 1) % res, axis=a)
            for u, v in zip(src.ravel(), dst.ravel()):
                edges.append((int(u), int(v)))
                disps.append(step.copy())
    mesh = MeshDomain(nodes=nodes, edges=np.array(edges, dtype=int),
                      edge_disp=np.array(disps), x0=x0,
                      periods=tuple(periods), grid_shape=shape,
                      grid_axes=tuple(axes))
    return cycle_basis(mesh)


def interval_mesh(a: float, b: float, n: int, x0: int = 0) -> MeshDomain:
    """1-D grid on [a, b] with n nodes."""
    return grid_mesh([(a, b)], [n], identify=(False,), x0=x0)


def circle_mesh(circumference: float, n: int, x0: int = 0) -> MeshDomain:
    """1-D periodic domain: n nodes, a single wrap edge closes the loop."""
    return grid_mesh([(0.0, circumference)], [n], identify=(True,), x0=x0)


# ------------------------------------------------------ grid field helpers


def _require_grid(mesh: MeshDomain):
    if not mesh.grid_shape:
        raise ValueError("operation requires a grid mesh")


def _axis_locate(axis, period, q):
    """Cell index and weight along one axis; periodic axes wrap."""
    axis = np.asarray(axis)
    res = len(axis)
    h = axis[1] - axis[0]
    if period is not None:
        qq = np.mod(q - axis[0], period) + axis[0]
        idx = np.clip(np.floor((qq - axis[0]) / h).astype(int), 0, res - 1)
        nxt = (idx + 1) % res
        w = (qq - axis[idx]) / h
    else:
        idx = np.clip(np.floor((q - axis[0]) / h).astype(int), 0, res - 2)
        nxt = idx + 1
        w = (q - axis[idx]) / h
    return idx, nxt, w


def grid_interpolate(mesh: MeshDomain, node_values: np.ndarray,
                     points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of per-node data at arbitrary points.

    ``node_values`` has shape (N, ...); returns (..., ...). Periodic axes
    wrap; non-periodic queries are clamped to the hull cell.
    """
    _require_grid(mesh)
    points = np.asarray(points, dtype=float)
    shape = mesh.grid_shape
    sigma = mesh.sigma
    lead = points.shape[:-1]
    vals = node_values.reshape(shape + node_values.shape[1:])

    locs = [_axis_locate(mesh.grid_axes[a], mesh.periods[a], points[..., a])
            for a in range(sigma)]
    out = 0.0
    for corner in range(1 << sigma):
        weight = np.ones(lead)
        index = []
        for a in range(sigma):
            idx, nxt, w = locs[a]
            if corner >> a & 1:
                index.append(nxt)
                weight = weight * w
            else:
                index.append(idx)
                weight = weight * (1.0 - w)
        corner_vals = vals[tuple(index)]
        out = out + weight.reshape(lead + (1,) * (corner_vals.ndim - len(lead))) * corner_vals
    return out


def nearest_node(mesh: MeshDomain, points: np.ndarray) -> np.ndarray:
    """Index of the grid node nearest to each query point."""
    _require_grid(mesh)
    points = np.asarray(points, dtype=float)
    shape = mesh.grid_shape
    flat_idx = 0
    for a in range(mesh.sigma):
        axis = mesh.grid_axes[a]
        h = axis[1] - axis[0]
        if mesh.periods[a] is not None:
            ia = np.mod(np.rint((points[..., a] - axis[0]) / h).astype(int), shape[a])
        else:
            ia = np.clip(np.rint((points[..., a] - axis[0]) / h).astype(int),
                         0, shape[a] - 1)
        flat_idx = flat_idx * shape[a] + ia
    return flat_idx


def grid_partials(mesh: MeshDomain, node_values: np.ndarray) -> np.ndarray:
    """Per-axis partial derivatives of node data, second order everywhere:
    central differences inside (wrapping on periodic axes), three-point
    one-sided stencils at open boundaries. Returns (N, sigma, ...)."""
    _require_grid(mesh)
    shape = mesh.grid_shape
    tail = node_values.shape[1:]
    vals = node_values.reshape(shape + tail)
    outs = []
    for a in range(mesh.sigma):
        axis = mesh.grid_axes[a]
        h = float(axis[1] - axis[0])
        v = np.moveaxis(vals, a, 0)
        if mesh.periods[a] is not None:
            dv = (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2.0 * h)
        else:
            dv = np.empty_like(v)
            dv[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
            dv[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
            dv[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
        outs.append(np.moveaxis(dv, 0, a).reshape((-1,) + tail))
    return np.stack(outs, axis=1)
