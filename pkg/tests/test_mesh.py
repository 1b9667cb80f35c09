import numpy as np
import pytest

from cartankit import mesh
from cartankit.errors import Disconnected
from cartankit.mesh import (MeshDomain, circle_mesh, cycle_basis, grid_mesh,
                            grid_interpolate, grid_partials, interval_mesh)


def test_disk_grid_has_no_monodromy_cycles():
    m = grid_mesh([(0, 1), (0, 1)], [5, 5])
    assert len(m.monodromy_cycles) == 0
    # the full fundamental basis still has one cycle per non-tree edge
    assert len(m.cycles) == len(m.edges) - m.n_nodes + 1


def test_circle_has_one_cycle():
    m = circle_mesh(2 * np.pi, 12)
    assert len(m.cycles) == 1
    assert len(m.monodromy_cycles) == 1
    w = m.route_winding(m.monodromy_cycles[0])
    assert w[0] == pytest.approx(2 * np.pi)


def test_torus_cycle_count_and_windings():
    m = grid_mesh([(0, 1), (0, 1)], [4, 4], identify=(True, True))
    assert len(m.cycles) == len(m.edges) - m.n_nodes + 1
    windings = np.array([m.route_winding(c) for c in m.monodromy_cycles])
    # both independent wrap directions are represented
    assert np.any(np.abs(windings[:, 0]) > 0.5)
    assert np.any(np.abs(windings[:, 1]) > 0.5)


def test_tree_structure():
    m = grid_mesh([(0, 1), (0, 1)], [4, 5])
    assert m.depth[m.x0] == 0
    for v in range(m.n_nodes):
        if v != m.x0:
            assert m.depth[v] == m.depth[m.tree_parent[v]] + 1
    route = m.tree_route(17)
    assert m.route_nodes(route)[0] == m.x0
    assert m.route_nodes(route)[-1] == 17


def test_route_between():
    m = grid_mesh([(0, 1), (0, 1)], [4, 4])
    route = m.route_between(5, 14)
    nodes = m.route_nodes(route)
    assert nodes[0] == 5 and nodes[-1] == 14


def test_route_from_nodes_rejects_non_edges():
    m = grid_mesh([(0, 1), (0, 1)], [4, 4])
    with pytest.raises(ValueError):
        m.route_from_nodes([0, 5])  # diagonal, not an edge


def test_disconnected_raises():
    nodes = np.array([[0.0], [1.0], [2.0], [3.0]])
    edges = np.array([[0, 1], [2, 3]])
    disp = np.array([[1.0], [1.0]])
    with pytest.raises(Disconnected):
        cycle_basis(MeshDomain(nodes=nodes, edges=edges, edge_disp=disp))


def test_grid_interpolate_exact_at_nodes_and_linear():
    m = grid_mesh([(0, 2), (0, 1)], [5, 4])
    vals = 3.0 * m.nodes[:, 0] - 2.0 * m.nodes[:, 1] + 0.5
    got = grid_interpolate(m, vals[:, None], m.nodes)[..., 0]
    np.testing.assert_allclose(got, vals, atol=1e-14)
    q = np.array([[0.37, 0.81], [1.93, 0.02]])
    np.testing.assert_allclose(
        grid_interpolate(m, vals[:, None], q)[..., 0],
        3.0 * q[:, 0] - 2.0 * q[:, 1] + 0.5, atol=1e-13)


def test_grid_interpolate_periodic_wrap():
    m = circle_mesh(1.0, 8)
    vals = np.cos(2 * np.pi * m.nodes[:, 0])[:, None]
    a = grid_interpolate(m, vals, np.array([[0.01]]))
    b = grid_interpolate(m, vals, np.array([[1.01]]))
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_grid_partials_linear_exact():
    m = grid_mesh([(0, 1), (0, 2)], [6, 7])
    vals = (2.0 * m.nodes[:, 0] + 5.0 * m.nodes[:, 1])[:, None]
    d = grid_partials(m, vals)
    np.testing.assert_allclose(d[:, 0, 0], 2.0, atol=1e-12)
    np.testing.assert_allclose(d[:, 1, 0], 5.0, atol=1e-12)


def test_grid_partials_second_order():
    errs = []
    for n in (33, 65):
        m = interval_mesh(0.0, 1.0, n)
        t = m.nodes[:, 0]
        vals = np.sin(3.0 * t)[:, None]
        d = grid_partials(m, vals)[:, 0, 0]
        errs.append(np.max(np.abs(d - 3.0 * np.cos(3.0 * t))))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.3)


def test_grid_partials_periodic_axis():
    m = circle_mesh(1.0, 128)
    t = m.nodes[:, 0]
    vals = np.sin(2 * np.pi * t)[:, None]
    d = grid_partials(m, vals)[:, 0, 0]
    np.testing.assert_allclose(d, 2 * np.pi * np.cos(2 * np.pi * t), atol=2e-3)
