"""Built-in analytic test maps, addressable as ``test.<name>`` from configs.

Every map evaluator is vectorized over stacked parameter points and safe to
call with complex coordinates, so tangent data can be taken by complex-step
differentiation to machine accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebroid, klein
from .errors import UnknownGeometry
from .mesh import MeshDomain


@dataclass(frozen=True)
class TestMap:
    name: str
    geometry: str       # catalog geometry name
    target: str         # point | group
    sigma: int
    fn: object
    summary: str


def _se2(th, u, v, like):
    out = np.zeros(np.shape(th) + (3, 3), dtype=np.asarray(like).dtype)
    out[..., 0, 0] = np.cos(th)
    out[..., 0, 1] = -np.sin(th)
    out[..., 0, 2] = u
    out[..., 1, 0] = np.sin(th)
    out[..., 1, 1] = np.cos(th)
    out[..., 1, 2] = v
    out[..., 2, 2] = 1.0
    return out


def _spiral(pts):
    pts = np.asarray(pts)
    x, y = pts[..., 0], pts[..., 1]
    th = 1.2 * x + 0.8 * y + 0.25 * np.sin(2.0 * x + 1.0 * y)
    u = x + 0.3 * np.sin(2.0 * y)
    v = y - 0.2 * np.cos(3.0 * x)
    return _se2(th, u, v, pts)


def _rot_z(a, like):
    out = np.zeros(np.shape(a) + (3, 3), dtype=np.asarray(like).dtype)
    out[..., 0, 0] = np.cos(a)
    out[..., 0, 1] = -np.sin(a)
    out[..., 1, 0] = np.sin(a)
    out[..., 1, 1] = np.cos(a)
    out[..., 2, 2] = 1.0
    return out


def _rot_y(a, like):
    out = np.zeros(np.shape(a) + (3, 3), dtype=np.asarray(like).dtype)
    out[..., 0, 0] = np.cos(a)
    out[..., 0, 2] = np.sin(a)
    out[..., 1, 1] = 1.0
    out[..., 2, 0] = -np.sin(a)
    out[..., 2, 2] = np.cos(a)
    return out


def _so3_wobble(pts):
    pts = np.asarray(pts)
    x, y = pts[..., 0], pts[..., 1]
    alpha = 0.9 * x + 0.3 * np.sin(2.0 * y)
    beta = 0.7 * y + 0.2 * x + 0.1 * np.cos(1.5 * x)
    return _rot_z(alpha, pts) @ _rot_y(beta, pts)


def _se3_twist(pts):
    pts = np.asarray(pts)
    x, y = pts[..., 0], pts[..., 1]
    R = _so3_wobble(pts)
    out = np.zeros(pts.shape[:-1] + (4, 4), dtype=pts.dtype)
    out[..., :3, :3] = R
    out[..., 0, 3] = x
    out[..., 1, 3] = y
    out[..., 2, 3] = 0.2 * np.sin(x + y)
    out[..., 3, 3] = 1.0
    return out


def _circle2(pts):
    t = np.asarray(pts)[..., 0]
    return np.stack([np.cos(2.0 * np.pi * t), np.sin(2.0 * np.pi * t)], axis=-1)


def _plane_patch(pts):
    pts = np.asarray(pts)
    x, y = pts[..., 0], pts[..., 1]
    return np.stack([x + 0.1 * np.sin(2.0 * y), y + 0.1 * np.cos(2.0 * x)],
                    axis=-1)


def _sphere_cap(pts):
    pts = np.asarray(pts)
    theta = 0.4 + 0.9 * pts[..., 0]
    phi = 0.3 + 1.1 * pts[..., 1]
    return np.stack([np.sin(theta) * np.cos(phi),
                     np.sin(theta) * np.sin(phi),
                     np.cos(theta)], axis=-1)


def _sphere_curve(pts):
    t = np.asarray(pts)[..., 0]
    theta = 0.5 + 0.8 * t
    phi = 1.7 * t
    return np.stack([np.sin(theta) * np.cos(phi),
                     np.sin(theta) * np.sin(phi),
                     np.cos(theta)], axis=-1)


def _s3_patch(pts):
    pts = np.asarray(pts)
    x, y = pts[..., 0], pts[..., 1]
    q = np.stack([1.0 + 0.0 * x, 0.5 * x, 0.5 * y, 0.3 + 0.2 * x * y], axis=-1)
    norm = np.sqrt(np.sum(q * q, axis=-1))[..., None]
    return q / norm


def _arc_s1(pts):
    t = np.asarray(pts)[..., 0]
    a = 0.2 + 1.5 * t
    return np.stack([np.cos(a), np.sin(a)], axis=-1)


TEST_MAPS = {
    "test.spiral": TestMap("test.spiral", "se2-plane", "group", 2, _spiral,
                           "smooth SE(2)-valued map on the unit square"),
    "test.so3_wobble": TestMap("test.so3_wobble", "so3-sphere", "group", 2,
                               _so3_wobble, "smooth SO(3)-valued map"),
    "test.se3_twist": TestMap("test.se3_twist", "e3-space", "group", 2,
                              _se3_twist, "smooth SE(3)-valued map"),
    "test.circle2": TestMap("test.circle2", "se2-plane", "point", 1, _circle2,
                            "unit circle traversed once"),
    "test.plane_patch": TestMap("test.plane_patch", "se2-plane", "point", 2,
                                _plane_patch, "immersed patch of the plane"),
    "test.sphere_cap": TestMap("test.sphere_cap", "so3-sphere", "point", 2,
                               _sphere_cap, "embedded patch of the 2-sphere"),
    "test.sphere_curve": TestMap("test.sphere_curve", "so3-sphere", "point", 1,
                                 _sphere_curve, "curve on the 2-sphere"),
    "test.s3_patch": TestMap("test.s3_patch", "so4-sphere3", "point", 2,
                             _s3_patch, "embedded patch of the 3-sphere"),
    "test.arc_s1": TestMap("test.arc_s1", "so2-circle", "point", 1, _arc_s1,
                           "arc of the unit circle"),
}


def get_test_map(name: str) -> TestMap:
    if name not in TEST_MAPS:
        raise UnknownGeometry(
            f"unknown test map {name!r}; available: {sorted(TEST_MAPS)}")
    return TEST_MAPS[name]


def map_field(name: str, domain: MeshDomain,
              geometry: klein.GeometrySpec = None) -> algebroid.MapField:
    """Sample a named test map over a mesh, keeping the analytic
    evaluator."""
    tm = get_test_map(name)
    if domain.sigma != tm.sigma:
        raise ValueError(f"{name} expects a {tm.sigma}-dimensional domain")
    geo = geometry or klein.get_geometry(tm.geometry)
    if tm.target == "group":
        geo = geo if geo.action == "group" else klein.group_geometry(geo.group)
    return algebroid.MapField(domain=domain, geometry=geo,
                              values=np.asarray(tm.fn(domain.nodes)),
                              target=tm.target, evaluator=tm.fn)
