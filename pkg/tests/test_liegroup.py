import numpy as np
import pytest
import scipy.linalg

from cartankit import liegroup
from cartankit.errors import ConstraintViolated, NotInAlgebra, OutOfRadius
from cartankit.liegroup import (bracket, exp, expm_stack, log,
                                make_group_spec, membership_residual)

# ------------------------------------------------------------------ oracles


def exp_series(A, terms=20):
    """Truncated power series; independent of the Pade implementation."""
    out = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, terms + 1):
        term = term @ A / k
        out = out + term
    return out


def rodrigues(w):
    """Closed-form rotation for so(3) coefficient vectors (basis order:
    rotations about x, y, z)."""
    theta = np.linalg.norm(w)
    K = np.array([[0.0, -w[2], w[1]],
                  [w[2], 0.0, -w[0]],
                  [-w[1], w[0], 0.0]])
    if theta < 1e-14:
        return np.eye(3) + K
    return np.eye(3) + np.sin(theta) / theta * K \
        + (1 - np.cos(theta)) / theta ** 2 * (K @ K)


def ad_series(spec, eta, xi, terms=12):
    """Ad_{exp(eta)} xi as the matrix-commutator exponential series."""
    H = liegroup.realize(spec, eta)
    X = liegroup.realize(spec, xi)
    out = X.copy()
    term = X.copy()
    for k in range(1, terms + 1):
        term = (H @ term - term @ H) / k
        out = out + term
    coeffs, _ = liegroup.project_to_algebra(spec, out)
    return coeffs


def abelian_plane_spec():
    """R^2 as commuting translations in homogeneous coordinates."""
    tx = np.zeros((3, 3))
    tx[0, 2] = 1.0
    ty = np.zeros((3, 3))
    ty[1, 2] = 1.0
    return make_group_spec("R2", np.stack([tx, ty]), membership="affine_orthogonal")


# --------------------------------------------------------------------- exp


def test_exp_zero_is_identity(catalog):
    for geo in catalog.values():
        spec = geo.group
        np.testing.assert_allclose(exp(spec, np.zeros(spec.d)),
                                   np.eye(spec.n), atol=1e-15)


def test_exp_se2_translation_frozen(se2):
    g = exp(se2.group, np.array([0.0, 1.0, 0.0]))
    expected = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    np.testing.assert_allclose(g, expected, atol=1e-15)
    series = exp_series(liegroup.realize(se2.group, np.array([0.0, 1.0, 0.0])))
    np.testing.assert_allclose(g, series, atol=1e-15)


def test_exp_so3_pi_rotation_rodrigues(so3):
    xi = np.array([0.0, 0.0, np.pi])
    g = exp(so3.group, xi)
    np.testing.assert_allclose(g, np.diag([-1.0, -1.0, 1.0]), atol=1e-14)
    np.testing.assert_allclose(g, rodrigues(xi), atol=1e-13)


def test_exp_matches_series_random(catalog, rng):
    for geo in catalog.values():
        spec = geo.group
        for _ in range(5):
            xi = 0.5 * rng.standard_normal(spec.d)
            A = liegroup.realize(spec, xi)
            np.testing.assert_allclose(exp(spec, xi), exp_series(A, 30),
                                       atol=1e-13)


def test_exp_membership_residual(catalog, rng):
    for geo in catalog.values():
        spec = geo.group
        for _ in range(20):
            g = exp(spec, rng.standard_normal(spec.d))
            assert membership_residual(spec, g) <= 1e-10


def test_expm_stack_matches_scipy(rng):
    A = rng.standard_normal((6, 4, 4))
    ours = expm_stack(A)
    for i in range(6):
        np.testing.assert_allclose(ours[i], scipy.linalg.expm(A[i]),
                                   atol=1e-12)


def test_expm_stack_large_norm(rng):
    A = 40.0 * rng.standard_normal((3, 3))
    A = A - A.T  # keep the exponential bounded
    np.testing.assert_allclose(expm_stack(A), scipy.linalg.expm(A),
                               atol=1e-9)


# --------------------------------------------------------------------- log


def test_log_identity(catalog):
    for geo in catalog.values():
        spec = geo.group
        np.testing.assert_allclose(log(spec, np.eye(spec.n)),
                                   np.zeros(spec.d), atol=1e-14)


def test_log_exp_roundtrip(catalog, rng):
    for geo in catalog.values():
        spec = geo.group
        for _ in range(100):
            xi = 0.3 * rng.standard_normal(spec.d)
            np.testing.assert_allclose(log(spec, exp(spec, xi)), xi,
                                       atol=1e-9)


def test_log_pi_rotation_out_of_radius(se2):
    g = exp(se2.group, np.array([np.pi, 0.0, 0.0]))
    with pytest.raises(OutOfRadius):
        log(se2.group, g)


def test_log_outside_algebra_span(se2):
    with pytest.raises(NotInAlgebra):
        log(se2.group, np.diag([2.0, 3.0, 1.0]))


# ----------------------------------------------------------------- adjoint


def test_adjoint_identity(se2, rng):
    xi = rng.standard_normal(3)
    np.testing.assert_allclose(
        liegroup.adjoint(se2.group, np.eye(3), xi), xi, atol=1e-14)


def test_adjoint_se2_quarter_turn_frozen(se2):
    r = exp(se2.group, np.array([np.pi / 2, 0.0, 0.0]))
    out = liegroup.adjoint(se2.group, r, np.array([0.0, 1.0, 0.0]))
    np.testing.assert_allclose(out, np.array([0.0, 0.0, 1.0]), atol=1e-14)


def test_adjoint_matches_series(catalog, rng):
    for geo in catalog.values():
        spec = geo.group
        eta = 0.4 * rng.standard_normal(spec.d)
        xi = rng.standard_normal(spec.d)
        direct = liegroup.adjoint(spec, exp(spec, eta), xi)
        np.testing.assert_allclose(direct, ad_series(spec, eta, xi),
                                   atol=1e-10)


def test_adjoint_is_algebra_map(catalog, rng):
    for geo in catalog.values():
        spec = geo.group
        for _ in range(10):
            g = exp(spec, 0.5 * rng.standard_normal(spec.d))
            xi = rng.standard_normal(spec.d)
            eta = rng.standard_normal(spec.d)
            lhs = liegroup.adjoint(spec, g, bracket(spec, xi, eta))
            rhs = bracket(spec, liegroup.adjoint(spec, g, xi),
                          liegroup.adjoint(spec, g, eta))
            np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_adjoint_rejects_non_member(so3):
    with pytest.raises(ConstraintViolated):
        liegroup.adjoint(so3.group, 2.0 * np.eye(3), np.array([1.0, 0.0, 0.0]))


# ----------------------------------------------------------------- bracket


def test_bracket_self_vanishes(catalog, rng):
    for geo in catalog.values():
        spec = geo.group
        xi = rng.standard_normal(spec.d)
        np.testing.assert_allclose(bracket(spec, xi, xi),
                                   np.zeros(spec.d), atol=1e-14)


def test_bracket_abelian_plane(rng):
    spec = abelian_plane_spec()
    for _ in range(5):
        xi = rng.standard_normal(2)
        eta = rng.standard_normal(2)
        np.testing.assert_allclose(bracket(spec, xi, eta), np.zeros(2),
                                   atol=1e-15)


def test_bracket_se2_rot_tx_frozen(se2):
    # right-invariant convention: bracket(rot, t_x) = -t_y
    out = bracket(se2.group, np.array([1.0, 0.0, 0.0]),
                  np.array([0.0, 1.0, 0.0]))
    np.testing.assert_allclose(out, np.array([0.0, 0.0, -1.0]), atol=1e-15)


def test_structure_constants_regenerate_brackets(catalog):
    for geo in catalog.values():
        spec = geo.group
        basis = spec.basis
        for i in range(spec.d):
            for j in range(spec.d):
                matrix_side = spec.bracket_sign * (
                    basis[i] @ basis[j] - basis[j] @ basis[i])
                ei = np.zeros(spec.d)
                ei[i] = 1.0
                ej = np.zeros(spec.d)
                ej[j] = 1.0
                recon = liegroup.realize(spec, bracket(spec, ei, ej))
                np.testing.assert_allclose(recon, matrix_side,
                                           atol=100 * spec.lin_tol)


def test_structure_constants_antisymmetric(catalog):
    for geo in catalog.values():
        c = geo.group.structure_constants
        np.testing.assert_allclose(c, -np.swapaxes(c, 0, 1), atol=1e-14)


def test_make_group_spec_rejects_dependent_basis():
    tx = np.zeros((3, 3))
    tx[0, 2] = 1.0
    with pytest.raises(ValueError):
        make_group_spec("bad", np.stack([tx, 2.0 * tx]))


# -------------------------------------------------------------- membership


def test_membership_identity_so3(so3):
    assert membership_residual(so3.group, np.eye(3)) == 0.0


def test_membership_broken_bottom_row(se2):
    g = np.eye(3)
    g[2, 0] = 0.25
    assert membership_residual(se2.group, g) == pytest.approx(0.25)


def test_membership_rodrigues_output(so3, rng):
    for _ in range(10):
        g = exp(so3.group, rng.standard_normal(3))
        assert membership_residual(so3.group, g) <= 1e-12


def test_group_check_raises(se2):
    with pytest.raises(ConstraintViolated):
        liegroup.group_check(se2.group, np.diag([1.0, 1.0, 2.0]))
