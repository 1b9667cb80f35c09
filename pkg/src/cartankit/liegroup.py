"""Matrix Lie group and Lie algebra arithmetic.

Elements of a group are plain ``(n, n)`` numpy arrays; algebra elements are
length-``d`` coefficient vectors with respect to ``GroupSpec.basis``. All
functions are pure; a :class:`GroupSpec` is immutable and freely shareable.

The algebra bracket follows the right-invariant-field convention: the
structure constants are built from matrix commutators with a global sign
(``bracket_sign``, -1 for every catalog group) chosen so the flatness
residual of any pulled-back canonical form vanishes. See
``algebroid.calibrate_bracket_sign`` for the selection procedure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConstraintViolated, NotInAlgebra, OutOfRadius

DEFAULT_LIN_TOL = 1e-10
DEFAULT_MEMBERSHIP_TOL = 1e-8

# Pade-13 coefficients and scaling threshold (double precision).
_PADE13_B = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0,
    40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)
_PADE13_THETA = 5.371920351148152


def expm_stack(A: np.ndarray) -> np.ndarray:
    """Matrix exponential of a stack ``(..., n, n)`` via scaling-and-squaring
    with a degree-13 Pade approximant."""
    A = np.asarray(A)
    n = A.shape[-1]
    eye = np.broadcast_to(np.eye(n, dtype=A.dtype), A.shape).copy()
    norm = np.max(np.sum(np.abs(A), axis=-1), axis=-1)  # max row sum
    max_norm = float(np.max(norm)) if norm.size else 0.0
    s = max(0, int(np.ceil(np.log2(max_norm / _PADE13_THETA))) if max_norm > _PADE13_THETA else 0)
    if s:
        A = A / (2.0 ** s)
    b = _PADE13_B
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


@dataclass(frozen=True)
class GroupSpec:
    """A matrix Lie group: embedding size, algebra basis, structure
    constants in the calibrated bracket convention, and a membership
    residual descriptor.

    ``membership`` is one of ``none``, ``orthogonal``, ``special_orthogonal``,
    ``affine``, ``affine_orthogonal``, ``affine_unimodular``.
    """

    name: str
    n: int
    d: int
    basis: np.ndarray                 # (d, n, n)
    structure_constants: np.ndarray   # (d, d, d), bracket(E_i,E_j) = c[i,j,k] E_k
    membership: str = "none"
    lin_tol: float = DEFAULT_LIN_TOL
    membership_tol: float = DEFAULT_MEMBERSHIP_TOL
    bracket_sign: float = -1.0
    # derived, filled by make_group_spec
    basis_flat: np.ndarray = field(default=None, repr=False)   # (d, n*n)
    basis_pinv: np.ndarray = field(default=None, repr=False)   # (n*n, d)

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.n)


def make_group_spec(name: str, basis, membership: str = "none",
                    lin_tol: float = DEFAULT_LIN_TOL,
                    membership_tol: float = DEFAULT_MEMBERSHIP_TOL,
                    bracket_sign: float = -1.0) -> GroupSpec:
    """Build and validate a GroupSpec from basis matrices.

    Structure constants are ``bracket_sign`` times the commutator
    coefficients. Raises on linearly dependent basis, non-closed brackets,
    or a Jacobi defect above ``lin_tol``.
    """
    basis = np.asarray(basis, dtype=float)
    d, n, _ = basis.shape
    flat = basis.reshape(d, n * n)
    sv = np.linalg.svd(flat, compute_uv=False)
    if d > n * n or sv[-1] <= lin_tol * sv[0]:
        raise ValueError(f"{name}: basis matrices are not linearly independent")
    pinv = np.linalg.pinv(flat)

    comm = basis[:, None] @ basis[None, :] - basis[None, :] @ basis[:, None]
    comm_flat = comm.reshape(d, d, n * n)
    c = comm_flat @ pinv                            # (d, d, d)
    closure = np.max(np.abs(c @ flat - comm_flat))
    scale = max(1.0, float(np.max(np.abs(comm))))
    if closure > 100 * lin_tol * scale:
        raise ValueError(f"{name}: basis is not closed under commutators "
                         f"(residual {closure:.3e})")
    c = bracket_sign * c
    c[np.abs(c) < 1e-14] = 0.0

    jac = (np.einsum("ijm,mkl->ijkl", c, c)
           + np.einsum("jkm,mil->ijkl", c, c)
           + np.einsum("kim,mjl->ijkl", c, c))
    if np.max(np.abs(jac)) > 100 * lin_tol * max(1.0, float(np.max(np.abs(c)) ** 2)):
        raise ValueError(f"{name}: structure constants violate the Jacobi identity")

    return GroupSpec(name=name, n=n, d=d, basis=basis, structure_constants=c,
                     membership=membership, lin_tol=lin_tol,
                     membership_tol=membership_tol, bracket_sign=bracket_sign,
                     basis_flat=flat, basis_pinv=pinv)


def realize(spec: GroupSpec, coeffs: np.ndarray) -> np.ndarray:
    """Matrix realization ``sum_i coeffs[i] E_i``; broadcasts over leading axes."""
    coeffs = np.asarray(coeffs)
    return np.tensordot(coeffs, spec.basis, axes=([-1], [0]))


def project_to_algebra(spec: GroupSpec, mat: np.ndarray):
    """Coefficients of ``mat`` in the basis and the max-abs projection
    residual. Broadcasts over leading axes."""
    mat = np.asarray(mat)
    lead = mat.shape[:-2]
    coeffs = mat.reshape(lead + (spec.n * spec.n,)) @ spec.basis_pinv
    recon = np.tensordot(coeffs, spec.basis_flat, axes=([-1], [0]))
    residual = np.max(np.abs(recon - mat.reshape(lead + (spec.n * spec.n,))), axis=-1)
    return coeffs, residual


def exp(spec: GroupSpec, xi: np.ndarray) -> np.ndarray:
    """Group element ``expm(realize(xi))``. Total on finite input."""
    return expm_stack(realize(spec, xi))


def log(spec: GroupSpec, g: np.ndarray) -> np.ndarray:
    """Principal-logarithm coefficients of a group element.

    Raises OutOfRadius when an eigenvalue lies on the closed negative real
    axis and NotInAlgebra when the log leaves span(basis).
    """
    g = np.asarray(g, dtype=float)
    eig = np.linalg.eigvals(g)
    eig_tol = 1e-12 * max(1.0, float(np.max(np.abs(eig))))
    if np.any((eig.real <= eig_tol) & (np.abs(eig.imag) <= eig_tol)):
        raise OutOfRadius(f"{spec.name}: eigenvalue on the closed negative real "
                          "axis; principal logarithm undefined")
    L = scipy.linalg.logm(g)
    if np.max(np.abs(L.imag)) > 1e-9 * max(1.0, float(np.max(np.abs(L)))):
        raise OutOfRadius(f"{spec.name}: principal logarithm is not real")
    coeffs, residual = project_to_algebra(spec, L.real)
    tol = spec.lin_tol * max(1.0, float(np.max(np.abs(L))))
    if residual > 100 * tol:
        raise NotInAlgebra(f"{spec.name}: log(g) leaves span(basis) "
                           f"(residual {float(residual):.3e})", residual=float(residual))
    return coeffs


def bracket(spec: GroupSpec, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Algebra bracket in coefficients, from the structure constants.
    Broadcasts over leading axes."""
    xi = np.asarray(xi)
    eta = np.asarray(eta)
    return np.einsum("...i,...j,ijk->...k", xi, eta, spec.structure_constants)


def adjoint(spec: GroupSpec, g: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Coefficients of ``g (realize xi) g^-1`` re-expanded in the basis."""
    group_check(spec, g)
    conj = g @ realize(spec, xi) @ np.linalg.inv(g)
    coeffs, residual = project_to_algebra(spec, conj)
    tol = spec.lin_tol * max(1.0, float(np.max(np.abs(conj))))
    if np.max(residual) > 100 * tol:
        raise NotInAlgebra(f"{spec.name}: Ad_g leaves span(basis) "
                           f"(residual {float(np.max(residual)):.3e})",
                           residual=float(np.max(residual)))
    return coeffs


def membership_residual(spec: GroupSpec, mat: np.ndarray) -> float:
    """Max-norm violation of the group's defining constraints; 0 for exact
    elements. Total on any square matrix."""
    mat = np.asarray(mat, dtype=float)
    kind = spec.membership
    if kind == "none":
        return 0.0
    if kind in ("orthogonal", "special_orthogonal"):
        r = float(np.max(np.abs(mat.T @ mat - np.eye(spec.n))))
        if kind == "special_orthogonal":
            r = max(r, abs(float(np.linalg.det(mat)) - 1.0))
        return r
    # affine block forms: last row must be (0, ..., 0, 1)
    bottom = np.zeros(spec.n)
    bottom[-1] = 1.0
    r = float(np.max(np.abs(mat[-1] - bottom)))
    lin = mat[:-1, :-1]
    if kind == "affine_orthogonal":
        r = max(r, float(np.max(np.abs(lin.T @ lin - np.eye(spec.n - 1)))))
    elif kind == "affine_unimodular":
        r = max(r, abs(float(np.linalg.det(lin)) - 1.0))
    elif kind != "affine":
        raise ValueError(f"unknown membership kind {kind!r}")
    return r


def group_check(spec: GroupSpec, g: np.ndarray) -> None:
    """Validate a group element: finite, invertible, membership within
    tolerance. Raises ConstraintViolated."""
    g = np.asarray(g)
    if not np.all(np.isfinite(g)):
        raise ConstraintViolated(f"{spec.name}: non-finite matrix entries")
    if np.linalg.cond(g) > 1e12:
        raise ConstraintViolated(f"{spec.name}: matrix is numerically singular")
    r = membership_residual(spec, g)
    if r > spec.membership_tol:
        raise ConstraintViolated(
            f"{spec.name}: membership residual {r:.3e} exceeds "
            f"{spec.membership_tol:.1e}", residual=r)
