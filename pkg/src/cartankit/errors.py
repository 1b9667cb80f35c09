"""Exception hierarchy for cartankit.

Every failure mode that callers are expected to catch has its own class;
all inherit from :class:`CartanKitError`. Numerical context (residuals,
offending node indices) rides along on the instance so reports can cite it.
"""


class CartanKitError(Exception):
    """Base class for all cartankit errors."""


# ---------------------------------------------------------------- lie_core


class OutOfRadius(CartanKitError):
    """Principal matrix logarithm undefined (eigenvalue on the closed
    negative real axis)."""


class NotInAlgebra(CartanKitError):
    """A matrix expected to lie in span(basis) has projection residual
    above tolerance."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


# ------------------------------------------------------------------ klein


class ConstraintViolated(CartanKitError):
    """A point left the constraint locus, or a matrix failed group
    membership, beyond tolerance."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class NotTransitive(CartanKitError):
    """Anchor / generator map fails to span the required tangent space."""


class NotNormalizing(CartanKitError):
    """Candidate r does not normalize the isotropy subgroup."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class RepresentativeNotFound(CartanKitError):
    """Coset representative solve failed (non-transitive data)."""


class DimensionUnsupported(CartanKitError):
    """Requested construction only exists for specific dimensions."""


# -------------------------------------------------------------- algebroid


class RankDeficient(CartanKitError):
    """Tangent map of a sampled map drops rank at some node; the pullback
    fiber dimension would jump there."""

    def __init__(self, msg, node=None):
        super().__init__(msg)
        self.node = node


class AxiomViolated(CartanKitError):
    """A Maurer-Cartan axiom fails; carries the axiom name and node."""

    def __init__(self, msg, axiom=None, node=None):
        super().__init__(msg)
        self.axiom = axiom
        self.node = node


class NotInFiber(CartanKitError):
    """A computed section value (e.g. a bracket) leaves the fiber beyond
    tolerance."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


# ------------------------------------------------------------ path_engine


class StepTooLarge(CartanKitError):
    """Richardson error estimate of a development exceeds the configured
    integration tolerance."""

    def __init__(self, msg, estimate=None):
        super().__init__(msg)
        self.estimate = estimate


class NotComposable(CartanKitError):
    """Concatenation endpoints do not match."""


# -------------------------------------------------------------- monodromy


class Disconnected(CartanKitError):
    """Mesh graph is not connected."""


class BasepointMismatch(CartanKitError):
    """The anchored condition x0 -> m0 fails; names the violating kernel
    vector."""

    def __init__(self, msg, kernel_vector=None, residual=None):
        super().__init__(msg)
        self.kernel_vector = kernel_vector
        self.residual = residual


# ------------------------------------------------------------ reconstruct


class NontrivialMonodromy(CartanKitError):
    """Reconstruction requested but the pointed monodromy is nontrivial;
    carries the offending report."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class IsotropyDrift(CartanKitError):
    """A reconstructed value fails the per-node anchored-isotropy check."""

    def __init__(self, msg, node=None, residual=None):
        super().__init__(msg)
        self.node = node
        self.residual = residual


class NoSolution(CartanKitError):
    """A per-node morphism solve has no solution within tolerance."""

    def __init__(self, msg, node=None, residual=None):
        super().__init__(msg)
        self.node = node
        self.residual = residual


# ----------------------------------------------------------------- cli_io


class ParseError(CartanKitError):
    """Malformed JSON / expression text."""


class ValidationError(CartanKitError):
    """Config schema violation; message names the offending key."""


class UnknownGeometry(CartanKitError):
    """Referenced catalog geometry or test map does not exist."""


class IoError(CartanKitError):
    """Output could not be written."""
