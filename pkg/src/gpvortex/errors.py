"""Exception hierarchy shared across the package."""


class GpvError(Exception):
    """Base class for all package errors."""


class RegimeViolation(GpvError):
    """Parameters outside the admissible rotation regime (functional unbounded
    below, or a construction precondition on the speed fails)."""


class ConfigError(GpvError):
    """Malformed configuration (bad JSON, out-of-range values)."""


class GridMismatch(GpvError):
    """Two fields that must share a grid do not."""


class NonFiniteEnergy(GpvError):
    """An energy quadrature produced NaN or infinity."""


class EmptyRegion(GpvError):
    """A region/mask argument selects no grid cells."""


class NoConvergence(GpvError):
    """An iterative solve hit its iteration budget before reaching tolerance."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class NotConverged(GpvError):
    """An operation requiring a converged input received an unconverged one."""


class InterpolationOutOfRange(GpvError):
    """Resampling asked for points outside the source grid."""


class SingularSystem(GpvError):
    """A linear solve whose compatibility condition is violated."""


class WindingMismatch(GpvError):
    """A constructed lattice cell does not carry the expected unit winding."""


class ResolutionError(GpvError):
    """Grid spacing too coarse to represent the requested structure."""


class DegenerateModulus(GpvError):
    """Winding of a plaquette with a (numerically) vanishing corner modulus."""


class MissingInput(GpvError):
    """A required input file or report is absent."""
