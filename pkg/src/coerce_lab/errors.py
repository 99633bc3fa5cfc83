"""Exception types raised across the package."""


class CoerceLabError(Exception):
    """Base class for all package errors."""


class OrderUnsupported(CoerceLabError, ValueError):
    """Requested derivative order exceeds what is available."""


class TailTooHeavy(CoerceLabError, ValueError):
    """Measure mass outside the truncation box is not certified small."""

    def __init__(self, tail, limit):
        super().__init__(
            f"tail estimate {tail:.3e} exceeds {limit:.1e}; increase the radius"
        )
        self.tail = tail
        self.limit = limit


class GridMismatch(CoerceLabError, ValueError):
    """A grid function was used with a grid it does not belong to."""


class NodeMismatch(GridMismatch):
    """Two measures that must share nodes do not."""


class ZeroFunction(CoerceLabError, ValueError):
    """Operation undefined for the zero function."""


class ConstantFunction(CoerceLabError, ValueError):
    """Operation undefined (or trivial) for a constant function."""


class QOutOfRange(CoerceLabError, ValueError):
    """Exponent outside the open interval (1, inf)."""


class NonConvergence(CoerceLabError, RuntimeError):
    """Iterative solver hit its iteration cap; ``result`` holds the best iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DegenerateBasis(CoerceLabError, ValueError):
    """Basis functions are linearly dependent on the grid."""


class ConvergenceFailure(CoerceLabError, RuntimeError):
    """Iterative eigensolver failed; ``residuals`` holds what was achieved."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class BasisDeficit(CoerceLabError, ValueError):
    """Retained eigenvectors do not capture the function."""


class LinearSolveFailure(CoerceLabError, RuntimeError):
    """Implicit time step did not reach the requested residual."""


class WindowTooSmall(CoerceLabError, ValueError):
    """Fit window holds too few samples."""


class Underflow(CoerceLabError, ValueError):
    """Values in the fit window are below the floating point floor."""


class PRangeViolation(CoerceLabError, ValueError):
    """Exponent p outside the range where the weighted bound is proven."""


class AssumptionViolation(CoerceLabError, ValueError):
    """Potential fails a regularity precondition of the requested check."""


class PairingInvalid(CoerceLabError, ValueError):
    """Orlicz function is not paired with Phi_{A,p} via the gamma ladder."""


class ConfigInvalid(CoerceLabError, ValueError):
    """Experiment configuration is malformed."""
