"""Semantic exception hierarchy shared across the package."""


class TrimodalError(Exception):
    """Base class for all package-specific errors."""


class DomainError(TrimodalError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BracketError(TrimodalError, ValueError):
    """A root-finding bracket does not enclose a sign change."""


class IntegrationError(TrimodalError, RuntimeError):
    """Adaptive quadrature failed to converge.

    Carries the partial ``value`` and ``err_est`` so callers can decide
    whether the partial result is still usable.
    """

    def __init__(self, message, value=None, err_est=None):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


class ConvergenceError(TrimodalError, RuntimeError):
    """A series or iterative scheme did not reach the requested tolerance."""


class MomentError(TrimodalError, ValueError):
    """The requested moment does not exist for this kernel."""


class ModalityError(TrimodalError, RuntimeError):
    """Root-based and grid-based modality classifications disagree."""


class UnsupportedKernelError(TrimodalError, ValueError):
    """The operation is not defined for this kernel."""


class DegenerateDataError(TrimodalError, ValueError):
    """The data set is too small or has no spread to support the operation."""


class FitError(TrimodalError, RuntimeError):
    """Every optimizer start failed."""


class SingularMatrixError(TrimodalError, RuntimeError):
    """The information matrix could not be inverted reliably."""
