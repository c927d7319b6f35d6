"""Exception types raised across the package."""


class WishartError(Exception):
    """Base class for all package errors."""


class DomainError(WishartError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ParameterError(WishartError, ValueError):
    """Model parameters violate their invariants (e.g. K >= M)."""


class StructuralError(WishartError, ValueError):
    """Input has the wrong shape or size (odd-order Pfaffian, empty grid)."""


class ValidationError(WishartError, ValueError):
    """Input fails a numerical validity check (asymmetry, ordering)."""


class UnsupportedScaleError(WishartError, ValueError):
    """The requested problem size is beyond what the routine supports."""


class ConvergenceError(WishartError, ArithmeticError):
    """An iterative routine hit its iteration cap before converging."""


class IntegrationError(ConvergenceError):
    """Adaptive quadrature could not reach the requested tolerance.

    The best available estimate is kept on the exception so callers can
    decide whether it is good enough.
    """

    def __init__(self, message, value=None, err_est=None):
        super().__init__(message)
        self.value = value
        self.err_est = err_est
