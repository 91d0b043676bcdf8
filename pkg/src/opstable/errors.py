"""Exception and warning types shared across the library."""


class OpstableError(Exception):
    """Base class for all library errors."""


class DomainError(OpstableError, ValueError):
    """Input lies outside an operation's mathematical domain."""


class ModelValidationError(DomainError):
    """A model invariant failed at construction or config-load time."""


class UnsupportedRegimeError(DomainError):
    """The operation is not defined for the model's scaling regime."""


class MomentInfiniteError(DomainError):
    """The requested fractional moment diverges."""


class PoleError(DomainError):
    """Evaluation requested at a pole of an analytic expression."""


class NumericalError(OpstableError, RuntimeError):
    """A numerical procedure failed to reach its target."""


class NonConvergenceError(NumericalError):
    """An iterative solver exhausted its iteration budget."""


class AccuracyError(NumericalError):
    """A quadrature could not meet the requested tolerance.

    Carries the residual estimate so callers can report it.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class DivergentIntegrandError(NumericalError):
    """The integrand fails its decay precondition; the integral diverges."""


class AccuracyWarning(UserWarning):
    """A result is returned but its estimated accuracy is degraded."""
