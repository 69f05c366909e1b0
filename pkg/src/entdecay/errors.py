"""Exception types shared across the package.

The CLI maps :class:`DomainError` (and the other ``ValueError`` subclasses)
to exit status 3 and :class:`AccuracyError` to exit status 4.
"""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class InvalidStateError(ValueError):
    """Matrix or vector fails the invariants of a quantum state."""


class ConsistencyError(RuntimeError):
    """A numerical result violated an invariant it must satisfy."""


class RefinementError(RuntimeError):
    """A root could not be bracketed on the coarse scan grid."""


class ResolutionError(RuntimeError):
    """Time grid too coarse to separate neighbouring crossings."""


class FitError(ValueError):
    """Curve fit is degenerate (e.g. no continuous mass)."""


class AccuracyError(ArithmeticError):
    """Numerical procedure failed to reach the requested tolerance.

    Attributes
    ----------
    estimate : float
        Best estimate available when the procedure gave up.
    error : float
        Estimated absolute error of ``estimate``.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
