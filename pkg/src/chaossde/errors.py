"""Exception types raised by the library."""


class ChaosError(Exception):
    """Base class for all library errors."""


class InvalidSparseIndex(ChaosError):
    """Sparse index violates the required monotonicity or shape."""


class CoordinateNotPositive(ChaosError):
    """Tried to decrement a multi-index coordinate that is zero."""


class EmptyIndex(ChaosError):
    """Operation requires a multi-index of order at least one."""


class OutOfDomain(ChaosError):
    """Time argument outside the basis horizon [0, T]."""


class OrderTooLarge(ChaosError):
    """Hermite order beyond the supported cap."""


class DimensionMismatch(ChaosError):
    """Gaussian vector shorter than the multi-index support."""


class NotGbm(ChaosError):
    """Closed form requires the geometric Brownian motion preset."""


class NotBm(ChaosError):
    """Closed form requires the Brownian-motion-with-drift preset."""


class TimeNotOnGrid(ChaosError):
    """Requested time is not a point of the solution grid."""


class NonPositiveValue(ChaosError):
    """Log-log fit requires strictly positive values."""


class IntegratorFailure(ChaosError):
    """Adaptive integration failed; ``time`` holds the offending time."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (t={time!r})")
        self.time = time


class StepSizeUnderflow(IntegratorFailure):
    """Step size shrank below the representable resolution."""


class MaxStepsExceeded(IntegratorFailure):
    """Step budget exhausted before reaching the end of the interval."""
