"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An input violates a domain constraint.

    ``field`` names the offending parameter so front ends can report it.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class OutOfRangeError(ValueError):
    """An argument lies outside a function's documented accuracy window."""


class ConvergenceError(RuntimeError):
    """Adaptive integration hit its subdivision limit.

    The best available estimate and its error bound travel with the exception.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class StatisticsError(RuntimeError):
    """A Monte Carlo run kept too few samples to form an estimate."""


class BandLimitWarning(UserWarning):
    """A band-limited spread depends on the chosen detector band."""
