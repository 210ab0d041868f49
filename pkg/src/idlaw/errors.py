"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """An argument's dimension does not match the object it is used with."""


class InvalidMeasureError(ValueError):
    """A jump measure violates an integrability or positivity requirement."""


class NotLogIntegrableError(ValueError):
    """The upstream law lacks the finite log-moment needed by this transform."""


class LawSpecError(ValueError):
    """A law description (dict or JSON file) is malformed."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the best available value and the achieved error estimate so
    callers can decide whether the partial result is still usable.
    """

    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
