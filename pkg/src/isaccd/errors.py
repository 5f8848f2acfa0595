"""Exception types shared across the package."""


class DomainError(ValueError):
    """A numeric argument lies outside its mathematical domain."""


class RangeError(DomainError):
    """A distortion target lies outside the feasible interval.

    Carries the interval so callers can re-grid instead of guessing.
    """

    def __init__(self, message, d_min=None, d_max=None):
        super().__init__(message)
        self.d_min = d_min
        self.d_max = d_max


class InvalidDistribution(DomainError):
    """A probability table fails nonnegativity or normalization checks."""


class UsageError(ValueError):
    """The API was called with structurally invalid arguments."""


class PreconditionError(UsageError):
    """A documented precondition (e.g. channel degradedness) does not hold."""
