"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point lies outside the domain an operation is defined on."""


class ConvergenceError(RuntimeError):
    """A series or quadrature failed to meet its tolerance within its caps.

    ``estimates`` holds the last values computed before giving up, finest
    last, so callers can report how far off the result was.
    """

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class PreconditionError(ValueError):
    """Arguments violate a documented precondition (not a domain issue)."""
