"""Exception hierarchy shared by every harqpred module."""


class HarqError(Exception):
    """Base class for all errors raised by harqpred."""


class DomainError(HarqError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(HarqError, ValueError):
    """A scenario, curve or call is configured inconsistently."""


class ConstraintError(HarqError, ValueError):
    """A transmission schedule violates the latency budget."""


class ValidationError(HarqError, ValueError):
    """Input data failed validation; ``location`` names the offending row or key."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class InfeasibleError(HarqError):
    """No operating point or schedule reaches the BLER target.

    ``min_bler`` carries the smallest total BLER that is achievable at all.
    """

    def __init__(self, message, min_bler):
        self.min_bler = float(min_bler)
        super().__init__(f"{message} (minimum achievable BLER {self.min_bler:.6g})")
