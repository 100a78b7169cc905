class QLoanError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(QLoanError, ValueError):
    pass


class DataError(QLoanError):
    """Raised when an input file or record cannot be ingested."""


class UsageError(QLoanError, ValueError):
    pass


class NumericalError(QLoanError, ArithmeticError):
    """Raised when training produces a non-finite cost."""

    def __init__(self, message, iteration=None, theta=None):
        super().__init__(message)
        self.iteration = iteration
        self.theta = theta
