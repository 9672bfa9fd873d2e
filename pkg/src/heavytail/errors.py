"""Exception hierarchy shared by all modules."""


class HeavyTailError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(HeavyTailError, ValueError):
    """A parameter lies outside the range where a quantity is defined."""


class DomainError(HeavyTailError, ValueError):
    """A point lies outside the domain of a potential or measure."""


class PreconditionError(HeavyTailError):
    """A checker's hypothesis failed numerically.

    ``details`` carries whatever diagnostic the caller needs to act on
    (worst point, offending mean, ...).
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = dict(details or {})


class NumericError(HeavyTailError, ArithmeticError):
    """A numerical routine did not converge or hit a singular matrix.

    ``partial`` holds the best estimate reached before giving up, when one
    exists.
    """

    def __init__(self, message, partial=None, details=None):
        super().__init__(message)
        self.partial = partial
        self.details = dict(details or {})
