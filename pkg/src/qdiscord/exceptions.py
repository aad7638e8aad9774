"""Exception types raised across the package."""


class QDiscordError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(QDiscordError, ValueError):
    pass


class NotAStateError(QDiscordError, ValueError):
    """A matrix failed one of the density-matrix checks.

    ``min_eigenvalue`` is set when the failure is a positivity violation.
    """

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class NumericalInconsistencyError(QDiscordError, ArithmeticError):
    pass


class InvalidParameterError(QDiscordError, ValueError):
    pass


class UnsupportedMapError(QDiscordError, ValueError):
    """The superoperator is defective (not diagonalizable) to working precision."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class NoDecoherenceError(QDiscordError, ValueError):
    """Raised when a channel's whole spectrum sits on the unit circle."""


class NonUniqueSteadyStateError(QDiscordError, ValueError):
    def __init__(self, message, multiplicity):
        super().__init__(message)
        self.multiplicity = multiplicity
