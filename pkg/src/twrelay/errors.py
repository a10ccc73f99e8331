"""Exception types raised by the relay balancing library."""


class RelayError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(RelayError, ValueError):
    """A configuration value is outside its admissible range."""


class StructuralError(RelayError, ValueError):
    """Array shapes are inconsistent with each other or with the config."""


class NotPSDError(RelayError, ValueError):
    """A matrix expected to be positive semidefinite is not."""


class IllConditionedError(RelayError, ArithmeticError):
    """A matrix is too close to singular to be inverted reliably."""


class NumericalError(RelayError, ArithmeticError):
    """A factorization or eigensolver failed."""
