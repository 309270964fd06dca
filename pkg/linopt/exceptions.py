class LinoptError(Exception):
    """Base class for simulator errors."""


class CutoffOverflowError(LinoptError):
    """A state would need more photons than the space cutoff allows."""


class DimensionMismatchError(LinoptError):
    pass


class NonUnitaryError(LinoptError):
    pass


class InvalidStateError(LinoptError):
    """Hermiticity, positivity, trace or normalization check failed."""


class InvalidParameterError(LinoptError, ValueError):
    pass


class ConsistencyError(LinoptError):
    """Two independent computations of the same quantity disagree."""
