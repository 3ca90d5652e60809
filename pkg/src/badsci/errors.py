"""Exception types shared across the package."""


class BadSciError(Exception):
    pass


class MatrixFormatError(BadSciError, ValueError):
    """Malformed matrix input: bad dimensions, non-numeric or empty data."""


class DimensionCapExceeded(BadSciError, ValueError):
    """Hypercube enumeration would exceed the configured dimension cap."""


class BudgetExceeded(BadSciError):
    """Search space is larger than the configured budget."""


class CheckpointError(BadSciError):
    """Checkpoint is unreadable or belongs to a different search."""
