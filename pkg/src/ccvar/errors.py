"""Exception types raised across the package."""


class CCVarError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(CCVarError, ValueError):
    """Raised for inconsistent (d, n) or index data."""


class ResourceLimitError(CCVarError, ValueError):
    """Raised when a request exceeds the desk-scale caps."""


class LevelMismatchError(CCVarError, ValueError):
    pass


class ChartError(CCVarError, ValueError):
    """The point lies on the hyperplane at infinity (reference coordinate is zero)."""


class RankDeficientError(CCVarError, ValueError):
    pass


class NotSymmetricError(CCVarError, ValueError):
    pass


class ParseError(CCVarError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IntegralSymmetryError(CCVarError, ValueError):
    """Two integral entries related by symmetry were given different values."""
