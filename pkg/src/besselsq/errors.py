"""Exception types raised across the package."""


class BesselSqError(Exception):
    """Base class for all package errors."""


class PoleError(BesselSqError, ValueError):
    """Gamma evaluated at a non-positive integer."""


class DomainError(BesselSqError, ValueError):
    """Argument outside the domain of a special function."""


class UnsupportedRangeError(BesselSqError, OverflowError):
    """Argument outside the strip where an approximation is supported."""


class GridMismatchError(BesselSqError, ValueError):
    """Samples do not live on the expected grid."""


class InvalidBoundsError(BesselSqError, ValueError):
    pass


class UnknownFamilyError(BesselSqError, KeyError):
    pass


class TailTooLargeError(BesselSqError, ArithmeticError):
    """Truncated improper integral with a tail estimate above tolerance."""


class ConfigError(BesselSqError, ValueError):
    """Invalid suite configuration."""


class DimensionMismatchError(BesselSqError, ValueError):
    pass


class InvalidAtomError(BesselSqError, ValueError):
    pass
