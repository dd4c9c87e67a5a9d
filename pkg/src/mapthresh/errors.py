"""Exception types shared across the package.

All inherit from ValueError so callers that only know the stdlib still catch
them; the CLI uses the distinction to pick exit codes (bad inputs exit 2,
numeric failures exit 1).
"""


class MapThreshError(ValueError):
    """Base class for errors raised by this package."""


class DomainError(MapThreshError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigurationError(MapThreshError):
    """A spec, config file, or parameter combination is invalid."""


class SizeError(MapThreshError):
    """An input is too large or too small for the requested operation."""


class DegenerateDataError(MapThreshError):
    """The data carry no usable information (e.g. constant input)."""


class UnsupportedBallError(MapThreshError):
    """The requested parameter-ball kind is not supported here."""


class NumericError(MapThreshError):
    """A computation failed numerically (overflow, non-convergence treated as fatal)."""
