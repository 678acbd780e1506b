class SatbanditError(Exception):
    """Base class for library errors."""


class InvalidArgumentError(SatbanditError, ValueError):
    pass


class InfeasibleObjectiveError(SatbanditError, ValueError):
    """Threshold cannot be met by any arm of the instance."""


class ConfigError(SatbanditError, ValueError):
    """Malformed or incomplete configuration."""
