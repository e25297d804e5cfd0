"""Exception types shared across the package."""


class PathrecError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(PathrecError):
    """Invalid configuration value, unknown key, or inconsistent options."""


class DataError(PathrecError):
    """Malformed or contradictory input data (bad TSV line, empty graph, ...)."""


class CheckpointMismatchError(PathrecError):
    """A checkpoint's embedded config disagrees with the requested one."""


class DivergenceError(PathrecError):
    """Training produced a non-finite loss or gradient."""
