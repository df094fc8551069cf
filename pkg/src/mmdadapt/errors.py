"""Exception types mapped to harness exit codes."""


class MmdAdaptError(Exception):
    """Base class for package errors."""


class ConfigError(MmdAdaptError):
    """Invalid configuration: bad flag values, grids, presets. Exit code 2."""


class DataError(MmdAdaptError):
    """Invalid input data: parse failures, label range, non-finite values. Exit code 3."""


class NumericalError(MmdAdaptError):
    """Numerical failure: factorization breakdown, undefined bandwidth. Exit code 4."""
