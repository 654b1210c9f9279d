"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericError -> 4.
"""


class FoldrepError(Exception):
    """Base class for package errors."""


class ConfigError(FoldrepError, ValueError):
    """Invalid configuration: bad option values, missing files, bad schema."""


class DataError(FoldrepError, ValueError):
    """Invalid input data: parse failures, violated invariants, bad labels."""


class NumericError(FoldrepError, RuntimeError):
    """Numeric failure: degenerate matrices, non-convergence."""
