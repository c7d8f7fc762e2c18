"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
DataError -> 3, NumericalError -> 4.
"""


class IndegError(Exception):
    """Base class for all package errors."""


class ConfigError(IndegError):
    """Invalid configuration or plan (bad budgets, rates, enum values...)."""


class DataError(IndegError):
    """Unreadable or malformed input data (edge lists, count CSVs...)."""


class NumericalError(IndegError):
    """Numerical failure: rank deficiency, non-convergence, domain violations."""
