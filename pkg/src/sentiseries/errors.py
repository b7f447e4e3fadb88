"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericalError -> 4. Library code raises the most specific class that
applies; plain ValueError/TypeError are reserved for programming errors.
"""


class SentiseriesError(Exception):
    """Base class for all package errors."""


class ConfigError(SentiseriesError):
    """Invalid configuration: bad option values, missing files, bad schema."""


class DataError(SentiseriesError):
    """Invalid input data: malformed corpus rows, lexicons, tables."""


class NumericalError(SentiseriesError):
    """Numerical failure: non-convergence, degenerate designs."""
