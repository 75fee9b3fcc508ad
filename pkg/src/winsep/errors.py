"""Exception hierarchy shared by all winsep modules.

Exit codes mirror the CLI contract: 2 = bad configuration, 3 = bad or
insufficient data, 4 = numerical degeneracy.
"""


class WinsepError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(WinsepError):
    """Invalid run configuration or synthetic-market specification."""

    exit_code = 2


class DataError(WinsepError):
    """Invalid, missing, or insufficient input data."""

    exit_code = 3


class InsufficientDataError(DataError):
    """The requested operation needs more rows/columns than available."""


class UnfillableDateError(DataError):
    """A date on which every surviving company is missing cannot be imputed."""


class EmptyPanelError(DataError):
    """Cleaning removed every company."""


class NumericalError(WinsepError):
    """Degenerate numerical situation (zero variance, rank deficiency)."""

    exit_code = 4


class DegenerateSeriesError(NumericalError):
    """A return series has zero variance, so correlation is undefined."""


class RankDeficiencyError(NumericalError):
    """Data cannot support the requested number of components."""
