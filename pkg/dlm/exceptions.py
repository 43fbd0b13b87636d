"""
Errors raised by the forecasting engine.

Everything derives from ForecastingError so management commands can turn any
of them into a CommandError. The numeric breakdowns derive from
NumericalDegeneracyError; callers that want to skip a bad day catch that.
"""


class ForecastingError(Exception):
    pass


class DomainError(ForecastingError, ValueError):
    """An argument is outside the domain of the function."""


class DefinitenessError(ForecastingError, ValueError):
    """A scale matrix is not symmetric positive-definite."""


class AlignmentError(ForecastingError, ValueError):
    """Series, regressors or ranges do not line up."""


class DimensionError(ForecastingError, ValueError):
    """Draws or matrices do not match the parent structure."""


class RangeError(ForecastingError, ValueError):
    """Not enough usable rows for the requested range."""


class DataError(ForecastingError, ValueError):
    def __init__(self, message, row=None, ticker=None):
        self.row = row
        self.ticker = ticker
        if row is not None or ticker is not None:
            message = f"{message} (row={row}, ticker={ticker})"
        super().__init__(message)


class SelectionError(ForecastingError):
    """No candidate produced a usable log-likelihood."""


class NumericalDegeneracyError(ForecastingError, ArithmeticError):
    pass


class SingularSystemError(NumericalDegeneracyError):
    """I - Gamma is numerically singular."""


class DegenerateSampleError(NumericalDegeneracyError):
    """A Monte Carlo sample is too degenerate to summarise."""


class NoRootError(NumericalDegeneracyError):
    """The degrees-of-freedom equation has no sign change on its bracket."""
