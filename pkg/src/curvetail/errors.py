"""Exception types raised across the package."""


class CurvetailError(Exception):
    """Base class for all package errors."""


class DomainError(CurvetailError, ValueError):
    """An argument lies outside the domain of the function evaluated."""


class DegenerateDataError(CurvetailError, ValueError):
    """The normalising spacing x_j - x_k vanishes."""


class LevelRangeError(CurvetailError, ValueError):
    """An extrapolation ratio falls outside the stored increment levels."""


class TableFormatError(CurvetailError, ValueError):
    """An increment table file is malformed.

    ``line`` carries the 1-based line number when the problem is local to one
    line of the file.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericFailure(CurvetailError, RuntimeError):
    """A Monte Carlo run produced too many failed samples to be trusted."""


class CalibrationError(CurvetailError, RuntimeError):
    """Calibration did not reach its convergence band.

    The best result found is attached as ``result`` so callers can still
    persist or inspect it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DataFileError(CurvetailError, ValueError):
    """A data file is unreadable or does not hold enough finite values."""
