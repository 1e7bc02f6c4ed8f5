"""Error classes shared across pivlink"""


class PivlinkError(Exception):
    """
    Base class for errors raised by pivlink
    """


class ConfigurationError(PivlinkError, ValueError):
    """
    Error class for invalid configurations and model set-ups
    """


class DataError(PivlinkError, ValueError):
    """
    Error class for invalid or unreadable input data
    """


class NumericalError(PivlinkError, ArithmeticError):
    """
    Error class for numerical failures, such as a categorical draw from
    all-zero weights
    """


class DegenerateParameterWarning(UserWarning):
    """
    Warning issued when an update falls back on a previous or degenerate value
    """
