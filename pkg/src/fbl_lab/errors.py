"""Exception hierarchy shared by the library and the command line."""


class FblLabError(Exception):
    """Base class for all errors raised by fbl_lab."""


class ValidationError(FblLabError, ValueError):
    """Malformed input: bad dimensions, parameters out of range, bad JSON."""


class NumericalError(FblLabError, ArithmeticError):
    """A computation produced a non-finite value or failed to converge."""
