"""Exception types shared across the package."""


class AgreelossError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(AgreelossError, ValueError):
    """An argument violates a documented precondition."""


class DimensionMismatchError(InvalidInputError):
    """Paired vectors do not have equal length."""


class CsvFormatError(InvalidInputError):
    """An input file cannot be parsed; the message names the offending row."""


class UndefinedValueError(AgreelossError, ValueError):
    """The requested quantity is mathematically undefined for this input."""


class SingularDesignError(UndefinedValueError):
    """A regression design is degenerate (e.g. constant predictor)."""


class NonDifferentiablePointError(UndefinedValueError):
    """A derivative was requested at a kink where it does not exist.

    The one-sided limits of the derivative are attached when they are
    known in closed form.
    """

    def __init__(self, message, left_limit=None, right_limit=None):
        super().__init__(message)
        self.left_limit = left_limit
        self.right_limit = right_limit


class ConvergenceError(AgreelossError, RuntimeError):
    """The minimizer exhausted its budget; carries the best iterate found."""

    def __init__(self, message, point=None, value=None):
        super().__init__(message)
        self.point = point
        self.value = value


class DegenerateFitWarning(UserWarning):
    """A closed-form fit hit a degenerate configuration (e.g. zero correlation)."""
