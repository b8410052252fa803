"""Errors raised by the numeric modules.

Management commands map them onto exit codes: argument and precondition
problems exit with 1, numerical failures with 2.
"""


class DenoisingError(Exception):
    """Base class for every error raised by the denoising package."""


class InvalidInputError(DenoisingError, ValueError):
    """Input data is malformed (non-finite entries, wrong shape)."""


class InvalidArgumentError(DenoisingError, ValueError):
    """A parameter is out of range or two arguments do not agree."""


class PreconditionError(InvalidArgumentError):
    """A theorem's stated precondition does not hold for the given parameters."""

    def __init__(self, inequality, message=None):
        self.inequality = inequality
        super().__init__(message or f"precondition violated: {inequality}")


class DegenerateDesignError(InvalidArgumentError):
    """A regression covariate carries no variation."""


class NumericalFailureError(DenoisingError, ArithmeticError):
    """An iterative routine did not converge."""


class SeparationError(NumericalFailureError):
    """The logistic likelihood has no finite maximizer (complete separation)."""

    def __init__(self, message, column=None):
        self.column = column
        super().__init__(message)
