"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: validation errors exit 1, numeric
failures exit 2 and capacity/budget errors exit 3.
"""


class RmtWalksError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RmtWalksError, ValueError):
    """A configuration or argument violates a documented precondition.

    ``field`` names the offending parameter when there is one.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NumericError(RmtWalksError, ArithmeticError):
    """A numerical routine failed to converge or lost too much precision."""


class SeriesError(NumericError):
    """Power-series evaluation did not converge within the term budget."""

    def __init__(self, message, partial_sum=None, last_term=None, terms=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.last_term = last_term
        self.terms = terms


class CapacityError(RmtWalksError):
    """A request exceeds a configured memory or enumeration budget."""


class ContractError(RmtWalksError, ValueError):
    """An input does not satisfy the structural contract of an operation."""


class NoClosedFormError(RmtWalksError, ValueError):
    """No closed-form limit is available for the requested link kind."""
