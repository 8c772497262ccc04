"""Exception hierarchy.

Everything derives from :class:`RiskCapError`. Errors caused by bad user input
additionally derive from :class:`InputError` so the CLI can map them to exit
code 2 in one place.
"""


class RiskCapError(Exception):
    """Base class for all errors raised by riskcap."""


class InputError(RiskCapError, ValueError):
    """Invalid user-supplied data."""


class EmptySpaceError(InputError):
    pass


class NegativeProbabilityError(InputError):
    pass


class ProbabilitySumMismatchError(InputError):
    pass


class DuplicateLabelError(InputError):
    pass


class LengthMismatchError(InputError):
    pass


class NonFiniteValueError(InputError):
    pass


class NonPositivePriceError(InputError):
    pass


class NegativePayoffError(InputError):
    pass


class ZeroPayoffError(InputError):
    pass


class AlphaOutOfRangeError(InputError):
    pass


class UnboundPositionError(InputError):
    """A position or asset lives on a different scenario space."""


class PriceMismatchError(InputError):
    """Two eligible assets were compared although their prices differ."""


class DegenerateGridError(InputError):
    pass


class NotConicError(InputError):
    pass


class NonMonotonePredicateError(InputError):
    """A custom acceptance predicate violates monotonicity."""


class DegenerateAssetError(RiskCapError):
    """The asset pays nothing on every state of positive probability."""


class NotFiniteError(RiskCapError):
    """A diagnostic needs a finite capital requirement and did not get one."""


class TooManyStatesError(RiskCapError):
    pass


class FileParseError(InputError):
    def __init__(self, message: str, *, row: int | None = None, column: str | int | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class NameNotFoundError(InputError):
    pass


class InternalConsistencyError(RiskCapError):
    """Two independent computations of the same fact disagree."""
