"""Exception hierarchy.

The CLI maps these onto exit codes: ``InputError`` subclasses exit with 2,
``NumericalError`` subclasses with 3 and ``BudgetExceeded`` with 4.
"""


class AdsVolError(Exception):
    """Base class for every error raised by the package."""


class InputError(AdsVolError, ValueError):
    """The caller passed arguments outside an operation's domain."""


class NumericalError(AdsVolError, ArithmeticError):
    """A computation could not be carried out reliably."""


class NotHyperbolic(NumericalError):
    pass


class SharedEndpoint(InputError):
    pass


class NonPositiveLength(InputError):
    pass


class NegativeLength(InputError):
    pass


class NonPositiveEps(InputError):
    pass


class GenusTooSmall(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class PreconditionViolated(InputError):
    pass


class UnsupportedGenus(InputError):
    pass


class DegenerateLength(NumericalError):
    """Lengths below the supported floor; collars become numerically unusable."""


class NumericalFailure(NumericalError):
    pass


class NotSimple(NumericalError):
    """A translate of the curve's axis crosses the axis itself."""


class BudgetExceeded(AdsVolError):
    """Enumeration would exceed the configured word budget."""
