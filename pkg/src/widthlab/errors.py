"""Exception hierarchy shared by every widthlab module."""


class WidthLabError(ValueError):
    """Base class for all widthlab errors."""


class ZeroVectorError(WidthLabError):
    pass


class TooFewPointsError(WidthLabError):
    pass


class InvalidDimensionError(WidthLabError):
    pass


class InfiniteExponentError(WidthLabError):
    """Raised where a formula needs a finite exponent (use the cube law for p = inf)."""


class InconsistentBoundsError(WidthLabError):
    """Assembled lower bound exceeds assembled upper bound.

    This never happens for correctly transcribed thresholds; seeing it means a bug.
    """


class IndexOutOfRangeError(WidthLabError):
    pass


class SingularSystemError(WidthLabError):
    pass


class HypothesisViolatedError(WidthLabError):
    pass


class RegimeViolationError(WidthLabError):
    pass


class EmptyFiberError(WidthLabError):
    pass


class OrderOverflowError(WidthLabError):
    pass


class InvalidPrimeError(WidthLabError):
    pass


class NotNormalizedError(WidthLabError):
    pass


class BoundViolationError(WidthLabError):
    """A certified-feasible configuration beat a proven diameter lower bound."""


class InfeasibleError(WidthLabError):
    pass


class OutsideBallError(WidthLabError):
    pass
