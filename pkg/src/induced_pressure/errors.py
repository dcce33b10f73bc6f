"""Exception hierarchy shared by every module."""


class InducedPressureError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(InducedPressureError, ValueError):
    """An object violates one of its construction invariants."""


class CapExceededError(InducedPressureError):
    """An enumeration would visit more words than the configured cap.

    ``count`` is the would-be number of words when it is known exactly,
    otherwise a lower bound (``exact`` is False).
    """

    def __init__(self, count, cap, exact=True):
        self.count = count
        self.cap = cap
        self.exact = exact
        qual = "" if exact else "at least "
        super().__init__(
            f"enumeration cap exceeded: {qual}{count} words > cap {cap}"
        )


class NotIrreducibleError(InducedPressureError):
    """The transition matrix is reducible; irreducibility required."""


class NotMixingError(InducedPressureError):
    """The shift is not topologically mixing."""


class ConvergenceError(InducedPressureError):
    """An iterative solver did not reach its tolerance."""
