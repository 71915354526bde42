"""Exception hierarchy for the ballbins package."""


class BallBinsError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BallBinsError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class NegativeWeightError(DomainError):
    """A raw weight vector contains a negative entry."""


class ZeroMassError(DomainError):
    """A raw weight vector sums to zero."""


class NonFiniteError(DomainError):
    """A raw weight vector contains NaN or infinity."""


class EmptySubsetError(DomainError):
    """A bin-subset argument is empty."""


class TooLargeError(BallBinsError):
    """An exact computation was requested beyond the oracle's size limits."""


class BracketError(BallBinsError):
    """A root bracket could not be established or maintained during bisection."""


class ConvergenceError(BallBinsError):
    """An adaptive computation could not certify the requested tolerance."""


class DistSpecError(BallBinsError):
    """A textual distribution spec could not be parsed."""
