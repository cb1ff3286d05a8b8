"""Exception hierarchy shared by all modules."""


class BoxBallError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(BoxBallError):
    """Malformed data: bad ball string, inconsistent slot diagram, bad JSON."""


class PreconditionError(BoxBallError):
    """An operation was called on inputs outside its documented domain."""


class DivergenceError(PreconditionError):
    """Weight parameters whose partition function diverges (some q_k >= 1)."""


class InsufficientDataError(PreconditionError):
    """Not enough samples to run a statistical test."""
