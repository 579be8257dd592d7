class ManyMatchError(Exception):
    """Base class for errors raised by this package."""


class InfeasibleError(ManyMatchError):
    """The instance has a point with no foreign neighbor, so no cover exists."""

    def __init__(self, message, color=None, points=None):
        super().__init__(message)
        self.color = color
        self.points = list(points) if points is not None else []


class InvalidInputError(ManyMatchError, ValueError):
    """Malformed instance, configuration or file contents."""


class InfeasibleProgramError(ManyMatchError):
    """An integer program has no feasible assignment."""


class ContractError(ManyMatchError):
    """An internal precondition was violated (signals a bug upstream)."""
