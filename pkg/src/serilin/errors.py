"""Exception types shared across the solver kit."""


class SerilinError(Exception):
    """Base class for all serilin errors."""


class GridMismatchError(SerilinError):
    """Fields that must share a grid do not."""


class DomainError(SerilinError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularEvaluationError(SerilinError):
    """A closed-form evaluation hit a (near-)vanishing denominator."""


class SingularForcingError(SerilinError):
    """Forcing assembly met a degenerate gradient node it cannot regularize.

    Carries the offending node coordinates in ``nodes``.
    """

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class SolverError(SerilinError):
    """A time integration or linear solve failed.

    ``order`` and ``step`` locate the failure inside a hierarchy run when
    known.
    """

    def __init__(self, message, order=None, step=None):
        super().__init__(message)
        self.order = order
        self.step = step


class ConfigError(SerilinError):
    """A run configuration failed schema validation."""
