"""Exception types shared across the package."""


class EASError(Exception):
    """Base class for all errors raised by eas1d."""


class DomainError(EASError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(EASError, ValueError):
    """A documented precondition of an operation was not met."""


class NumericError(EASError, ArithmeticError):
    """A numerical procedure failed (non-convergence, NaN/Inf, ...).

    ``estimate`` carries the achieved error estimate when one is known.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class StateError(EASError):
    """The simulation state is not admissible (e.g. vacuum)."""


class BlowupSuspected(EASError):
    """The adaptive time step collapsed below its floor."""


class RangeError(EASError, ValueError):
    """A derived constant under- or overflowed; ``condition`` names the culprit."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConfigError(EASError, ValueError):
    """Invalid run configuration. ``line`` / ``key`` locate the problem."""

    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key
