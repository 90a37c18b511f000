"""Exception types raised across the package."""


class ViError(Exception):
    """Base class for all package errors."""


class DimensionError(ViError, ValueError):
    pass


class NotInSetError(ViError, ValueError):
    """A point expected to lie in the feasible set does not."""


class DivergenceError(ViError, RuntimeError):
    """Dykstra's iteration failed to settle; the intersection is likely empty."""


class MaxBacktracksError(ViError, RuntimeError):
    """A linesearch exhausted its backtracking budget.

    ``stationary`` is set when the trial point coincided with the base point,
    i.e. the base point is numerically a solution. ``point`` carries the last
    trial point for diagnostics.
    """

    def __init__(self, message, point=None, alpha=None, stationary=False):
        super().__init__(message)
        self.point = point
        self.alpha = alpha
        self.stationary = stationary


class StalledError(ViError, RuntimeError):
    """An iteration step could not be carried out (numerically at a solution)."""


class ConfigError(ViError, ValueError):
    pass


class ParseError(ViError, ValueError):
    """A run-spec file could not be read; the message names the line or field."""


class ValidationError(ConfigError):
    """A run spec parsed but breaks an invariant."""
