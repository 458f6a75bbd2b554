"""Exception types raised by the solver."""


class RadimexError(Exception):
    """Base class for all package errors."""


class PositivityError(RadimexError, ValueError):
    """A state violates positivity (density, internal energy, temperature)."""


class DomainError(RadimexError, ValueError):
    """A physics function was evaluated outside its domain."""


class NonConvergenceError(RadimexError, RuntimeError):
    """An iterative solve did not meet its tolerance."""

    def __init__(self, message, residual=float("nan"), iterations=0, stage=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.stage = stage

    def with_stage(self, stage):
        err = NonConvergenceError(
            f"stage {stage}: {self}", self.residual, self.iterations, stage
        )
        return err


class NegativeStateError(RadimexError, RuntimeError):
    """Floors were hit too often in a stage solve; usually dt is too large."""


class SingularSystemError(RadimexError, ArithmeticError):
    """A linear system could not be factored."""


class TableauValidationError(RadimexError, ValueError):
    """A Butcher tableau pair violates a structural or order condition."""


class UnknownSchemeError(RadimexError, KeyError):
    """The requested time integration scheme is not registered."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown scheme"


class ConfigError(RadimexError, ValueError):
    """Invalid run configuration."""


class PreconditionError(RadimexError, ValueError):
    """An operation was called with arguments violating its precondition."""


class SimulationError(RadimexError, RuntimeError):
    """A step failed during a run; carries the step index and time."""

    def __init__(self, message, step, time, cause=None):
        super().__init__(message)
        self.step = step
        self.time = time
        self.cause = cause


class AuditFailure(RadimexError):
    """A conservation audit did not pass."""
