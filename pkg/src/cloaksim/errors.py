"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A parameter lies outside the range the model is defined for."""


class ResonanceError(ArithmeticError):
    """A denominator vanishes because the frequency sits on a Bessel zero."""


class SolverError(ArithmeticError):
    """A per-mode transmission system is numerically singular."""

    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


class ScopeError(NotImplementedError):
    """The requested limit problem is outside what the solvers cover."""
