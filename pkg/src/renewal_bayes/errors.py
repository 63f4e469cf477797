"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a density or process."""


class ConfigError(ValueError):
    """A model or experiment specification is invalid."""


class NumericError(ArithmeticError):
    """A numerical routine (quadrature, root search) failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class DegenerateConditioningError(NumericError):
    """Conditioning on an event of (numerically) zero probability."""


class SurvivalUnderflowWarning(RuntimeWarning):
    """A survival probability fell below 1e-300 and its logarithm was saturated."""
