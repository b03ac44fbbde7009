"""Exception hierarchy shared by every module."""


class FracLapError(Exception):
    """Base class for all package errors."""


class DomainError(FracLapError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(DomainError):
    """Gamma evaluated at a non-positive integer."""


class QuadratureError(FracLapError, ArithmeticError):
    """Adaptive quadrature could not meet its tolerance within the budget.

    The best available estimate is kept on the exception so callers can report
    it instead of discarding the work.
    """

    def __init__(self, message, value=None, err_estimate=None, evaluations=None):
        super().__init__(message)
        self.value = value
        self.err_estimate = err_estimate
        self.evaluations = evaluations


class BudgetExceededError(FracLapError, RuntimeError):
    """A path simulation ran out of steps before absorption."""


class ConfigError(FracLapError, ValueError):
    """An experiment configuration failed validation."""
