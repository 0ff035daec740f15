"""Exceptions raised by the integration stack."""


class NonConvergence(ArithmeticError):
    """Leja interpolation did not reach the requested tolerance within max_iter."""

    def __init__(self, message, iterations=0):
        super().__init__(message)
        self.iterations = iterations


class BreakdownError(ArithmeticError):
    """Power iteration collapsed to the zero vector (operator is numerically zero)."""


class HistoryError(RuntimeError):
    """The cost-based controller was called before two accepted steps existed."""


class StagnationError(RuntimeError):
    """Step size fell below the stagnation floor."""


class RejectionLimit(RuntimeError):
    """A single step was rejected too many times in a row."""
