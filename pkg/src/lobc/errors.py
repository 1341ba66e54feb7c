"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class InfeasibleError(ValueError):
    """No lower-triangular stochastic transfer exists for the given patterns."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap; carries the best iterate."""

    def __init__(self, message: str, best=None, gap: float | None = None):
        super().__init__(message)
        self.best = best
        self.gap = gap


class SolverError(RuntimeError):
    """A backend solver failed for numerical reasons."""
