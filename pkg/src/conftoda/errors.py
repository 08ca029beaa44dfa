"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain where an operation is defined."""


class ConvergenceError(RuntimeError):
    """An iterative method failed to reach its tolerance.

    ``defect`` carries the last measured residual.
    """

    def __init__(self, message, defect=None, iterations=None):
        super().__init__(message)
        self.defect = defect
        self.iterations = iterations


class LocusError(ValueError):
    """The pair does not lie on the requested subspace (e.g. f(S^1) != g(S^1))."""
