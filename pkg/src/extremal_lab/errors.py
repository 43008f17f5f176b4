"""Exception types shared across the package."""


class ExtremalLabError(Exception):
    pass


class DomainError(ExtremalLabError, ValueError):
    """A point or parameter lies outside the region where an operation is defined."""


class ConvergenceError(ExtremalLabError, RuntimeError):
    """An iterative method stopped before meeting its tolerance.

    ``last`` carries the final iterate so callers can inspect or reuse it.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class TruncationError(ExtremalLabError, ArithmeticError):
    pass


class ResolutionError(ExtremalLabError, ValueError):
    """A discretization failed its mass check; increase quadrature orders."""


class DegenerateMeasureError(ExtremalLabError, ValueError):
    pass


class SymmetryError(ExtremalLabError, ValueError):
    pass


class ConditioningWarning(UserWarning):
    pass
