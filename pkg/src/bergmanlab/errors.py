"""Exception hierarchy shared by every module."""


class BergmanLabError(Exception):
    """Base class for all library errors."""


class ParameterError(BergmanLabError, ValueError):
    pass


class DomainError(BergmanLabError, ValueError):
    """A point lies outside the domain an operation requires."""


class SingularityError(BergmanLabError, ArithmeticError):
    pass


class DefinitenessError(BergmanLabError, ValueError):
    """Raised when a matrix expected to be positive-definite is not.

    ``pivot`` is the zero-based index of the first non-positive Cholesky pivot.
    """

    def __init__(self, message: str, pivot: int):
        super().__init__(message)
        self.pivot = pivot


class ConditioningError(BergmanLabError, ArithmeticError):
    def __init__(self, message: str, ratio: float):
        super().__init__(message)
        self.ratio = ratio


class GeometryError(BergmanLabError, ValueError):
    """A derivative stencil leaves the region where the kernel is valid."""


class SamplingError(BergmanLabError, RuntimeError):
    pass


class ZeroDivisorError(BergmanLabError, ZeroDivisionError):
    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class IndefiniteMetricError(BergmanLabError, ValueError):
    def __init__(self, message: str, eigenvalues):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class ScenarioError(BergmanLabError, ValueError):
    def __init__(self, message: str, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)
