"""Exception types raised across the package."""


class TflrError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(TflrError):
    """Base class for data-validation failures."""


class NegativeEntry(ValidationError):
    pass


class RowSumViolation(ValidationError):
    pass


class TooFewComponents(ValidationError):
    pass


class ZeroRowSum(ValidationError):
    pass


class DimensionMismatch(TflrError):
    pass


class NonFinite(TflrError):
    """A NaN or infinity appeared during iteration."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class NotPositiveDefinite(TflrError):
    """Cholesky factorization of the quadratic term failed."""


class Infeasible(TflrError):
    """The constraint set admits no feasible point."""


class IterationLimit(TflrError):
    pass


class InvalidAlpha(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class UnpairedRecords(TflrError):
    pass


class InsufficientSizes(TflrError):
    pass
