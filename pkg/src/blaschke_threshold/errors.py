"""Exception types raised by the package."""


class DomainError(ValueError):
    """An argument lies outside the region where a formula is defined."""


class ChartMismatchError(ValueError):
    """Two points living in different coordinate charts were combined."""


class ConstructionError(RuntimeError):
    """The inductive zero-set construction could not satisfy its conditions."""

    def __init__(self, message, violated=None):
        super().__init__(message)
        self.violated = violated


class IllConditionedGram(ArithmeticError):
    """Pivoted factorization of a Gram matrix broke down."""

    def __init__(self, message, gram_condition=float("inf"), feasible_n=None):
        super().__init__(message)
        self.gram_condition = gram_condition
        self.feasible_n = feasible_n


class BudgetError(RuntimeError):
    """An exhaustive search would exceed its enumeration budget."""


class CacheError(ValueError):
    """A zero-set cache file is corrupt or was written by another format version."""
