"""Exception hierarchy shared by every module.

The CLI maps these to exit codes: DomainError -> 2, RegimeError -> 3.
RegimeError subclasses DomainError, so catch it first.
"""


class LrduError(Exception):
    pass


class DomainError(LrduError, ValueError):
    """An argument lies outside the admissible parameter range."""


class RegimeError(DomainError):
    """A quantity was requested outside the asymptotic regime that defines it."""


class NumericError(LrduError, ArithmeticError):
    pass


class EmbeddingError(NumericError):
    def __init__(self, min_eigenvalue, n):
        self.min_eigenvalue = float(min_eigenvalue)
        self.n = n
        super().__init__(
            f"circulant embedding of size-{n} Toeplitz matrix is not "
            f"nonnegative definite (min eigenvalue {self.min_eigenvalue:.3e})"
        )


class TruncationError(NumericError):
    def __init__(self, message, bound):
        self.bound = float(bound)
        super().__init__(f"{message} (tail bound {self.bound:.3e})")


class QuadratureError(NumericError):
    pass


class RankUndetectedError(NumericError):
    pass
