"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class DivergentIntegralError(DomainError):
    """A requested integral or moment does not converge."""

    def __init__(self, message: str, name: str | None = None):
        super().__init__(message)
        self.name = name


class AccuracyError(ArithmeticError):
    """Adaptive quadrature stopped before reaching the requested tolerance.

    The best available estimate and its error bound are kept on the
    exception.
    """

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class GuardViolation(DomainError):
    """The parameters violate the validity range of an asymptotic expansion."""

    def __init__(self, expansion: str, bound: str, n: int, p: float):
        super().__init__(f"{expansion} expansion requires {bound} (got n={n}, p={p})")
        self.expansion = expansion
        self.bound = bound
        self.n = n
        self.p = p
