"""Gamma and Beta functions, the integral family ``I_p^q`` and dimensional constants."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DivergentIntegralError, DomainError

__all__ = [
    "DimParams",
    "gamma",
    "loggamma",
    "beta",
    "ipq",
    "ipq_ratio",
    "sphere_area",
    "sobolev_exponent",
]

# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def sobolev_exponent(n: int, p: float) -> float:
    """Critical Sobolev exponent ``n p / (n - p)``; infinite for ``p >= n``."""
    if p >= n:
        return math.inf
    return n * p / (n - p)


@dataclass(frozen=True)
class DimParams:
    """Spatial dimension ``n`` and exponent ``p`` with ``1 < p < n``."""

    n: int
    p: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n!r}")
        if not (1.0 < self.p < self.n):
            raise DomainError(f"exponent must satisfy 1 < p < n, got p={self.p}, n={self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", float(self.p))

    @property
    def p_star(self) -> float:
        return sobolev_exponent(self.n, self.p)


def _lanczos_sum(z: float) -> float:
    # z is the shifted argument (x - 1)
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    return acc


def gamma(x: float) -> float:
    """Gamma function for real ``x > 0``.

    Lanczos approximation on ``x >= 1/2``, reflection formula below. The
    relative error is of order 1e-15 for moderate arguments.
    """
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"gamma requires a finite positive argument, got {x!r}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    if x == round(x) and x <= 23:
        return float(math.factorial(int(x) - 1))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    # split the power to delay overflow
    half = t ** (0.5 * (z + 0.5))
    return _SQRT_2PI * half * (half * math.exp(-t)) * _lanczos_sum(z)


def loggamma(x: float) -> float:
    """Natural log of ``gamma(x)`` for ``x > 0``."""
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"loggamma requires a finite positive argument, got {x!r}")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - loggamma(1.0 - x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


def beta(x: float, y: float) -> float:
    """Beta function ``B(x, y) = Γ(x)Γ(y)/Γ(x+y)`` for positive arguments."""
    if not (x > 0.0 and y > 0.0):
        raise DomainError(f"beta requires positive arguments, got ({x!r}, {y!r})")
    if x + y < 140.0:
        return gamma(x) * gamma(y) / gamma(x + y)
    return math.exp(loggamma(x) + loggamma(y) - loggamma(x + y))


def ipq(p: float, q: float) -> float:
    """``I_p^q = ∫_0^∞ t^(q-1) (1+t)^(-p) dt = B(q, p - q)``.

    Raises
    ------
    DivergentIntegralError
        Unless ``0 < q < p``.
    """
    if not (0.0 < q < p):
        raise DivergentIntegralError(
            f"I_p^q diverges unless 0 < q < p (got p={p}, q={q})", name="ipq"
        )
    return beta(q, p - q)


def ipq_ratio(p: float, q: float) -> float:
    """Ratio ``I_p^(q+1) / I_p^q = q / (p - q - 1)`` from ``Γ(z+1) = zΓ(z)``."""
    if not (0.0 < q and q + 1.0 < p):
        raise DivergentIntegralError(
            f"ratio needs 0 < q and q + 1 < p (got p={p}, q={q})", name="ipq"
        )
    return q / (p - q - 1.0)


def sphere_area(n: int) -> float:
    """Surface measure ``2 π^(n/2) / Γ(n/2)`` of the unit sphere in ``R^n``."""
    if int(n) != n or n < 1:
        raise DomainError(f"sphere_area needs an integer n >= 1, got {n!r}")
    return 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)
