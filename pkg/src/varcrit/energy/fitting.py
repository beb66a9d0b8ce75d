"""Coefficient extraction for ``ε² ln ε`` and ``ε^p`` corrections."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..errors import DomainError

__all__ = [
    "default_eps_sequence",
    "validate_eps_sequence",
    "log_regressor",
    "two_point_estimates",
    "single_regressor_slope",
]


def default_eps_sequence(k_min: int = 4, k_max: int = 9) -> list[float]:
    return [2.0 ** (-k) for k in range(k_min, k_max + 1)]


def validate_eps_sequence(eps: Sequence[float]) -> list[float]:
    """Return ``eps`` as floats; it must be strictly decreasing in (0, 1)."""
    out = [float(e) for e in eps]
    if len(out) < 2:
        raise DomainError("need at least two scales")
    if not all(0.0 < e < 1.0 for e in out):
        raise DomainError("scales must lie in (0, 1)")
    if any(b >= a for a, b in zip(out, out[1:])):
        raise DomainError("scales must be strictly decreasing")
    return out


def log_regressor(eps):
    eps = np.asarray(eps, dtype=float)
    return eps * eps * np.log(eps)


def two_point_estimates(eps: Sequence[float], deviation: Sequence[float]) -> list[float]:
    """``ε² ln ε`` coefficient from each consecutive pair of scales.

    Each pair is solved exactly for ``dev = a ε² ln ε + b ε²``. Carrying the
    ``ε²`` term removes the ``O(1/|ln ε|)`` bias a one-term fit would have.
    Entry ``i`` belongs to the pair ``(eps[i], eps[i+1])``.
    """
    e = np.asarray(eps, dtype=float)
    d = np.asarray(deviation, dtype=float)
    out = []
    for i in range(len(e) - 1):
        m = np.array([[e[j] ** 2 * math.log(e[j]), e[j] ** 2] for j in (i, i + 1)])
        out.append(float(np.linalg.solve(m, d[i : i + 2])[0]))
    return out


def single_regressor_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope through the origin, ``Σxy / Σx²``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.dot(x, y) / np.dot(x, x))
