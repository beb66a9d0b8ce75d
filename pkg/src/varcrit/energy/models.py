"""Local quadratic exponent models and the energy problem they define."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import DomainError, GuardViolation
from ..instanton import BubbleParams, bubble_breakpoints
from ..special_fn import DimParams, sobolev_exponent

__all__ = [
    "ExponentModel",
    "EnergyProblem",
    "GUARDS",
    "check_guard",
    "guard_flags",
]


@dataclass(frozen=True, eq=False)
class ExponentModel:
    """Exponent near a critical point: ``value + ½ (H x, x)``, clamped to
    ``[lower, upper]`` away from the point.

    The gradient at the point must vanish. Radial evaluation uses the
    isotropic model ``value + ½ (tr H / n) r²``, which has the same
    second-moment integrals against any radial weight.
    """

    value: float
    hessian: np.ndarray
    lower: float | None = None
    upper: float | None = None
    gradient: tuple[float, ...] | None = None

    def __post_init__(self):
        h = np.array(self.hessian, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise DomainError(f"Hessian must be a square matrix, got shape {h.shape}")
        if not np.allclose(h, h.T, rtol=0, atol=1e-12 * max(1.0, np.abs(h).max())):
            raise DomainError("Hessian must be symmetric")
        h.setflags(write=False)
        object.__setattr__(self, "hessian", h)
        if self.gradient is not None and np.any(np.asarray(self.gradient, dtype=float) != 0):
            raise DomainError("the exponent must have a critical point (zero gradient) at the origin")
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise DomainError("empty clamp interval")

    @classmethod
    def isotropic(cls, n: int, value: float, laplacian: float = 0.0, **kw) -> "ExponentModel":
        """Model with Hessian ``(laplacian / n) I``."""
        return cls(value, np.eye(n) * (laplacian / n), **kw)

    @classmethod
    def flat(cls, n: int, value: float, **kw) -> "ExponentModel":
        return cls(value, np.zeros((n, n)), **kw)

    @property
    def n(self) -> int:
        return self.hessian.shape[0]

    @property
    def laplacian(self) -> float:
        return float(np.trace(self.hessian))

    @property
    def radial_curvature(self) -> float:
        return self.laplacian / self.n

    @property
    def is_flat(self) -> bool:
        return not np.any(self.hessian)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        raw = self.value + 0.5 * self.radial_curvature * r * r
        lo = -np.inf if self.lower is None else self.lower
        hi = np.inf if self.upper is None else self.upper
        return np.clip(raw, lo, hi)

    def at_points(self, x):
        """Anisotropic model at points ``x`` of shape ``(..., n)``."""
        x = np.asarray(x, dtype=float)
        raw = self.value + 0.5 * np.einsum("...i,ij,...j->...", x, self.hessian, x)
        lo = -np.inf if self.lower is None else self.lower
        hi = np.inf if self.upper is None else self.upper
        return np.clip(raw, lo, hi)

    def kink_radii(self) -> list[float]:
        """Radii where the radial model meets a clamp."""
        c = self.radial_curvature
        out = []
        for bound in (self.lower, self.upper):
            if bound is None or c == 0:
                continue
            r2 = 2.0 * (bound - self.value) / c
            if r2 > 0:
                out.append(math.sqrt(r2))
        return out

    def with_clamp(self, lower: float | None, upper: float | None) -> "ExponentModel":
        return dataclasses.replace(self, lower=lower, upper=upper)


GUARDS = {
    "lq": ("p <= n/2", lambda n, p: p <= n / 2.0),
    "grad": ("p < min(sqrt(n), (n+2)/3)", lambda n, p: p < min(math.sqrt(n), (n + 2.0) / 3.0)),
    "lp": ("p < sqrt(n)", lambda n, p: p * p < n),
}


def check_guard(kind: str, dims: DimParams, override: bool = False) -> bool:
    """Return whether the validity range of expansion ``kind`` holds.

    Raises
    ------
    GuardViolation
        When the range fails and ``override`` is false.
    """
    bound, ok = GUARDS[kind]
    holds = bool(ok(dims.n, dims.p))
    if not holds and not override:
        raise GuardViolation(kind, bound, dims.n, dims.p)
    return holds


def guard_flags(dims: DimParams) -> dict[str, bool]:
    return {kind: bool(ok(dims.n, dims.p)) for kind, (_, ok) in GUARDS.items()}


@dataclass(frozen=True, eq=False)
class EnergyProblem:
    """Data of the critical problem near a concentration point at the origin.

    ``p_model`` and ``q_model`` describe the exponents, with
    ``q(0) = p(0)*``. ``h0`` is the zero-order coefficient at the point and
    ``h`` an optional radial extension of it. ``f_weight`` is the radial
    weight used in the expansions (default 1). ``delta`` is the cutoff
    radius of the test functions; ``None`` removes the cutoff.

    Unclamped models receive default clamps that keep
    ``sup p < inf q`` and ``q <= p*``: with ``gap = q(0) - p(0)`` the exponent
    ``p`` stays within ``gap/3`` of ``p(0)`` (and inside ``(1, n)``), and ``q``
    within ``gap/3`` of ``q(0)``.
    """

    dims: DimParams
    p_model: ExponentModel
    q_model: ExponentModel
    h0: float = 0.0
    h: Callable | None = None
    f_weight: Callable | None = None
    delta: float | None = 1.0

    def __post_init__(self):
        n, p, ps = self.dims.n, self.dims.p, self.dims.p_star
        for name, model in (("p", self.p_model), ("q", self.q_model)):
            if model.n != n:
                raise DomainError(f"{name}-model Hessian is {model.n}x{model.n}, expected {n}x{n}")
        if not math.isclose(self.p_model.value, p, rel_tol=1e-12, abs_tol=0):
            raise DomainError(f"p-model value {self.p_model.value} differs from p={p}")
        if not math.isclose(self.q_model.value, ps, rel_tol=1e-12, abs_tol=0):
            raise DomainError(f"q(0)={self.q_model.value} must equal p*={ps} at the concentration point")
        gap = ps - p
        if self.p_model.lower is None and self.p_model.upper is None:
            lo = max(1.0 + 1e-6, p - gap / 3.0)
            hi = min(n - 1e-6, p + gap / 3.0)
            object.__setattr__(self, "p_model", self.p_model.with_clamp(lo, hi))
        if self.q_model.lower is None and self.q_model.upper is None:
            object.__setattr__(self, "q_model", self.q_model.with_clamp(ps - gap / 3.0, ps + gap / 3.0))
        if self.delta is not None and not self.delta > 0:
            raise DomainError("cutoff radius must be positive")

    @classmethod
    def from_laplacians(
        cls,
        n: int,
        p: float,
        dp_laplacian: float = 0.0,
        dq_laplacian: float = 0.0,
        h0: float = 0.0,
        delta: float | None = 1.0,
        f_weight: Callable | None = None,
    ) -> "EnergyProblem":
        """Problem with isotropic exponent models of the given Laplacians."""
        dims = DimParams(n, p)
        return cls(
            dims,
            ExponentModel.isotropic(n, dims.p, dp_laplacian),
            ExponentModel.isotropic(n, dims.p_star, dq_laplacian),
            h0=h0,
            delta=delta,
            f_weight=f_weight,
        )

    @property
    def f0(self) -> float:
        if self.f_weight is None:
            return 1.0
        return float(self.f_weight(np.zeros(1))[0])

    def p_at(self, r):
        return self.p_model(r)

    def q_at(self, r):
        n = self.dims.n
        p = self.p_at(r)
        pstar = np.where(p < n, n * p / np.maximum(n - p, 1e-300), np.inf)
        return np.minimum(self.q_model(r), pstar)

    def h_at(self, r):
        r = np.asarray(r, dtype=float)
        if self.h is None:
            return np.full_like(r, self.h0)
        return np.broadcast_to(np.asarray(self.h(r), dtype=float), r.shape)

    def f_at(self, r):
        r = np.asarray(r, dtype=float)
        if self.f_weight is None:
            return np.ones_like(r)
        return np.broadcast_to(np.asarray(self.f_weight(r), dtype=float), r.shape)

    def bubble(self, eps: float) -> BubbleParams:
        return BubbleParams(self.dims, eps, self.delta)

    def breakpoints(self, eps: float) -> list[float]:
        kinks = self.p_model.kink_radii() + self.q_model.kink_radii()
        return bubble_breakpoints(self.bubble(eps), extra=kinks)

    def describe(self) -> dict:
        return {
            "n": self.dims.n,
            "p": self.dims.p,
            "p_star": self.dims.p_star,
            "laplacian_p": self.p_model.laplacian,
            "laplacian_q": self.q_model.laplacian,
            "h0": self.h0,
            "f0": self.f0,
            "delta": self.delta,
        }


def _pstar(n, p):
    return sobolev_exponent(n, p)
