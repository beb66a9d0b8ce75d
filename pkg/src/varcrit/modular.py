"""Variable-exponent modulars and Luxemburg norms on sampled radial functions."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import bisect

from .errors import DomainError
from .quadrature import gauss_legendre_panels
from .special_fn import sphere_area

__all__ = [
    "RadialGrid",
    "DiscreteFunction",
    "ExponentField",
    "modular_rho",
    "luxemburg_norm",
    "sobolev_norm",
    "HolderResult",
    "holder_check",
    "norm_modular_properties",
    "write_csv",
    "read_csv",
    "random_exponent",
    "random_functions",
]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Quadrature nodes on ``(0, r_max)`` with weights that include the
    spherical factor ``ω_{n-1} r^(n-1)``.

    ``n=None`` gives a plain interval grid with Lebesgue weights, which is
    handy for one-dimensional examples.
    """

    n: int | None
    nodes: np.ndarray
    weights: np.ndarray
    r_min: float = 0.0
    r_max: float = field(default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise DomainError("nodes and weights must be 1-D arrays of equal length")
        if np.any(np.diff(self.nodes) <= 0):
            raise DomainError("grid nodes must be strictly increasing")
        if np.any(self.weights < 0):
            raise DomainError("grid weights must be nonnegative")

    @classmethod
    def from_breakpoints(cls, n: int | None, breakpoints: Sequence[float], order: int = 16) -> "RadialGrid":
        """Composite Gauss-Legendre grid with panels between ``breakpoints``."""
        edges = sorted(set(float(b) for b in breakpoints))
        x, w = gauss_legendre_panels(edges, order)
        if n is not None:
            w = w * sphere_area(n) * x ** (n - 1)
        return cls(n, x, w, r_min=edges[0], r_max=edges[-1])

    @classmethod
    def ball(cls, n: int, r_max: float, panels: int = 8, order: int = 16) -> "RadialGrid":
        return cls.from_breakpoints(n, np.linspace(0.0, r_max, panels + 1), order)

    @classmethod
    def interval(cls, a: float, b: float, panels: int = 8, order: int = 16,
                 breakpoints: Iterable[float] = ()) -> "RadialGrid":
        edges = set(np.linspace(a, b, panels + 1)) | {x for x in breakpoints if a < x < b}
        return cls.from_breakpoints(None, sorted(edges), order)

    @property
    def volume(self) -> float:
        return float(np.sum(self.weights))

    def __len__(self) -> int:
        return self.nodes.size


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """Values of a radial function at the nodes of a grid, optionally with the
    radial derivative sampled at the same nodes."""

    grid: RadialGrid
    values: np.ndarray
    derivative: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        if self.values.shape != self.grid.nodes.shape:
            raise DomainError("values do not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("function values must be finite")
        if self.derivative is not None:
            object.__setattr__(self, "derivative", _frozen(self.derivative))
            if self.derivative.shape != self.grid.nodes.shape:
                raise DomainError("derivative samples do not match the grid")

    @classmethod
    def sample(cls, grid: RadialGrid, fn: Callable, dfn: Callable | None = None) -> "DiscreteFunction":
        vals = np.broadcast_to(np.asarray(fn(grid.nodes), dtype=float), grid.nodes.shape)
        der = None
        if dfn is not None:
            der = np.broadcast_to(np.asarray(dfn(grid.nodes), dtype=float), grid.nodes.shape)
        return cls(grid, vals, der)

    def scaled(self, c: float) -> "DiscreteFunction":
        der = None if self.derivative is None else c * self.derivative
        return DiscreteFunction(self.grid, c * self.values, der)

    def gradient(self) -> "DiscreteFunction":
        """The sampled ``|∇u|`` as a function on the same grid."""
        if self.derivative is None:
            raise DomainError("no derivative samples attached")
        return DiscreteFunction(self.grid, np.abs(self.derivative))

    def __mul__(self, other: "DiscreteFunction") -> "DiscreteFunction":
        if other.grid is not self.grid:
            raise DomainError("functions live on different grids")
        return DiscreteFunction(self.grid, self.values * other.values)

    def __add__(self, other: "DiscreteFunction") -> "DiscreteFunction":
        if other.grid is not self.grid:
            raise DomainError("functions live on different grids")
        return DiscreteFunction(self.grid, self.values + other.values)


@dataclass(frozen=True, eq=False)
class ExponentField:
    """A variable exponent sampled on a grid, with ``1 < p^- <= p^+ < ∞``."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.broadcast_to(self.values, self.grid.nodes.shape)))
        if not np.all(np.isfinite(self.values)) or not np.all(self.values > 1.0):
            raise DomainError("exponent must be finite and > 1 everywhere on the grid")

    @classmethod
    def sample(cls, grid: RadialGrid, fn: Callable | float) -> "ExponentField":
        if callable(fn):
            return cls(grid, np.asarray(fn(grid.nodes), dtype=float))
        return cls(grid, np.full(grid.nodes.shape, float(fn)))

    @property
    def p_minus(self) -> float:
        return float(np.min(self.values))

    @property
    def p_plus(self) -> float:
        return float(np.max(self.values))


def _check_grid(u: DiscreteFunction, p: ExponentField):
    if u.grid is not p.grid:
        raise DomainError("function and exponent are sampled on different grids")


def modular_rho(u: DiscreteFunction, p: ExponentField) -> float:
    """``ρ(u) = ∫ |u|^p(x) dx`` by the grid quadrature."""
    _check_grid(u, p)
    return float(np.dot(u.grid.weights, np.abs(u.values) ** p.values))


def luxemburg_norm(u: DiscreteFunction, p: ExponentField, rtol: float = 1e-13) -> float:
    """``inf{λ > 0 : ρ(u/λ) <= 1}``.

    ``λ ↦ ρ(u/λ)`` is strictly decreasing for ``u ≠ 0``; the root of
    ``ρ(u/λ) = 1`` is bracketed by doubling and then bisected. Returns 0
    for the zero function.
    """
    _check_grid(u, p)
    mass = u.grid.weights * (np.abs(u.values) > 0)
    if not np.any(mass > 0):
        return 0.0
    absu = np.abs(u.values)
    w = u.grid.weights

    def excess(lam):
        return float(np.dot(w, (absu / lam) ** p.values)) - 1.0

    lo = hi = float(np.max(absu))
    while excess(lo) <= 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise ArithmeticError("could not bracket the Luxemburg norm from below")
    while excess(hi) > 0.0:
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("could not bracket the Luxemburg norm from above")
    if excess(hi) == 0.0:
        return hi
    return bisect(excess, lo, hi, xtol=1e-300, rtol=rtol, maxiter=400)


def sobolev_norm(u: DiscreteFunction, p: ExponentField) -> float:
    """``‖u‖_{L^p(x)} + ‖∇u‖_{L^p(x)}`` using the attached derivative samples."""
    return luxemburg_norm(u, p) + luxemburg_norm(u.gradient(), p)


@dataclass(frozen=True)
class HolderResult:
    value: float
    bound: float
    slack: float

    @property
    def holds(self) -> bool:
        return self.slack >= 0.0


def holder_check(f: DiscreteFunction, g: DiscreteFunction, p: ExponentField, q: ExponentField) -> HolderResult:
    """Evaluate both sides of
    ``‖fg‖_s <= ((s/p)^+ + (s/q)^+) ‖f‖_p ‖g‖_q`` with ``1/s = 1/p + 1/q``.

    Raises
    ------
    DomainError
        If ``s`` leaves ``(1, ∞)`` somewhere on the grid.
    """
    _check_grid(f, p)
    _check_grid(g, q)
    s_vals = 1.0 / (1.0 / p.values + 1.0 / q.values)
    if not np.all(s_vals > 1.0):
        raise DomainError("conjugate exponent s must exceed 1 everywhere")
    s = ExponentField(f.grid, s_vals)
    value = luxemburg_norm(f * g, s)
    const = float(np.max(s_vals / p.values)) + float(np.max(s_vals / q.values))
    bound = const * luxemburg_norm(f, p) * luxemburg_norm(g, q)
    return HolderResult(value, bound, bound - value)


def norm_modular_properties(
    batch: Iterable[DiscreteFunction],
    p: ExponentField,
    tol: float = 1e-10,
    sequence_length: int = 6,
) -> dict:
    """Check the norm/modular relations for every function in ``batch``.

    Items, in order: (1) ``ρ(u/‖u‖) = 1``; (2) ``‖u‖`` and ``ρ(u)`` lie on
    the same side of 1; (3) ``‖u‖ > 1`` gives ``‖u‖^p- <= ρ(u) <= ‖u‖^p+``;
    (4) ``‖u‖ < 1`` gives the reversed powers; (5) ``ρ(u/k)`` decreases to 0
    together with the norm; (6) ``ρ(k u)`` grows without bound together
    with the norm.

    Returns a dict with per-item case and violation counts plus the worst
    observed defect.
    """
    pm, pp = p.p_minus, p.p_plus
    report = {f"item{i}": {"cases": 0, "violations": 0, "worst": 0.0} for i in range(1, 7)}

    def record(item, defect):
        r = report[item]
        r["cases"] += 1
        r["worst"] = max(r["worst"], defect)
        if defect > 0.0:
            r["violations"] += 1

    ks = np.arange(1, sequence_length + 1, dtype=float)
    for u in batch:
        norm = luxemburg_norm(u, p)
        if norm == 0.0:
            continue
        rho = modular_rho(u, p)
        record("item1", abs(modular_rho(u.scaled(1.0 / norm), p) - 1.0) - tol)

        side_norm = np.sign(norm - 1.0) if abs(norm - 1.0) > tol else 0.0
        side_rho = np.sign(rho - 1.0) if abs(rho - 1.0) > tol * max(pp, 1.0) else 0.0
        # within the tolerance band both sides count as "= 1"
        record("item2", 0.0 if (side_norm == side_rho or 0.0 in (side_norm, side_rho)) else 1.0)

        slack = tol * max(1.0, rho)
        if norm > 1.0:
            record("item3", max(norm ** pm - rho, rho - norm ** pp) - slack)
        elif norm < 1.0:
            record("item4", max(norm ** pp - rho, rho - norm ** pm) - slack)

        shrink_norm = np.array([luxemburg_norm(u.scaled(1.0 / k ** 2), p) for k in ks])
        shrink_rho = np.array([modular_rho(u.scaled(1.0 / k ** 2), p) for k in ks])
        ok5 = (
            np.all(np.diff(shrink_rho) < 0)
            and np.all(np.diff(shrink_norm) < 0)
            # ρ(u/k^2) <= k^(-2 p^-) ρ(u) forces the limit to 0
            and np.all(shrink_rho <= ks ** (-2 * pm) * rho * (1 + tol))
        )
        record("item5", 0.0 if ok5 else 1.0)

        grow_norm = np.array([luxemburg_norm(u.scaled(k ** 2), p) for k in ks])
        grow_rho = np.array([modular_rho(u.scaled(k ** 2), p) for k in ks])
        ok6 = (
            np.all(np.diff(grow_rho) > 0)
            and np.all(np.diff(grow_norm) > 0)
            and np.all(grow_rho >= ks ** (2 * pm) * rho * (1 - tol))
        )
        record("item6", 0.0 if ok6 else 1.0)
    return report


def random_exponent(grid: RadialGrid, rng: np.random.Generator, lo: float = 1.1, hi: float = 4.0) -> ExponentField:
    """Smooth random exponent with values in ``[lo, hi]``."""
    a, b = np.sort(rng.uniform(lo, hi, size=2))
    freq = rng.uniform(0.5, 3.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    span = max(grid.r_max - grid.r_min, 1e-300)
    wave = 0.5 * (1.0 + np.sin(freq * np.pi * (grid.nodes - grid.r_min) / span + phase))
    return ExponentField(grid, a + (b - a) * wave)


def random_functions(grid: RadialGrid, rng: np.random.Generator, count: int,
                     log10_scale: tuple[float, float] = (-2.0, 2.0), bumps: int = 3) -> list[DiscreteFunction]:
    """Random sums of Gaussian bumps with derivative samples.

    Overall magnitudes are log-uniform over ``log10_scale`` so that both
    sides of norm 1 are exercised.
    """
    r = grid.nodes
    span = max(grid.r_max - grid.r_min, 1e-300)
    out = []
    for _ in range(count):
        amp = rng.standard_normal(bumps)
        centers = grid.r_min + span * rng.uniform(0.0, 1.0, bumps)
        widths = span * rng.uniform(0.05, 0.5, bumps)
        z = (r[:, None] - centers) / widths
        g = np.exp(-0.5 * z * z)
        vals = g @ amp
        der = (-z / widths * g) @ amp
        scale = 10.0 ** rng.uniform(*log10_scale) / max(float(np.max(np.abs(vals))), 1e-300)
        out.append(DiscreteFunction(grid, scale * vals, scale * der))
    return out


def write_csv(u: DiscreteFunction, path: str | Path) -> None:
    """Write ``r,value`` rows (debugging aid)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "value"])
        for r, v in zip(u.grid.nodes, u.values):
            writer.writerow([repr(float(r)), repr(float(v))])


def read_csv(path: str | Path, grid: RadialGrid) -> DiscreteFunction:
    """Read ``r,value`` rows written by :func:`write_csv` back onto ``grid``."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    r = np.array([float(row["r"]) for row in rows])
    v = np.array([float(row["value"]) for row in rows])
    if r.shape != grid.nodes.shape or not np.allclose(r, grid.nodes, rtol=1e-14, atol=0):
        raise DomainError("CSV radii do not match the grid nodes")
    return DiscreteFunction(grid, v)
