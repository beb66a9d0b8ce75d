"""The energy functional on radial grids and the mountain-pass level test.

``J(u) = ∫ (|∇u|^p(x) + h |u|^p(x)) / p(x) - ∫ |u|^q(x) / q(x)``.

Compactness holds below ``(1/n) K(n,p)^-n``; :func:`sup_over_ray` measures
how far ``sup_t J(t v_ε)`` sits from that level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DomainError
from ..instanton import d_np, k_np, sobolev_threshold, v_eps, v_eps_derivative
from ..modular import DiscreteFunction, ExponentField, RadialGrid, sobolev_norm
from .expansions import normalized_ABC
from .fitting import default_eps_sequence, log_regressor, two_point_estimates, validate_eps_sequence
from .models import EnergyProblem, check_guard

__all__ = [
    "functional_J",
    "bubble_grid",
    "sample_test_function",
    "RayEnergy",
    "MPEntry",
    "MPReport",
    "CondResult",
    "GeometryReport",
    "sup_over_ray",
    "cond_check",
    "mountain_pass_report",
    "mp_geometry_check",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _exponents(prob: EnergyProblem, grid: RadialGrid):
    r = grid.nodes
    return prob.p_at(r), prob.q_at(r), prob.h_at(r)


class RayEnergy:
    """``t ↦ J(t u)`` for a fixed sampled ``u``.

    Precomputes the per-node coefficients so that
    ``J(t u) = Σ a_i t^p_i - Σ b_i t^q_i``.
    """

    def __init__(self, u: DiscreteFunction, prob: EnergyProblem):
        if u.derivative is None:
            raise DomainError("the energy needs derivative samples")
        _check_support(u, prob)
        p, q, h = _exponents(prob, u.grid)
        w = u.grid.weights
        au = np.abs(u.values)
        ag = np.abs(u.derivative)
        self._p = p
        self._q = q
        self._a = w * (ag**p + h * au**p) / p
        self._b = w * au**q / q

    def __call__(self, t: float) -> float:
        if t == 0:
            return 0.0
        return float(np.dot(self._a, t**self._p) - np.dot(self._b, t**self._q))


def _check_support(u: DiscreteFunction, prob: EnergyProblem) -> None:
    if prob.delta is None:
        return
    support = 2.0 * prob.delta
    if u.grid.r_max < support * (1.0 - 1e-12):
        scale = max(float(np.max(np.abs(u.values))), 1e-300)
        if abs(u.values[-1]) > 1e-12 * scale:
            raise DomainError(
                f"grid ends at r={u.grid.r_max:g} but the function is supported up to r={support:g}"
            )


def functional_J(u: DiscreteFunction, prob: EnergyProblem, t: float = 1.0) -> float:
    """``J(t u)`` by the grid quadrature.

    Raises
    ------
    DomainError
        If ``u`` lacks derivative samples or the grid stops inside its support.
    """
    return RayEnergy(u, prob)(t)


def bubble_grid(prob: EnergyProblem, eps: float, order: int = 24) -> RadialGrid:
    """Composite Gauss-Legendre grid adapted to the bubble at scale ``eps``.

    Without a cutoff the grid is extended geometrically to ``1e9 ε``.
    """
    pts = [0.0, *prob.breakpoints(eps)]
    if prob.delta is None:
        r = pts[-1]
        while r < 1e9 * eps:
            r *= 4.0
            pts.append(r)
    else:
        pts.append(2.0 * prob.delta)
    return RadialGrid.from_breakpoints(prob.dims.n, pts, order)


def sample_test_function(prob: EnergyProblem, eps: float, grid: RadialGrid | None = None) -> DiscreteFunction:
    """The normalized bubble ``v_ε`` with its radial derivative."""
    grid = bubble_grid(prob, eps) if grid is None else grid
    bp = prob.bubble(eps)
    return DiscreteFunction.sample(grid, lambda r: v_eps(bp, r), lambda r: v_eps_derivative(bp, r))


@dataclass(frozen=True)
class MPEntry:
    eps: float
    sup: float
    t_eps: float
    t0: float
    margin: float


def _golden_max(f, a: float, b: float, tol: float) -> float:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def sup_over_ray(prob: EnergyProblem, eps: float, t_tol: float = 1e-8,
                 grid: RadialGrid | None = None) -> MPEntry:
    """``sup_{t>0} J(t v_ε)``, its maximizer and the margin to ``(1/n) K^-n``.

    ``t0`` is found by doubling from 2 until ``J(t0 v_ε) < 0``; the maximum
    on ``[0, t0]`` is located by golden-section search to ``|Δt| <= t_tol``.

    Raises
    ------
    DomainError
        If the energy stays nonnegative along the whole ray.
    """
    ray = RayEnergy(sample_test_function(prob, eps, grid), prob)
    t0 = 2.0
    while ray(t0) >= 0.0:
        t0 *= 2.0
        if t0 > 2.0**60:
            raise DomainError("the energy never becomes negative along the ray; check the problem data")
    t = _golden_max(ray, 0.0, t0, t_tol)
    sup = ray(t)
    return MPEntry(eps=float(eps), sup=sup, t_eps=t, t0=t0, margin=sup - sobolev_threshold(prob.dims))


@dataclass(frozen=True)
class CondResult:
    """``-Δp(0) < -Δq(0) (p/p*)² D(n,p)``, with both sides."""

    lhs: float
    rhs: float
    d_np: float

    @property
    def holds(self) -> bool:
        return self.lhs < self.rhs


def _cond_sides(prob: EnergyProblem) -> CondResult:
    dims = prob.dims
    d = d_np(dims)
    lhs = -prob.p_model.laplacian
    rhs = -prob.q_model.laplacian * (dims.p / dims.p_star) ** 2 * d
    return CondResult(lhs=lhs, rhs=rhs, d_np=d)


def cond_check(prob: EnergyProblem) -> CondResult:
    """Local existence condition of the ``p >= 2`` branch.

    Raises
    ------
    DomainError
        For ``p < 2``, where the condition does not apply.
    """
    if prob.dims.p < 2.0:
        raise DomainError("the curvature condition applies only for p >= 2")
    return _cond_sides(prob)


@dataclass(frozen=True)
class MPReport:
    """Mountain-pass margins along an ε-sequence and the predicted behaviour.

    ``branch`` is ``"log"`` when the ``ε² ln ε`` curvature term leads and
    ``"power"`` when the ``ε^p`` term of ``h(0)`` leads. ``predicted`` is
    the closed coefficient (``A/p* - B/p`` or ``h(0) C/p``) and ``ratios``
    are ``margin`` divided by the branch regressor. ``a_coefficient`` is
    ``-f1'(1)/f0''(1)`` for the same correction.
    """

    problem: dict
    threshold: float
    entries: tuple[MPEntry, ...]
    branch: str
    regressor: str
    predicted: float
    ratios: tuple[float, ...]
    fitted: float
    a_coefficient: float
    abc: tuple[float, float, float]
    cond: CondResult | None
    predicted_sign: int
    observed_sign: int
    zero_band: float
    guards_overridden: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def sign_matches(self) -> bool:
        return self.predicted_sign == self.observed_sign

    @property
    def cond_verdict(self) -> bool | None:
        return None if self.cond is None else self.cond.holds

    def rows(self) -> list[dict]:
        return [
            {"eps": e.eps, "sup": e.sup, "t_eps": e.t_eps, "t0": e.t0, "margin": e.margin, "ratio": r}
            for e, r in zip(self.entries, self.ratios)
        ]


def _sign(x: float) -> int:
    return int(x > 0) - int(x < 0)


def mountain_pass_report(
    prob: EnergyProblem,
    eps: Sequence[float] | None = None,
    zero_band: float = 1e-6,
    override_guards: bool = False,
) -> MPReport:
    """Run :func:`sup_over_ray` along ``eps`` and compare with the prediction.

    The predicted margin sign at the smallest scale is:

    * curvature branch: negative when the curvature condition holds
      strictly, positive when it fails strictly, zero at equality;
    * power branch: the sign of ``h(0)``.

    A predicted zero is matched when ``|margin| <= zero_band * threshold``.
    """
    eps = validate_eps_sequence(default_eps_sequence() if eps is None else eps)
    dims = prob.dims
    p, ps = dims.p, dims.p_star
    flat = prob.p_model.is_flat and prob.q_model.is_flat
    use_power = flat or (p < 2.0 and prob.h0 != 0.0)

    overridden = False
    kinds = ("lp",) if use_power else ("lq", "grad")
    for kind in kinds:
        overridden |= not check_guard(kind, dims, override_guards)

    a_c, b_c, c_c = normalized_ABC(prob, override_guards=True)
    kn = k_np(dims) ** (-dims.n)
    f0pp = (p - ps) * kn
    entries = [sup_over_ray(prob, e) for e in eps]
    margins = np.array([e.margin for e in entries])
    e_arr = np.asarray(eps)
    threshold = sobolev_threshold(dims)

    cond = None
    if use_power:
        regressor = "eps^p"
        predicted = prob.h0 * c_c / p
        a_coef = -prob.h0 * c_c / f0pp
        ratios = margins / e_arr**p
        fitted = float(ratios[-1])
        predicted_sign = _sign(prob.h0)
        extras = {}
    else:
        regressor = "eps^2 ln eps"
        predicted = a_c / ps - b_c / p
        a_coef = -(a_c - b_c) / f0pp
        ratios = margins / log_regressor(e_arr)
        fitted = two_point_estimates(e_arr, margins)[-1]
        sides = _cond_sides(prob)
        cond = sides if p >= 2.0 else None
        predicted_sign = -1 if sides.lhs < sides.rhs else (1 if sides.lhs > sides.rhs else 0)
        extras = {"cond_lhs": sides.lhs, "cond_rhs": sides.rhs}

    last = float(margins[-1])
    observed = 0 if abs(last) <= zero_band * threshold else _sign(last)
    if predicted_sign != 0 and observed == 0:
        observed = _sign(last)
    extras["t_shift_sign"] = _sign(entries[-1].t_eps - 1.0)
    return MPReport(
        problem=prob.describe(),
        threshold=threshold,
        entries=tuple(entries),
        branch="power" if use_power else "log",
        regressor=regressor,
        predicted=float(predicted),
        ratios=tuple(float(r) for r in ratios),
        fitted=float(fitted),
        a_coefficient=float(a_coef),
        abc=(float(a_c), float(b_c), float(c_c)),
        cond=cond,
        predicted_sign=predicted_sign,
        observed_sign=observed,
        zero_band=zero_band,
        guards_overridden=overridden,
        extras=extras,
    )


@dataclass(frozen=True)
class GeometryReport:
    """Numerical mountain-pass geometry: ``J(0) = 0``, ``J > 0`` on a small
    sphere, and a point of negative energy far along the bubble ray.

    ``coercivity`` is the smallest observed
    ``∫(|∇v|^p + h|v|^p) / ‖v‖^p+`` over the sampled directions.
    """

    j_zero: float
    radius: float
    directions: int
    j_min: float
    j_max: float
    coercivity: float
    p_plus: float
    q_minus: float
    t_star: float
    j_far: float

    @property
    def positive_on_sphere(self) -> bool:
        return self.j_min > 0.0

    @property
    def holds(self) -> bool:
        return self.j_zero == 0.0 and self.positive_on_sphere and self.j_far < 0.0


def mp_geometry_check(
    prob: EnergyProblem,
    radius: float = 1e-3,
    directions: int = 100,
    eps: float = 2.0**-6,
    modes: int = 6,
    seed: int = 0,
) -> GeometryReport:
    """Sample the mountain-pass geometry of ``J``.

    Directions are random cosine series ``Σ c_k cos((k-½) π r/R)`` on the
    ball of radius ``R = 2δ`` (``R = 2`` without cutoff), which vanish at
    ``R``, rescaled to Sobolev norm ``radius``.
    """
    rmax = 2.0 * (prob.delta if prob.delta is not None else 1.0)
    grid = RadialGrid.ball(prob.dims.n, rmax, panels=16, order=16)
    p, q, h = _exponents(prob, grid)
    pfield = ExponentField(grid, p)
    r = grid.nodes
    k = np.arange(1, modes + 1) - 0.5
    phase = np.pi * np.outer(r, k) / rmax
    basis, dbasis = np.cos(phase), -np.sin(phase) * (np.pi * k / rmax)

    zero = DiscreteFunction(grid, np.zeros_like(r), np.zeros_like(r))
    j_zero = functional_J(zero, prob)

    rng = np.random.default_rng(seed)
    js, coer = [], []
    for _ in range(directions):
        c = rng.standard_normal(modes)
        v = DiscreteFunction(grid, basis @ c, dbasis @ c)
        v = v.scaled(radius / sobolev_norm(v, pfield))
        js.append(functional_J(v, prob))
        lower = np.dot(grid.weights, np.abs(v.derivative) ** p + h * np.abs(v.values) ** p)
        coer.append(lower / radius ** pfield.p_plus)

    entry = sup_over_ray(prob, eps)
    j_far = functional_J(sample_test_function(prob, eps), prob, t=10.0 * entry.t_eps)
    return GeometryReport(
        j_zero=j_zero,
        radius=radius,
        directions=directions,
        j_min=float(min(js)),
        j_max=float(max(js)),
        coercivity=float(min(coer)),
        p_plus=pfield.p_plus,
        q_minus=float(np.min(q)),
        t_star=entry.t_eps,
        j_far=j_far,
    )
