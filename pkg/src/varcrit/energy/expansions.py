"""Small-ε expansions of the bubble integrals and their closed-form constants.

For the cut-off bubble ``u_ε`` concentrated at a common critical point of
the exponents:

* ``∫ f u_ε^q(x)     = A0 + A1 ε² ln ε + o(ε² ln ε)``
* ``∫ f |∇u_ε|^p(x)  = B0 + B1 ε² ln ε + o(ε² ln ε)``
* ``∫ f u_ε^p(x)     = C0 ε^p + o(ε^p)``
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DivergentIntegralError
from ..instanton import (
    k_np,
    moments_closed_form,
    u_eps,
    u_eps_derivative,
)
from ..quadrature import QuadSpec, integrate, integrate_halfline
from ..special_fn import sphere_area
from .fitting import (
    default_eps_sequence,
    log_regressor,
    single_regressor_slope,
    two_point_estimates,
    validate_eps_sequence,
)
from .models import GUARDS, EnergyProblem, check_guard

__all__ = [
    "EXPANSION_SPEC",
    "ExpansionReport",
    "expansion_lq",
    "expansion_grad",
    "expansion_lp",
    "closed_A0_A1",
    "closed_B0_B1",
    "closed_C0",
    "normalized_ABC",
    "expansion_report",
]

EXPANSION_SPEC = QuadSpec(abs_tol=1e-300, rel_tol=1e-12, max_subdivisions=4000)


def _radial_integral(prob: EnergyProblem, eps: float, density, spec: QuadSpec) -> float:
    n = prob.dims.n
    pts = prob.breakpoints(eps)

    def g(r):
        return density(r) * r ** (n - 1)

    if prob.delta is None:
        value = integrate_halfline(g, spec, pts).value
    else:
        value = integrate(g, 0.0, 2.0 * prob.delta, spec, pts).value
    return sphere_area(n) * value


def expansion_lq(prob: EnergyProblem, eps: float, spec: QuadSpec = EXPANSION_SPEC,
                 override_guards: bool = False) -> float:
    """``∫ f(x) u_ε(x)^q(x) dx``."""
    check_guard("lq", prob.dims, override_guards)
    bp = prob.bubble(eps)
    return _radial_integral(prob, eps, lambda r: prob.f_at(r) * u_eps(bp, r) ** prob.q_at(r), spec)


def expansion_grad(prob: EnergyProblem, eps: float, spec: QuadSpec = EXPANSION_SPEC,
                   override_guards: bool = False) -> float:
    """``∫ f(x) |∇u_ε(x)|^p(x) dx``."""
    check_guard("grad", prob.dims, override_guards)
    bp = prob.bubble(eps)
    return _radial_integral(
        prob, eps, lambda r: prob.f_at(r) * np.abs(u_eps_derivative(bp, r)) ** prob.p_at(r), spec
    )


def expansion_lp(prob: EnergyProblem, eps: float, spec: QuadSpec = EXPANSION_SPEC,
                 override_guards: bool = False) -> float:
    """``∫ f(x) u_ε(x)^p(x) dx``."""
    check_guard("lp", prob.dims, override_guards)
    bp = prob.bubble(eps)
    return _radial_integral(prob, eps, lambda r: prob.f_at(r) * u_eps(bp, r) ** prob.p_at(r), spec)


def closed_A0_A1(prob: EnergyProblem) -> tuple[float, float]:
    """``A0 = f(0) ∫U^p*`` and ``A1 = -f(0) Δq(0) ∫|x|² U^p* / (2 p*)``."""
    m = moments_closed_form(prob.dims)
    f0, ps = prob.f0, prob.dims.p_star
    dq = prob.q_model.laplacian
    a1 = 0.0 if dq == 0 else -f0 * dq * m.require("m_q2") / (2.0 * ps)
    return f0 * m.m_q0, a1


def closed_B0_B1(prob: EnergyProblem) -> tuple[float, float]:
    """``B0 = f(0) ∫|∇U|^p`` and ``B1 = -f(0) Δp(0) ∫|x|² |∇U|^p / (2p)``."""
    m = moments_closed_form(prob.dims)
    f0, p = prob.f0, prob.dims.p
    dp = prob.p_model.laplacian
    b1 = 0.0 if dp == 0 else -f0 * dp * m.require("m_g2") / (2.0 * p)
    return f0 * m.m_g0, b1


def closed_C0(prob: EnergyProblem) -> float:
    """``C0 = f(0) ∫U^p``; diverges unless ``p² < n``."""
    return prob.f0 * moments_closed_form(prob.dims).require("m_p0")


def normalized_ABC(prob: EnergyProblem, override_guards: bool = False) -> tuple[float, float, float]:
    """Correction constants of the normalized test function ``v_ε``.

    With ``v_ε = s u_ε`` and ``s^p* ∫U^p* = s^p ∫|∇U|^p = K^-n``:

    * ``∫ v_ε^q       = K^-n + A ε² ln ε``, ``A = -(Δq/(2p*)) K^-n m_q2/m_q0``
    * ``∫ |∇v_ε|^p    = K^-n + B ε² ln ε``, ``B = -(Δp/(2p)) K^-n m_g2/m_g0``
    * ``∫ v_ε^p       = C ε^p``,           ``C = K^-n m_p0/m_g0``

    The weight ``f`` plays no role here.
    """
    dims = prob.dims
    for kind in ("lq", "grad", "lp"):
        check_guard(kind, dims, override_guards)
    m = moments_closed_form(dims)
    kn = k_np(dims) ** (-dims.n)
    dq, dp = prob.q_model.laplacian, prob.p_model.laplacian
    a = 0.0 if dq == 0 else -(dq / (2.0 * dims.p_star)) * kn * m.require("m_q2") / m.m_q0
    b = 0.0 if dp == 0 else -(dp / (2.0 * dims.p)) * kn * m.require("m_g2") / m.m_g0
    c = kn * m.require("m_p0") / m.m_g0
    return a, b, c


_MEASURE = {"lq": expansion_lq, "grad": expansion_grad, "lp": expansion_lp}


@dataclass(frozen=True)
class ExpansionReport:
    """Measured integrals along an ε-sequence against the closed-form constants.

    ``fitted`` is the estimate at the smallest scale: the last two-point
    estimate for the ``ε² ln ε`` expansions, ``measured/ε^p`` for ``lp``.
    ``reference_scale`` is the coefficient magnitude a unit-size quadratic
    perturbation (``|x|²``) would produce; it judges fits whose closed
    coefficient is zero.
    """

    kind: str
    problem: dict
    eps: tuple[float, ...]
    measured: tuple[float, ...]
    leading: float
    coefficient: float
    regressor: str
    estimates: tuple[float, ...]
    fitted: float
    least_squares: float
    rel_error: float | None
    reference_scale: float
    remainder_ratios: tuple[float, ...]
    guard_bound: str
    guard_holds: bool
    guard_overridden: bool
    moments: dict = field(default_factory=dict)

    def within_tolerance(self, tol: float) -> bool:
        if not math.isfinite(self.coefficient):
            return False
        if self.coefficient != 0:
            return self.rel_error is not None and self.rel_error <= tol
        return abs(self.fitted) <= tol * self.reference_scale

    def rows(self) -> list[dict]:
        out = []
        if self.kind == "lp":
            padded = list(self.estimates)
        else:
            padded = [math.nan, *self.estimates]
        for e, m, est, rem in zip(self.eps, self.measured, padded, self.remainder_ratios):
            out.append({
                "eps": e,
                "measured": m,
                "deviation": m - self.leading,
                "estimate": est,
                "remainder_ratio": rem,
            })
        return out


def expansion_report(
    prob: EnergyProblem,
    kind: str,
    eps: Sequence[float] | None = None,
    spec: QuadSpec = EXPANSION_SPEC,
    override_guards: bool = False,
    workers: int = 1,
) -> ExpansionReport:
    """Evaluate expansion ``kind`` (``lq``, ``grad`` or ``lp``) along ``eps``.

    The scales are independent; ``workers > 1`` evaluates them in a thread
    pool. Results are assembled in the order of ``eps``.
    """
    if kind not in _MEASURE:
        raise ValueError(f"unknown expansion {kind!r}")
    eps = validate_eps_sequence(default_eps_sequence() if eps is None else eps)
    holds = check_guard(kind, prob.dims, override_guards)
    fn = _MEASURE[kind]

    def one(e):
        return fn(prob, e, spec, override_guards=True)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            measured = list(pool.map(one, eps))
    else:
        measured = [one(e) for e in eps]

    m = moments_closed_form(prob.dims)
    n, p, ps, f0 = prob.dims.n, prob.dims.p, prob.dims.p_star, prob.f0
    e_arr = np.asarray(eps)
    meas = np.asarray(measured)

    def closed(fn):
        # past a guard the closed constants may diverge; report NaN then
        try:
            return fn(prob)
        except DivergentIntegralError:
            if not override_guards:
                raise
            return (math.nan, math.nan) if fn is not closed_C0 else math.nan

    if kind == "lp":
        leading = 0.0
        coefficient = closed(closed_C0)
        regressor = "eps^p"
        estimates = list(meas / e_arr**p)
        fitted = estimates[-1]
        lsq = single_regressor_slope(e_arr**p, meas)
        remainder = [(v - coefficient * e**p) / e**p for v, e in zip(meas, e_arr)]
        reference = abs(coefficient) if coefficient != 0 else (m.m_p0 or math.nan)
    else:
        if kind == "lq":
            leading, coefficient = closed(closed_A0_A1)
            second = m.m_q2
            reference = abs(f0) * n / ps * second if second is not None else math.nan
        else:
            leading, coefficient = closed(closed_B0_B1)
            second = m.m_g2
            reference = abs(f0) * n / p * second if second is not None else math.nan
        regressor = "eps^2 ln eps"
        dev = meas - leading
        x = log_regressor(e_arr)
        estimates = two_point_estimates(e_arr, dev)
        fitted = estimates[-1]
        lsq = single_regressor_slope(x, dev)
        remainder = list((dev - coefficient * x) / x)

    rel = abs(fitted - coefficient) / abs(coefficient) if coefficient != 0 and math.isfinite(coefficient) else None
    bound = GUARDS[kind][0]
    return ExpansionReport(
        kind=kind,
        problem=prob.describe(),
        eps=tuple(eps),
        measured=tuple(float(v) for v in meas),
        leading=float(leading),
        coefficient=float(coefficient),
        regressor=regressor,
        estimates=tuple(float(v) for v in estimates),
        fitted=float(fitted),
        least_squares=float(lsq),
        rel_error=rel,
        reference_scale=float(reference),
        remainder_ratios=tuple(float(v) for v in remainder),
        guard_bound=bound,
        guard_holds=holds,
        guard_overridden=bool(override_guards and not holds),
        moments=m.as_dict(),
    )
