"""The Aubin-Talenti extremal, its rescalings and cutoffs, closed-form moments,
the Sobolev constant ``K(n, p)``, the gradient threshold ``C_p`` and ``D(n, p)``.

All profiles are radial; functions take a radius ``r >= 0`` (scalar or
array) rather than a point of R^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DivergentIntegralError, DomainError
from .quadrature import DEFAULT_SPEC, QuadSpec, integrate_radial
from .special_fn import DimParams, ipq, sphere_area

__all__ = [
    "BubbleParams",
    "MomentSet",
    "u_profile",
    "u_profile_derivative",
    "grad_u_eps_magnitude",
    "c_p_threshold",
    "gradient_threshold_radius",
    "moments_closed_form",
    "moments_quadrature",
    "m_p0_quadrature",
    "k_np",
    "sobolev_threshold",
    "normalization_constant",
    "d_np",
    "d_np_oracle",
    "cutoff_eta",
    "cutoff_eta_derivative",
    "u_eps",
    "u_eps_derivative",
    "v_eps",
    "v_eps_derivative",
    "bubble_breakpoints",
]


@dataclass(frozen=True)
class BubbleParams:
    """Scale, center and cutoff of a concentrating bubble.

    ``delta=None`` means no cutoff: the bubble lives on all of R^n.
    """

    dims: DimParams
    eps: float
    delta: float | None = 1.0
    center: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError(f"bubble scale must be positive, got {self.eps}")
        if self.delta is not None and not self.delta > 0:
            raise DomainError(f"cutoff radius must be positive, got {self.delta}")
        if not self.center:
            object.__setattr__(self, "center", (0.0,) * self.dims.n)
        elif len(self.center) != self.dims.n:
            raise DomainError("center dimension does not match n")

    @property
    def support_radius(self) -> float:
        return math.inf if self.delta is None else 2.0 * self.delta


@dataclass(frozen=True)
class MomentSet:
    """Moments of the extremal ``U`` over R^n.

    ``m_q0 = ∫U^p*``, ``m_q2 = ∫|x|^2 U^p*``, ``m_g0 = ∫|∇U|^p``,
    ``m_g2 = ∫|x|^2 |∇U|^p``, ``m_p0 = ∫U^p``. A moment that diverges for
    the given ``(n, p)`` is stored as ``None``.
    """

    dims: DimParams
    m_q0: float
    m_q2: float | None
    m_g0: float
    m_g2: float | None
    m_p0: float | None

    def require(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise DivergentIntegralError(
                f"{name} diverges for n={self.dims.n}, p={self.dims.p} "
                f"({_DIVERGENCE_REASON[name]})",
                name=name,
            )
        return value

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("m_q0", "m_q2", "m_g0", "m_g2", "m_p0")}


_DIVERGENCE_REASON = {
    "m_q2": "needs p < (n+2)/2",
    "m_g2": "needs p < (n+2)/3",
    "m_p0": "needs p^2 < n",
}


def _finite(name: str, dims: DimParams) -> bool:
    n, p = dims.n, dims.p
    if name == "m_q2":
        return p < (n + 2) / 2
    if name == "m_g2":
        return p < (n + 2) / 3
    if name == "m_p0":
        return p * p < n
    return True


def u_profile(dims: DimParams, r):
    """``U(r) = (1 + r^(p/(p-1)))^(-(n-p)/p)``."""
    n, p = dims.n, dims.p
    r = np.asarray(r, dtype=float)
    return (1.0 + r ** (p / (p - 1.0))) ** (-(n - p) / p)


def u_profile_derivative(dims: DimParams, r):
    """Radial derivative ``U'(r)``, which is nonpositive."""
    n, p = dims.n, dims.p
    r = np.asarray(r, dtype=float)
    return (
        -(n - p) / (p - 1.0)
        * r ** (1.0 / (p - 1.0))
        * (1.0 + r ** (p / (p - 1.0))) ** (-n / p)
    )


def grad_u_eps_magnitude(bp: BubbleParams, r):
    """``|∇U_ε|`` at radius ``r`` for the uncut bubble ``ε^(-(n-p)/p) U(x/ε)``."""
    p, n = bp.dims.p, bp.dims.n
    return bp.eps ** (-n / p) * np.abs(u_profile_derivative(bp.dims, np.asarray(r) / bp.eps))


def c_p_threshold(dims: DimParams) -> float:
    """``C_p = ((n-p)/(p-1))^((p-1)/(n-1))``."""
    n, p = dims.n, dims.p
    return ((n - p) / (p - 1.0)) ** ((p - 1.0) / (n - 1.0))


def gradient_threshold_radius(bp: BubbleParams, factor: float = 1.0) -> float:
    """Radius ``factor * C_p * ε^((n-p)/(p(n-1)))`` beyond which ``|∇U_ε| < 1``."""
    n, p = bp.dims.n, bp.dims.p
    return factor * c_p_threshold(bp.dims) * bp.eps ** ((n - p) / (p * (n - 1.0)))


def moments_closed_form(dims: DimParams, m_p0_spec: QuadSpec = DEFAULT_SPEC) -> MomentSet:
    """Moments through the Beta family ``I_n^q``.

    After the change of variable ``t = r^(p/(p-1))`` every moment except
    ``∫U^p`` is a prefactor times ``I_n^q``; that one is integrated
    numerically.
    """
    n, p = dims.n, dims.p
    omega = sphere_area(n)
    pre = omega * (p - 1.0) / p
    base = n * (p - 1.0) / p
    grad_pre = pre * ((n - p) / (p - 1.0)) ** p

    m_q0 = pre * ipq(n, base)
    m_g0 = grad_pre * ipq(n, base + 1.0)
    m_q2 = pre * ipq(n, base - 2.0 / p + 2.0) if _finite("m_q2", dims) else None
    m_g2 = grad_pre * ipq(n, base - 2.0 / p + 3.0) if _finite("m_g2", dims) else None
    m_p0 = m_p0_quadrature(dims, m_p0_spec) if _finite("m_p0", dims) else None
    return MomentSet(dims, m_q0, m_q2, m_g0, m_g2, m_p0)


def m_p0_quadrature(dims: DimParams, spec: QuadSpec = DEFAULT_SPEC) -> float:
    """``∫_{R^n} U^p dx`` by radial quadrature (finite only for ``p^2 < n``)."""
    if not _finite("m_p0", dims):
        raise DivergentIntegralError(
            f"m_p0 diverges for n={dims.n}, p={dims.p} (needs p^2 < n)", name="m_p0"
        )
    p = dims.p
    return integrate_radial(dims.n, lambda r: u_profile(dims, r) ** p, spec, points=(1.0,))


def moments_quadrature(dims: DimParams, spec: QuadSpec = DEFAULT_SPEC) -> MomentSet:
    """All moments by direct radial quadrature of ``U`` and ``|U'|``."""
    p, ps = dims.p, dims.p_star

    def q0(r):
        return u_profile(dims, r) ** ps

    def g0(r):
        return np.abs(u_profile_derivative(dims, r)) ** p

    def rad(name, fn):
        if not _finite(name, dims):
            return None
        return integrate_radial(dims.n, fn, spec, points=(1.0,))

    return MomentSet(
        dims,
        m_q0=rad("m_q0", q0),
        m_q2=rad("m_q2", lambda r: r * r * q0(r)),
        m_g0=rad("m_g0", g0),
        m_g2=rad("m_g2", lambda r: r * r * g0(r)),
        m_p0=rad("m_p0", lambda r: u_profile(dims, r) ** p),
    )


def _core_moments(dims: DimParams) -> tuple[float, float]:
    n, p = dims.n, dims.p
    pre = sphere_area(n) * (p - 1.0) / p
    base = n * (p - 1.0) / p
    m_q0 = pre * ipq(n, base)
    m_g0 = pre * ((n - p) / (p - 1.0)) ** p * ipq(n, base + 1.0)
    return m_q0, m_g0


def k_np(dims: DimParams) -> float:
    """Best Sobolev constant ``K(n, p) = ‖U‖_p* / ‖∇U‖_p`` on R^n."""
    m_q0, m_g0 = _core_moments(dims)
    return m_q0 ** (1.0 / dims.p_star) / m_g0 ** (1.0 / dims.p)


def sobolev_threshold(dims: DimParams) -> float:
    """Compactness level ``(1/n) K(n, p)^(-n)``."""
    return k_np(dims) ** (-dims.n) / dims.n


def normalization_constant(dims: DimParams) -> float:
    """``C = K^(-p) ‖U‖_p*^(-(p*-p))``, so that ``V = C^(1/(p*-p)) U`` solves
    ``-Δ_p V = V^(p*-1)``.
    """
    m_q0, _ = _core_moments(dims)
    ps, p = dims.p_star, dims.p
    return k_np(dims) ** (-p) * m_q0 ** (-(ps - p) / ps)


def d_np(dims: DimParams) -> float:
    """Closed form ``D(n,p) = n/(n-p) * ((n-p) - 2(p-1)) / (n+2)``.

    Raises
    ------
    DivergentIntegralError
        If ``p >= (n+2)/3``, where ``∫|x|^2 |∇U|^p`` diverges.
    """
    n, p = dims.n, dims.p
    if not _finite("m_g2", dims):
        raise DivergentIntegralError(
            f"D(n,p) undefined for n={n}, p={p}: m_g2 needs p < (n+2)/3", name="m_g2"
        )
    return n / (n - p) * ((n - p) - 2.0 * (p - 1.0)) / (n + 2.0)


def d_np_oracle(dims: DimParams, spec: QuadSpec = DEFAULT_SPEC) -> float:
    """``D(n,p) = (m_g0 m_q2) / (m_q0 m_g2)`` with every moment from quadrature."""
    m = moments_quadrature(dims, spec)
    return m.m_g0 * m.require("m_q2") / (m.m_q0 * m.require("m_g2"))


def _phi(t):
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, np.exp(-1.0 / safe), 0.0)


def _dphi(t):
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, np.exp(-1.0 / safe) / (safe * safe), 0.0)


def cutoff_eta(delta: float | None, r):
    """Smooth radial cutoff: 1 on ``[0, δ]``, 0 beyond ``2δ``, decreasing between.

    ``η(r) = φ(2 - r/δ) / (φ(2 - r/δ) + φ(r/δ - 1))`` with ``φ(t) = exp(-1/t)``
    for ``t > 0`` and 0 otherwise.
    """
    r = np.asarray(r, dtype=float)
    if delta is None:
        return np.ones_like(r)
    a = _phi(2.0 - r / delta)
    b = _phi(r / delta - 1.0)
    return a / (a + b)


def cutoff_eta_derivative(delta: float | None, r):
    r = np.asarray(r, dtype=float)
    if delta is None:
        return np.zeros_like(r)
    s, t = 2.0 - r / delta, r / delta - 1.0
    a, b = _phi(s), _phi(t)
    da, db = _dphi(s), _dphi(t)
    return -(da * b + a * db) / (delta * (a + b) ** 2)


def u_eps(bp: BubbleParams, r):
    """Cut-off bubble ``u_ε(r) = ε^(-(n-p)/p) U(r/ε) η(r)``."""
    n, p = bp.dims.n, bp.dims.p
    r = np.asarray(r, dtype=float)
    return bp.eps ** (-(n - p) / p) * u_profile(bp.dims, r / bp.eps) * cutoff_eta(bp.delta, r)


def u_eps_derivative(bp: BubbleParams, r):
    """Radial derivative of ``u_ε``; ``|∇u_ε|`` is its absolute value."""
    n, p = bp.dims.n, bp.dims.p
    r = np.asarray(r, dtype=float)
    s = r / bp.eps
    bump = bp.eps ** (-(n - p) / p) * u_profile(bp.dims, s)
    dbump = bp.eps ** (-n / p) * u_profile_derivative(bp.dims, s)
    return dbump * cutoff_eta(bp.delta, r) + bump * cutoff_eta_derivative(bp.delta, r)


def _v_scale(dims: DimParams) -> float:
    ps, p = dims.p_star, dims.p
    return normalization_constant(dims) ** (1.0 / (ps - p))


def v_eps(bp: BubbleParams, r):
    """Normalized test function ``v_ε = C^(1/(p*-p)) u_ε``."""
    return _v_scale(bp.dims) * u_eps(bp, r)


def v_eps_derivative(bp: BubbleParams, r):
    return _v_scale(bp.dims) * u_eps_derivative(bp, r)


def bubble_breakpoints(bp: BubbleParams, extra: Sequence[float] = (), transition_panels: int = 8) -> list[float]:
    """Radii where the cut-off bubble changes scale, for quadrature splitting.

    Geometric points ``ε 2^k`` resolve the core; the cutoff transition
    ``[δ, 2δ]`` is split into equal panels.
    """
    pts = []
    top = bp.delta if bp.delta is not None else 1e6 * bp.eps
    r = bp.eps / 8.0
    while r < top:
        pts.append(r)
        r *= 2.0
    if bp.delta is not None:
        pts.extend(bp.delta * (1.0 + k / transition_panels) for k in range(transition_panels + 1))
    pts.extend(x for x in extra if x > 0 and x < bp.support_radius)
    return sorted(set(pts))
