import math

import numpy as np
import pytest

from varcrit.errors import DivergentIntegralError, DomainError
from varcrit.instanton import (
    BubbleParams,
    bubble_breakpoints,
    c_p_threshold,
    cutoff_eta,
    cutoff_eta_derivative,
    d_np,
    d_np_oracle,
    grad_u_eps_magnitude,
    gradient_threshold_radius,
    k_np,
    m_p0_quadrature,
    moments_closed_form,
    moments_quadrature,
    normalization_constant,
    sobolev_threshold,
    u_eps,
    u_eps_derivative,
    u_profile,
    u_profile_derivative,
    v_eps,
    v_eps_derivative,
)
from varcrit.quadrature import integrate_radial
from varcrit.special_fn import DimParams, ipq, sphere_area

D52 = DimParams(5, 2.0)
D42 = DimParams(4, 2.0)


def test_u_profile_values():
    assert u_profile(D42, 0.0) == 1.0
    assert u_profile(D42, 1.0) == pytest.approx(0.5, rel=1e-15)


@pytest.mark.parametrize("n, p", [(4, 2.0), (5, 1.5), (6, 2.5)])
def test_u_profile_tail_power(n, p):
    dims = DimParams(n, p)
    alpha = (n - p) / (p - 1)
    r = np.array([1e4, 1e5])
    assert np.allclose(u_profile(dims, r) * r**alpha, 1.0, rtol=1e-3)


def test_u_profile_derivative_matches_finite_difference():
    dims = DimParams(5, 1.7)
    r = np.linspace(0.1, 5, 17)
    h = 1e-6
    fd = (u_profile(dims, r + h) - u_profile(dims, r - h)) / (2 * h)
    assert np.allclose(u_profile_derivative(dims, r), fd, rtol=1e-7, atol=1e-12)


def test_gradient_magnitude_origin_and_tail():
    bp = BubbleParams(D52, 1.0, None)
    assert grad_u_eps_magnitude(bp, 0.0) == 0.0
    r = 1e4
    tail = (5 - 2) / (2 - 1) * r ** (-(5 - 1) / (2 - 1))
    assert grad_u_eps_magnitude(bp, r) == pytest.approx(tail, rel=1e-3)


@pytest.mark.parametrize("n, p, expected", [(4, 2.0, 2 ** (1 / 3)), (3, 2.0, 1.0)])
def test_c_p_threshold(n, p, expected):
    assert c_p_threshold(DimParams(n, p)) == pytest.approx(expected, rel=1e-15)


def test_gradient_below_one_past_threshold():
    for n in (4, 5):
        dims = DimParams(n, 2.0)
        for k in range(2, 11):
            bp = BubbleParams(dims, 2.0**-k, None)
            r0 = gradient_threshold_radius(bp, 1.01)
            r = r0 * np.geomspace(1.0, 1e4, 4000)
            assert np.all(grad_u_eps_magnitude(bp, r) < 1.0)


def test_moment_closed_forms_n4():
    m = moments_closed_form(D42)
    assert m.m_q0 == pytest.approx(math.pi**2 / 6, rel=1e-14)
    assert m.m_g0 == pytest.approx(4 * math.pi**2 / 3, rel=1e-14)


def test_m_q2_closed_form_n5():
    assert moments_closed_form(D52).m_q2 == pytest.approx(5 * math.pi**3 / 96, rel=1e-14)


def test_frozen_moments_n5_p2():
    m = moments_closed_form(D52)
    assert m.m_q0 == pytest.approx(0.968946146259, rel=1e-11)
    assert m.m_g0 == pytest.approx(14.5341921939, rel=1e-11)
    assert m.m_g2 == pytest.approx(101.739345357, rel=1e-11)
    assert m.m_p0 == pytest.approx(15.5031383401, rel=1e-10)


@pytest.mark.parametrize("n", range(3, 9))
@pytest.mark.parametrize("p", [1.5, 2.0, 2.5])
def test_closed_forms_match_quadrature(n, p):
    if p >= n:
        pytest.skip("p must stay below n")
    dims = DimParams(n, p)
    closed = moments_closed_form(dims).as_dict()
    quad = moments_quadrature(dims).as_dict()
    for name, value in closed.items():
        if value is None:
            assert quad[name] is None
        else:
            assert quad[name] == pytest.approx(value, rel=1e-8), name


def test_m_p0_matches_beta_form():
    for n, p in [(5, 2.0), (4, 1.8), (7, 2.5), (3, 1.5)]:
        dims = DimParams(n, p)
        beta_form = sphere_area(n) * (p - 1) / p * ipq(n - p, n * (p - 1) / p)
        assert m_p0_quadrature(dims) == pytest.approx(beta_form, rel=1e-9)


@pytest.mark.parametrize("dims, name", [
    (DimParams(4, 3.0), "m_p0"),
    (DimParams(4, 2.0), "m_g2"),
    (DimParams(4, 3.5), "m_q2"),
])
def test_divergent_moments_are_named(dims, name):
    m = moments_closed_form(dims)
    assert getattr(m, name) is None
    with pytest.raises(DivergentIntegralError) as info:
        m.require(name)
    assert info.value.name == name
    assert name in str(info.value)


def test_k_np_n4():
    expected = (math.pi**2 / 6) ** 0.25 / (4 * math.pi**2 / 3) ** 0.5
    assert k_np(D42) == pytest.approx(expected, rel=1e-14)


def test_k_np_scale_invariant():
    dims = DimParams(5, 1.8)
    for eps in (0.3, 2.0):
        bp = BubbleParams(dims, eps, None)
        num = integrate_radial(5, lambda r: u_eps(bp, r) ** dims.p_star, points=(eps,))
        den = integrate_radial(5, lambda r: np.abs(u_eps_derivative(bp, r)) ** dims.p, points=(eps,))
        assert num ** (1 / dims.p_star) / den ** (1 / dims.p) == pytest.approx(k_np(dims), rel=1e-8)


def test_threshold_and_normalization():
    assert sobolev_threshold(D52) == pytest.approx(168.872052953, rel=1e-11)
    assert normalization_constant(D52) == pytest.approx(15.0, rel=1e-13)
    m = moments_closed_form(DimParams(6, 2.3))
    assert normalization_constant(DimParams(6, 2.3)) == pytest.approx(m.m_g0 / m.m_q0, rel=1e-13)


@pytest.mark.parametrize("n, p, expected", [(5, 2.0, 5 / 21), (9, 2.0, 45 / 77)])
def test_d_np_values(n, p, expected):
    dims = DimParams(n, p)
    assert d_np(dims) == pytest.approx(expected, rel=1e-14)
    assert d_np_oracle(dims) == pytest.approx(expected, rel=1e-8)


def test_d_np_undefined_past_bound():
    with pytest.raises(DivergentIntegralError):
        d_np(DimParams(4, 2.0))


def test_cutoff_eta():
    r = np.array([0.5, 3.0])
    assert np.array_equal(cutoff_eta(1.0, r), [1.0, 0.0])
    # near the ends η rounds to 0 or 1 in double precision
    mid = np.linspace(1.1, 1.9, 81)
    vals = cutoff_eta(1.0, mid)
    assert np.all((vals > 0) & (vals < 1))
    assert np.all(np.diff(vals) < 0)
    assert np.all(np.diff(cutoff_eta(1.0, np.linspace(1.0, 2.0, 101))) <= 0)
    assert cutoff_eta(0.5, 0.75) == pytest.approx(0.5, rel=1e-15)


def test_cutoff_eta_derivative():
    r = np.linspace(1.05, 1.95, 19)
    h = 1e-6
    fd = (cutoff_eta(1.0, r + h) - cutoff_eta(1.0, r - h)) / (2 * h)
    assert np.allclose(cutoff_eta_derivative(1.0, r), fd, rtol=1e-6, atol=1e-9)
    assert np.all(cutoff_eta_derivative(None, r) == 0)


def test_u_eps_inside_cutoff_is_plain_bubble():
    bp = BubbleParams(D52, 0.1, 1.0)
    r = np.linspace(0, 1.0, 11)
    plain = 0.1 ** (-(5 - 2) / 2) * u_profile(D52, r / 0.1)
    assert np.allclose(u_eps(bp, r), plain, rtol=1e-15)
    assert np.all(u_eps(bp, np.array([2.0, 2.5])) == 0)


def test_v_eps_scaling_and_gradient_energy():
    dims = DimParams(5, 2.0)
    bp = BubbleParams(dims, 0.2, None)
    s = normalization_constant(dims) ** (1 / (dims.p_star - dims.p))
    r = np.linspace(0.0, 3.0, 7)
    assert np.allclose(v_eps(bp, r), s * u_eps(bp, r), rtol=1e-15)
    grad = integrate_radial(5, lambda r: np.abs(v_eps_derivative(bp, r)) ** 2, points=(0.2,))
    assert grad == pytest.approx(k_np(dims) ** -5, rel=1e-9)


def test_bubble_params_validation():
    with pytest.raises(DomainError):
        BubbleParams(D52, 0.0)
    with pytest.raises(DomainError):
        BubbleParams(D52, 0.1, -1.0)
    with pytest.raises(DomainError):
        BubbleParams(D52, 0.1, 1.0, center=(0.0, 0.0))
    assert BubbleParams(D52, 0.1, None).support_radius == math.inf


def test_bubble_breakpoints():
    bp = BubbleParams(D52, 2.0**-6, 1.0)
    pts = bubble_breakpoints(bp, extra=[0.3, 5.0])
    assert pts == sorted(pts)
    assert 0.3 in pts and 5.0 not in pts
    assert pts[0] == pytest.approx(bp.eps / 8)
    assert max(pts) == pytest.approx(2.0)
