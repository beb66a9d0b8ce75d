import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varcrit.errors import AccuracyError, DomainError
from varcrit.quadrature import (
    QuadSpec,
    gauss_legendre_panels,
    integrate,
    integrate_halfline,
    integrate_quadratic_form,
    integrate_radial,
)


def test_integrate_polynomial_exact():
    res = integrate(lambda x: 3 * x**2, 0.0, 2.0)
    assert res.value == pytest.approx(8.0, rel=1e-15)
    assert res.error <= 1e-10


def test_integrate_reversed_limits_and_breakpoints():
    f = lambda x: np.abs(x - 0.3)
    fwd = integrate(f, 0.0, 1.0, points=[0.3]).value
    assert fwd == pytest.approx(0.5 * (0.09 + 0.49), rel=1e-14)
    assert integrate(f, 1.0, 0.0, points=[0.3]).value == pytest.approx(-fwd, rel=1e-14)


def test_integrate_deterministic():
    f = lambda x: np.sin(30 * x) * np.exp(-x)
    a = integrate(f, 0.0, 10.0)
    b = integrate(f, 0.0, 10.0)
    assert a == b


def test_integrate_infinite_limit_rejected():
    with pytest.raises(DomainError):
        integrate(np.exp, 0.0, math.inf)


def test_accuracy_error_carries_estimate():
    spec = QuadSpec(abs_tol=1e-16, rel_tol=1e-16, max_subdivisions=3)
    with pytest.raises(AccuracyError) as info:
        integrate(lambda x: np.sin(200 * x) ** 2, 0.0, 10.0, spec)
    assert math.isfinite(info.value.estimate)
    assert info.value.error > 0


@pytest.mark.parametrize("f, expected", [
    (lambda t: (1 + t) ** -3, 0.5),
    (lambda t: np.exp(-t), 1.0),
    (lambda t: t * (1 + t * t) ** -2, 0.5),
])
def test_halfline_examples(f, expected):
    res = integrate_halfline(f)
    assert res.value == pytest.approx(expected, rel=1e-10)
    assert res.error < 1e-8


def test_halfline_slow_tail():
    # ∫ (1+r)^-a = 1/(a-1); a barely above 1
    a = 1.333
    val = integrate_halfline(lambda r: (1 + r) ** -a, QuadSpec(rel_tol=1e-10)).value
    assert val == pytest.approx(1 / (a - 1), rel=1e-8)


def test_halfline_truncation_mode():
    spec = QuadSpec(tail_transform=False)
    assert integrate_halfline(lambda t: np.exp(-t), spec).value == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("n, g, expected", [
    (2, lambda r: np.exp(-r * r), math.pi),
    (4, lambda r: (1 + r * r) ** -4, math.pi**2 / 6),
    (5, lambda r: (1 + r * r) ** -5 * r * r, 5 * math.pi**3 / 96),
])
def test_radial_examples(n, g, expected):
    assert integrate_radial(n, g) == pytest.approx(expected, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=1, max_value=9))
def test_radial_gaussian_all_dimensions(n):
    assert integrate_radial(n, lambda r: np.exp(-r * r)) == pytest.approx(math.pi ** (n / 2), rel=1e-12)


def test_gauss_legendre_panels_integrate_polynomials():
    x, w = gauss_legendre_panels([0.0, 0.5, 2.0], 8)
    assert np.dot(w, x**7) == pytest.approx(2.0**8 / 8, rel=1e-14)
    with pytest.raises(DomainError):
        gauss_legendre_panels([0.0, 1.0, 1.0], 4)


def test_quadratic_form_examples():
    g = lambda r: np.exp(-r * r)
    assert integrate_quadratic_form(2, g, [[1, 2], [0, 3]]) == pytest.approx(2 * math.pi, rel=1e-8)
    assert integrate_quadratic_form(2, g, np.eye(2)) == pytest.approx(math.pi, rel=1e-8)
    assert integrate_quadratic_form(3, g, 2 * np.eye(3)) == pytest.approx(3 * math.pi**1.5, rel=1e-8)


def test_quadratic_form_antisymmetric_is_zero(rng):
    g = lambda r: (1 + r * r) ** -6
    for n in (2, 3, 4):
        m = rng.standard_normal((n, n))
        val = integrate_quadratic_form(n, g, m - m.T)
        assert abs(val) < 1e-12


def test_quadratic_form_stack_matches_single(rng):
    g = lambda r: np.exp(-r * r)
    mats = rng.standard_normal((4, 3, 3))
    stacked = integrate_quadratic_form(3, g, mats)
    singles = [integrate_quadratic_form(3, g, m) for m in mats]
    assert np.allclose(stacked, singles, rtol=1e-13, atol=1e-13)


def test_quadratic_form_slow_decay_rejected():
    with pytest.raises(AccuracyError):
        integrate_quadratic_form(2, lambda r: (1 + r * r) ** -2.2, np.eye(2))


def test_quadratic_form_dimension_limits():
    with pytest.raises(DomainError):
        integrate_quadratic_form(5, lambda r: np.exp(-r * r), np.eye(5))
    with pytest.raises(DomainError):
        integrate_quadratic_form(2, lambda r: np.exp(-r * r), np.eye(3))
