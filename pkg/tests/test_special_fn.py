import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varcrit.errors import DivergentIntegralError, DomainError
from varcrit.special_fn import (
    DimParams,
    beta,
    gamma,
    ipq,
    ipq_ratio,
    loggamma,
    sobolev_exponent,
    sphere_area,
)


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (5.0, 24.0), (3.5, 3.32335097044784255)])
def test_gamma_values(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-14)


def test_gamma_half_integer_closed_form():
    assert gamma(3.5) == pytest.approx(15 * math.sqrt(math.pi) / 8, rel=1e-14)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=1e-3, max_value=160.0))
def test_gamma_against_mpmath(x):
    assert gamma(x) == pytest.approx(float(mpmath.gamma(x)), rel=2e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e5))
def test_loggamma_against_mpmath(x):
    assert loggamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("bad", [0.0, -1.0, -2.5, math.inf, math.nan])
def test_gamma_rejects_nonpositive(bad):
    with pytest.raises(DomainError):
        gamma(bad)


@pytest.mark.parametrize("x, y, expected", [
    (1.0, 1.0, 1.0),
    (1.0, 2.0, 0.5),
    (2.5, 1.5, math.gamma(2.5) * math.gamma(1.5) / math.gamma(4.0)),
])
def test_beta_values(x, y, expected):
    assert beta(x, y) == pytest.approx(expected, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.01, max_value=200.0), st.floats(min_value=0.01, max_value=200.0))
def test_beta_against_mpmath(x, y):
    assert beta(x, y) == pytest.approx(float(mpmath.beta(x, y)), rel=1e-12)


def test_beta_rejects_nonpositive():
    with pytest.raises(DomainError):
        beta(0.0, 1.0)
    with pytest.raises(DomainError):
        beta(1.0, -3.0)


@pytest.mark.parametrize("p, q, expected", [(3.0, 1.0, 0.5), (4.0, 2.0, 1.0 / 6.0)])
def test_ipq_values(p, q, expected):
    assert ipq(p, q) == pytest.approx(expected, rel=1e-14)


def test_ipq_matches_mpmath_integral():
    for p, q in [(5.0, 3.5), (4.7, 1.3), (9.0, 4.25)]:
        oracle = mpmath.quad(lambda t: t ** (q - 1) / (1 + t) ** p, [0, 1, mpmath.inf])
        assert ipq(p, q) == pytest.approx(float(oracle), rel=1e-12)


@pytest.mark.parametrize("p, q", [(3.0, 3.0), (3.0, 4.0), (3.0, 0.0), (3.0, -1.0)])
def test_ipq_divergent(p, q):
    with pytest.raises(DivergentIntegralError):
        ipq(p, q)


def test_ipq_recurrence(rng):
    for _ in range(100):
        p = rng.uniform(2.5, 12.0)
        q = rng.uniform(0.05, p - 1.05)
        lhs = ipq(p, q + 1)
        rhs = ipq_ratio(p, q) * ipq(p, q)
        assert lhs == pytest.approx(rhs, rel=1e-10)


@pytest.mark.parametrize("n, expected", [
    (1, 2.0),
    (2, 2 * math.pi),
    (3, 4 * math.pi),
    (5, 8 * math.pi**2 / 3),
])
def test_sphere_area(n, expected):
    assert sphere_area(n) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("n", [0, -1, 2.5])
def test_sphere_area_rejects(n):
    with pytest.raises(DomainError):
        sphere_area(n)


def test_dim_params():
    d = DimParams(5, 2.0)
    assert d.p_star == pytest.approx(10.0 / 3.0)
    assert sobolev_exponent(4, 2.0) == pytest.approx(4.0)
    for n, p in [(1, 1.5), (5, 1.0), (5, 5.0), (5, 7.0), (3.5, 2.0)]:
        with pytest.raises(DomainError):
            DimParams(n, p)
