import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besselsq.errors import DomainError, PoleError, UnsupportedRangeError
from besselsq.specfun import bessel_i_scaled, bessel_j, gamma


@pytest.mark.parametrize("z, expected", [
    (1.0, 1.0),
    (0.5, math.sqrt(math.pi)),
    (5.0, 24.0),
    (1 - 1j, 0.49801566811835604 + 0.15494982830181069j),
])
def test_gamma_reference_values(z, expected):
    assert abs(gamma(z) - expected) <= 1e-13 * abs(expected)


@given(st.floats(-20, 40), st.floats(-20, 20))
@settings(max_examples=200, deadline=None)
def test_gamma_matches_mpmath(re, im):
    z = complex(re, im)
    if re <= 0.5 and abs(z - round(re)) < 1e-3:
        return
    ref = complex(mpmath.gamma(mpmath.mpc(re, im)))
    assert abs(gamma(z) - ref) <= 1e-11 * abs(ref) + 1e-300


@given(st.floats(0.1, 30), st.floats(-10, 10))
@settings(max_examples=100, deadline=None)
def test_gamma_functional_equation(re, im):
    z = complex(re, im)
    assert abs(gamma(z + 1) - z * gamma(z)) <= 1e-12 * abs(gamma(z + 1))


def test_gamma_reflection_on_critical_line():
    for y in (0.3, 1.0, 4.0):
        z = 0.5 + 1j * y
        assert abs(gamma(z) * gamma(1 - z) - cmath.pi / cmath.sin(cmath.pi * z)) < 1e-12 * abs(gamma(z) * gamma(1 - z))


def test_gamma_array_shape():
    out = gamma(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert out.shape == (2, 2)
    np.testing.assert_allclose(out.real, [[1, 1], [2, 6]], rtol=1e-13)


@pytest.mark.parametrize("z", [0.0, -1.0, -7.0])
def test_gamma_poles(z):
    with pytest.raises(PoleError):
        gamma(z)


@pytest.mark.parametrize("z", [200.0, -60.0, 1 + 80j])
def test_gamma_outside_strip(z):
    with pytest.raises(UnsupportedRangeError):
        gamma(z)


@pytest.mark.parametrize("nu, x, expected", [
    (0.5, 1.0, 0.6713967071418031),
    (1.5, 2.0, 0.4912937786871623),
])
def test_bessel_j_reference(nu, x, expected):
    assert bessel_j(nu, x) == pytest.approx(expected, rel=1e-13)


def test_bessel_j_half_order_closed_form():
    x = np.geomspace(1e-3, 100, 50)
    np.testing.assert_allclose(bessel_j(0.5, x), np.sqrt(2 / (np.pi * x)) * np.sin(x), rtol=1e-10, atol=1e-14)


@given(st.floats(0.0, 5.0), st.floats(0.01, 60.0))
@settings(max_examples=100, deadline=None)
def test_bessel_j_recurrence(nu, x):
    lhs = bessel_j(nu, x) + bessel_j(nu + 2, x)
    rhs = 2 * (nu + 1) / x * bessel_j(nu + 1, x)
    assert abs(lhs - rhs) <= 1e-10 * (abs(lhs) + abs(bessel_j(nu + 1, x)) + 1e-12)


@pytest.mark.parametrize("nu, x, expected", [
    (0.5, 1.0, 0.34495131388824500),
    (1.5, 10.0, 0.11354096377693800),
])
def test_bessel_i_scaled_reference(nu, x, expected):
    assert bessel_i_scaled(nu, x) == pytest.approx(expected, rel=1e-12)


def test_bessel_i_scaled_matches_mpmath_large_argument():
    for nu, x in ((0.5, 500.0), (2.5, 1e4)):
        ref = float(mpmath.besseli(nu, x) * mpmath.exp(-x))
        assert bessel_i_scaled(nu, x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("fn", [bessel_j, bessel_i_scaled])
def test_bessel_domain(fn):
    with pytest.raises(DomainError):
        fn(0.5, -1.0)
    with pytest.raises(DomainError):
        fn(-1.5, 1.0)
