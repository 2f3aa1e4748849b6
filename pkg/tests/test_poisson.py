import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besselsq.errors import InvalidBoundsError
from besselsq.grids import make_radial_grid, make_time_grid
from besselsq.hankel import make_test_function
from besselsq.poisson import (HeatKernelEval, PoissonKernelEval, closed_form_check, derivative_coefficients,
                              heat_kernel, heat_kernel_dt, maximal_p, poisson_apply, poisson_kernel,
                              poisson_kernel_lam1, poisson_path_check, semigroup_check)

pos = st.floats(1e-2, 1e2)


def test_lam1_reference_value():
    assert poisson_kernel_lam1(1.0, 1.0, 2.0) == pytest.approx(0.12732395447351627, rel=1e-15)
    assert poisson_kernel(PoissonKernelEval(1.0), 1.0, 1.0, 2.0) == pytest.approx(0.12732395447351627, rel=1e-10)


@given(pos, pos, pos)
@settings(max_examples=60, deadline=None)
def test_graded_quadrature_matches_closed_form(t, x, y):
    exact = poisson_kernel_lam1(t, x, y)
    assert poisson_kernel(PoissonKernelEval(1.0), t, x, y) == pytest.approx(exact, rel=1e-8)


@given(pos, pos, pos, st.sampled_from([1.0, 1.5, 2.0, 3.0]))
@settings(max_examples=40, deadline=None)
def test_kernel_symmetry(t, x, y, lam):
    ev = PoissonKernelEval(lam)
    assert poisson_kernel(ev, t, x, y) == pytest.approx(poisson_kernel(ev, t, y, x), rel=1e-10)
    assert poisson_kernel(ev, t, x, y) > 0


def test_rule_method_agrees_away_from_diagonal():
    ev_g, ev_r = PoissonKernelEval(2.0), PoissonKernelEval(2.0, method="rule")
    for t, x, y in ((1.0, 1.0, 3.0), (0.5, 2.0, 0.3), (5.0, 1.0, 1.0)):
        assert poisson_kernel(ev_r, t, x, y) == pytest.approx(poisson_kernel(ev_g, t, x, y), rel=1e-9)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_t_derivatives_by_finite_differences(k):
    ev = PoissonKernelEval(1.0)
    x, y, t, h = 1.3, 0.7, 0.8, 1e-3
    f = lambda s: poisson_kernel_lam1(s, x, y)
    fd = {1: (f(t + h) - f(t - h)) / (2 * h),
          2: (f(t + h) - 2 * f(t) + f(t - h)) / h ** 2,
          3: (f(t + 2 * h) - 2 * f(t + h) + 2 * f(t - h) - f(t - 2 * h)) / (2 * h ** 3)}[k]
    assert poisson_kernel(ev, t, x, y, k) == pytest.approx(fd, rel=1e-4)


def test_derivative_coefficients_k0():
    # d^0: t Q^{-lam-1} needs the single coefficient 1
    assert derivative_coefficients(1.0, 0) == pytest.approx([1.0])


def test_degenerate_point_warns():
    with pytest.warns(RuntimeWarning):
        poisson_kernel(PoissonKernelEval(1.0), 1e-12, 1.0, 1.0)


def test_invalid_inputs():
    with pytest.raises(InvalidBoundsError):
        PoissonKernelEval(0.5)
    with pytest.raises(InvalidBoundsError):
        poisson_kernel(PoissonKernelEval(1.0), 1.0, 1.0, 2.0, k=5)
    with pytest.raises(InvalidBoundsError):
        poisson_apply(PoissonKernelEval(1.0), -1.0, make_test_function("slambda_gauss", make_radial_grid(n=64)))


def _heat_half(t, x, y):
    # lam = 1: I_{1/2}(z) = sqrt(2 / (pi z)) sinh z, sinh expanded to avoid overflow
    d = -math.exp(-(x - y) ** 2 / (4 * t)) * math.expm1(-x * y / t)
    return d / (2 * math.sqrt(math.pi * t))


def test_heat_kernel_reference():
    # (1 - e^{-1}) / (2 sqrt(pi))
    assert heat_kernel(HeatKernelEval(1.0), 1.0, 1.0, 1.0) == pytest.approx(0.17831791741872968, rel=1e-13)


@given(st.floats(1e-2, 1e2), st.floats(1e-2, 10), st.floats(1e-2, 10))
@settings(max_examples=60, deadline=None)
def test_heat_kernel_half_order_closed_form(t, x, y):
    exact = _heat_half(t, x, y)
    if exact < 1e-250:
        return
    assert heat_kernel(HeatKernelEval(1.0), t, x, y) == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("lam", [1.0, 2.5])
def test_heat_dt_finite_difference(lam):
    ev = HeatKernelEval(lam)
    for t, x, y in ((0.5, 1.0, 1.5), (2.0, 0.3, 3.0)):
        h = 1e-5 * t
        fd = (heat_kernel(ev, t + h, x, y) - heat_kernel(ev, t - h, x, y)) / (2 * h)
        assert heat_kernel_dt(ev, t, x, y) == pytest.approx(fd, rel=1e-6)


def test_semigroup_and_paths():
    g = make_radial_grid(n=256)
    r = semigroup_check(1.0, grid=g)
    assert r.passed, r.value
    r = poisson_path_check(2.0, grid=g, tol=1e-3)
    assert r.passed, r.value


def test_closed_form_check_report():
    r = closed_form_check(n=21)
    assert r.passed and r.value < 1e-8


def test_poisson_apply_vector_matches_components():
    g = make_radial_grid(n=128)
    f = make_test_function("slambda_gauss", g, lam=1.0)
    vec = f.with_values(np.stack([f.values, 2j * f.values], axis=1))
    ev = PoissonKernelEval(1.0)
    out = poisson_apply(ev, 0.5, vec).values
    one = poisson_apply(ev, 0.5, f).values
    np.testing.assert_allclose(out[:, 0], one, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(out[:, 1], 2j * one, rtol=1e-12, atol=1e-15)


def test_maximal_function_dominates_each_height():
    g = make_radial_grid(n=128)
    f = make_test_function("indicator", g, interval=[0.0, 1.0])
    ev = PoissonKernelEval(1.0)
    s = make_time_grid(0.01, 10.0, 12)
    M = maximal_p(ev, f, s).values
    for sv in s.points[::4]:
        assert np.all(M >= np.abs(poisson_apply(ev, sv, f).values) - 1e-14)
