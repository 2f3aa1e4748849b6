import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besselsq.errors import GridMismatchError, InvalidBoundsError
from besselsq.grids import (DiscreteH, h_inner, make_radial_grid, make_time_grid, padded_grid,
                            theta_rule)


def test_radial_grid_endpoints_and_spacing():
    g = make_radial_grid(1e-3, 50.0, 512)
    assert g.points[0] == 1e-3 and g.points[-1] == 50.0
    np.testing.assert_allclose(np.diff(g.u), g.h, rtol=1e-10)
    assert not g.points.flags.writeable


@pytest.mark.parametrize("lo, hi, n", [(0.0, 1.0, 32), (2.0, 1.0, 32), (1.0, 2.0, 4), (-1.0, 2.0, 32)])
def test_invalid_bounds(lo, hi, n):
    with pytest.raises(InvalidBoundsError):
        make_radial_grid(lo, hi, n)


def test_radial_integrals():
    g = make_radial_grid(0.5, 2.0, 256)
    assert g.integrate(np.ones(g.n)) == pytest.approx(1.5, rel=1e-9)
    g = make_radial_grid(1.0, 3.0, 256)
    assert g.integrate(g.points) == pytest.approx(4.0, rel=1e-9)


@given(st.integers(0, 4))
@settings(max_examples=5, deadline=None)
def test_radial_moments(k):
    g = make_radial_grid(0.1, 10.0, 4096)
    exact = (10.0 ** (k + 1) - 0.1 ** (k + 1)) / (k + 1)
    assert g.integrate(g.points ** k) == pytest.approx(exact, rel=1e-10)


def test_radial_rule_is_fourth_order():
    errs = [abs(make_radial_grid(0.1, 10.0, n).integrate(make_radial_grid(0.1, 10.0, n).points) / 49.995 - 1)
            for n in (256, 512)]
    assert math.log2(errs[0] / errs[1]) > 3.5


def test_integrate_rejects_wrong_length():
    g = make_radial_grid(n=64)
    with pytest.raises(GridMismatchError):
        g.integrate(np.ones(63))


def test_h_inner_constant():
    t = make_time_grid(1e-2, 1e2, 64)
    assert h_inner(np.ones(64), np.ones(64), t).real == pytest.approx(math.log(1e4), rel=1e-13)
    t = make_time_grid(1.0, 100.0, 64)
    assert DiscreteH(t).norm(np.ones(64)) ** 2 == pytest.approx(math.log(100.0), rel=1e-13)


def test_h_inner_is_sesquilinear():
    t = make_time_grid(m=40)
    rng = np.random.default_rng(1)
    f = rng.normal(size=40) + 1j * rng.normal(size=40)
    g = rng.normal(size=40) + 1j * rng.normal(size=40)
    assert h_inner(2j * f, g, t) == pytest.approx(2j * h_inner(f, g, t))
    assert h_inner(f, 2j * g, t) == pytest.approx(-2j * h_inner(f, g, t))
    assert h_inner(f, g, t) == pytest.approx(np.conj(h_inner(g, f, t)))


def test_h_inner_shape_mismatch():
    t = make_time_grid(m=32)
    with pytest.raises(GridMismatchError):
        h_inner(np.ones(32), np.ones(31), t)


def test_theta_rule_sine_moments():
    r = theta_rule(1.0)
    assert r.integrate(np.sin) == pytest.approx(2.0, rel=1e-14)
    assert r.integrate(lambda th: np.sin(th) ** 3) == pytest.approx(4.0 / 3.0, rel=1e-14)
    with pytest.raises(InvalidBoundsError):
        theta_rule(0.5)
    with pytest.raises(InvalidBoundsError):
        theta_rule(1.0, 8)


def test_padded_grid_contains_original_nodes():
    g = make_radial_grid(1e-3, 50.0, 128)
    big, sl = padded_grid(g, 1.0, 0.5)
    np.testing.assert_allclose(big.points[sl], g.points, rtol=1e-12)
    assert big.x_min < g.x_min / 9 and big.x_max > g.x_max * 3


def test_refined_doubles_nodes():
    g = make_radial_grid(n=100)
    assert g.refined().n == 200
    assert make_time_grid(m=50).refined().m == 100
