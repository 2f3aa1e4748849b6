import math

import numpy as np
import pytest

from besselsq.envelopes import (ANCHORS, ENVELOPES, GUARD, _guard, _qmin, _rho, _sweep, _txy_box,
                                envelope_check, frac_kernel_profile)
from besselsq.fracderiv import frac_deriv_profile, frac_order
from besselsq.poisson import PoissonKernelEval, poisson_kernel

FAST = ("H2", "8prima", "H31", "H43", "H51", "H55/H60", "H59", "H45")


def test_sweeps_are_nested():
    a, b = _sweep(1e-3, 1e3, 25, 0), _sweep(1e-3, 1e3, 25, 1)
    assert b.size == 49
    np.testing.assert_allclose(b[::2], a, rtol=1e-12)


def test_rho_clears_guard():
    for x in ANCHORS:
        y = _rho(x, 0) * x
        assert np.all(_guard(np.zeros_like(y), x, y))
        assert np.any(y < x) and np.any(y > x)
        assert np.min(np.abs(y / x - 1)) == pytest.approx(_qmin(x))


def test_box_respects_guard():
    T, X, Y, S = _txy_box(0)
    assert np.all(T + S + np.abs(X - Y) >= GUARD * (1 + X + Y))


@pytest.mark.parametrize("beta", [0.5, 1.5])
def test_fractional_kernel_dual_route(beta):
    lam, x, y = 1.0, 0.7, 1.9
    tau = np.array([0.05, 0.5, 3.0])
    a = frac_kernel_profile(lam, beta, x, y, tau, vstep=0.05)
    order = frac_order(beta)
    ev = PoissonKernelEval(lam)
    b = [frac_deriv_profile(order, lambda s, t=t: poisson_kernel(ev, t + s, x, y, order.m), t) for t in tau]
    np.testing.assert_allclose(a, b, rtol=1e-6)


def test_integer_order_profile_is_derivative():
    tau = np.array([0.1, 1.0])
    got = frac_kernel_profile(2.0, 1.0, 1.0, 2.0, tau)
    ref = poisson_kernel(PoissonKernelEval(2.0), tau, 1.0, 2.0, 1)
    np.testing.assert_allclose(got.real, ref, rtol=1e-12)


def test_registry_has_every_envelope():
    assert set(FAST) | {"H4", "Kb", "H16"} == set(ENVELOPES)


@pytest.mark.parametrize("name", FAST)
def test_fast_envelopes_are_stable(name):
    r = envelope_check(name, 1.0)
    assert r.passed, (name, r.value)
    for entry in r.values.values():
        assert all(math.isfinite(v) and v > 0 for v in entry["sup"])


def test_unknown_envelope():
    with pytest.raises(KeyError):
        envelope_check("H99", 1.0)
