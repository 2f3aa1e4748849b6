import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besselsq.errors import InvalidAtomError, InvalidBoundsError
from besselsq.fields import RadialField, relative_deviation
from besselsq.fracderiv import _spectral_g_multiplier, _spectral_time_field, frac_order, g_field
from besselsq.gamma_norm import BanachDescriptor
from besselsq.grids import make_radial_grid, make_time_grid
from besselsq.hankel import indicator_samples, make_test_function
from besselsq.hardy_bmo import (Atom, IntervalFamily, bmoo_log_check, bmoo_norm, bmoo_step_check,
                                default_s_grid, dyadic_family, gamma_maximal_profile, gamma_profile,
                                h1o_atom_check, h1o_norm, make_atomic_sum, shifted_profile)

G = make_radial_grid(1e-3, 50.0, 256)


def test_atom_validation():
    with pytest.raises(InvalidAtomError):
        Atom("Ai", delta=0.0)
    with pytest.raises(InvalidAtomError):
        Atom("Aii", interval=(2.0, 1.0))
    with pytest.raises(InvalidAtomError):
        Atom("Aii", interval=(1.0, 2.0), q=1.0)
    with pytest.raises(InvalidAtomError):
        Atom("Aiii")
    with pytest.raises(InvalidAtomError):
        Atom("Ai", b=(1.0, 1.0), delta=1.0).sample(G)
    with pytest.raises(InvalidAtomError):
        Atom("Aii", interval=(10.0, 80.0)).sample(G)


@pytest.mark.parametrize("q", [2.0, np.inf])
def test_aii_atom_conditions(q):
    lo, hi = 0.5, 1.5
    a = Atom("Aii", b=(0.6, 0.8j), interval=(lo, hi), q=q)
    s = a.sample(G)
    assert np.abs(G.integrate(s)).max() < 1e-12
    col = np.abs(s[:, 0]) / 0.6
    size = col.max() if np.isinf(q) else G.integrate(col ** q) ** (1 / q)
    assert size == pytest.approx((hi - lo) ** (1 / q - 1), rel=1e-10)
    assert np.all(s[(G.points < lo * 0.97) | (G.points > hi * 1.03)] == 0)


def test_aii_custom_profile_and_constant_rejected():
    a = Atom("Aii", interval=(1.0, 2.0), profile=lambda x: x ** 2)
    assert abs(G.integrate(a.sample(G)[:, 0])) < 1e-12
    with pytest.raises(InvalidAtomError):
        Atom("Aii", interval=(1.0, 2.0), profile=lambda x: np.ones_like(x)).sample(G)


def test_atomic_sum_certificate():
    atoms = [Atom("Ai", delta=1.0), Atom("Aii", interval=(1.0, 4.0))]
    s = make_atomic_sum(atoms, [2.0, -1j], G)
    assert s.certificate == pytest.approx(3.0)
    assert s.field.values.shape == (G.n,)
    with pytest.raises(InvalidAtomError):
        make_atomic_sum(atoms, [1.0], G)


def test_h1o_dominates_l1_and_is_homogeneous():
    f = RadialField(G, indicator_samples(G, 0.0, 1.0))
    v = h1o_norm(f, 1.0)
    assert v >= G.integrate(np.abs(f.values)) - 1e-12
    assert h1o_norm(f.with_values(-3j * f.values), 1.0) == pytest.approx(3 * v, rel=1e-12)


def test_h1o_triangle_inequality():
    f = RadialField(G, indicator_samples(G, 0.0, 1.0))
    g = make_test_function("atom_aii", G, interval=[1.0, 3.0])
    s = f.with_values(f.values + g.values)
    assert h1o_norm(s, 2.0) <= h1o_norm(f, 2.0) + h1o_norm(g, 2.0) + 1e-12


def test_bmoo_of_constant():
    f = RadialField(G, np.full(G.n, 2.5))
    res = bmoo_norm(f, detail=True)
    assert res.bi == pytest.approx(2.5, rel=1e-12)
    assert res.bii < 1e-12
    assert res.value == pytest.approx(2.5)


@given(st.floats(0.1, 10.0))
@settings(max_examples=10, deadline=None)
def test_bmoo_homogeneous(c):
    f = make_test_function("atom_aii", G, interval=[0.5, 2.0])
    assert bmoo_norm(f.with_values(c * f.values)) == pytest.approx(c * bmoo_norm(f), rel=1e-12)


def test_bmoo_averages_of_log_grow():
    g = make_radial_grid(1e-5, 50.0, 512)
    fam = IntervalFamily(tuple(2.0 ** -k for k in range(1, 8)), ())
    res = bmoo_norm(RadialField(g, np.log(g.points)), fam, detail=True)
    assert np.all(np.diff(res.bi_terms) > 0)


def test_family_bounds():
    fam = dyadic_family(G)
    assert all(G.x_min < r <= G.x_max for r in fam.zero_based)
    with pytest.raises(InvalidBoundsError):
        IntervalFamily((100.0,), ()).check(G)


def test_shifted_profile_is_semigroup_shift():
    f = make_test_function("slambda_gauss", G, lam=1.0)
    tg = make_time_grid(1e-3, 50.0, 128)
    s = 0.4
    for beta in (0.5, 1.0):
        F = g_field(f, 1.0, beta, tg, "spectral")
        # G^beta(P_s f) as a single multiplier on h_lam f
        mult = _spectral_g_multiplier(frac_order(beta), tg.points, G.points) * np.exp(-s * G.points)[None, :]
        ref = _spectral_time_field(f, 1.0, 1.0, mult)
        got = shifted_profile(F, s)[..., 0]
        inside = tg.points + s <= tg.t_max
        err = np.linalg.norm((got - ref)[inside]) / np.linalg.norm(ref[inside])
        assert err < 1e-5


def test_gamma_maximal_dominates_profile():
    f = make_test_function("slambda_gauss", G, lam=1.0)
    F = g_field(f, 1.0, 1.0, make_time_grid(1e-3, 50.0, 64))
    base = gamma_profile(F)
    best = gamma_maximal_profile(F, None, default_s_grid(G, 2))
    assert np.all(best >= base - 1e-14)
    assert h1o_norm(F, 1.0, default_s_grid(G, 2)) == pytest.approx(G.integrate(best))


def test_vector_bmo_uses_banach_norm():
    b = np.array([1.0, 0.0])
    f = RadialField(G, np.outer(indicator_samples(G, 0.0, 1.0), b))
    B = BanachDescriptor(4, 2)
    assert bmoo_norm(f, B=B) == pytest.approx(bmoo_norm(f.with_values(f.values[:, 0])), rel=1e-12)


def test_calibration_reports():
    assert bmoo_log_check(kmax=8, n=512).passed
    assert bmoo_step_check(sizes=(256, 512)).passed


@pytest.mark.slow
def test_h1o_atom_report():
    r = h1o_atom_check()
    assert r.passed and r.stable
