import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group

from besselsq.errors import DimensionMismatchError, GridMismatchError, InvalidBoundsError
from besselsq.fields import SpaceTimeField
from besselsq.gamma_norm import (BanachDescriptor, DiscreteHOperator, batch_gamma_norms, covariance_factor,
                                 field_to_operator, gamma_field_norms, gamma_mc_check, gamma_norm,
                                 gamma_profile_norms, gamma_scalar_check, stream, stream_seed, x_streams)
from besselsq.grids import DiscreteH, make_radial_grid, make_time_grid


def _op(n, m, seed=3):
    rng = np.random.default_rng(seed)
    return DiscreteHOperator(rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m)))


def test_identity_operator_p2():
    assert gamma_norm(DiscreteHOperator(np.eye(2)), BanachDescriptor(2, 2)).value == pytest.approx(math.sqrt(2))


def test_rank_one_operator_is_norm_product():
    # T h = <h, e> b: Tg = g_1 b, so ||T||_gamma = ||b||_p E|g|^2 ^(1/2) = ||b||_p
    b = np.array([1.0, -2.0, 0.5j])
    M = np.zeros((3, 5), dtype=complex)
    M[:, 0] = b
    for p in (1.5, 3.0, np.inf):
        B = BanachDescriptor(p, 3)
        est = gamma_norm(DiscreteHOperator(M), B, samples=20000, seed=1)
        assert est.value == pytest.approx(B.norm(b), rel=4 * est.std_error / est.value + 1e-12)


def test_rank_one_exact_in_law_with_covariance_factor():
    b = np.array([1.0, -2.0, 0.5j])
    W = np.zeros((1, 5, 3), dtype=complex)
    W[0, 0] = b
    z = x_streams(0, 1, 3, 4000)
    B = BanachDescriptor(4, 3)
    v, se = batch_gamma_norms(W, B, z, return_se=True)
    assert v[0] == pytest.approx(B.norm(b), abs=4 * se[0])


def test_basis_invariance():
    T = _op(3, 6)
    Q = ortho_group.rvs(6, random_state=0)
    B = BanachDescriptor(3, 3)
    z = x_streams(7, 1, 3, 2000)
    W1 = T.matrix.T[None]
    W2 = (T.matrix @ Q).T[None]
    # same law, so the covariance factors agree up to rotation and give the same estimate on shared draws
    a = batch_gamma_norms(W1, B, z)[0]
    b = batch_gamma_norms(W2, B, z)[0]
    assert a == pytest.approx(b, rel=1e-10)
    assert gamma_norm(T, BanachDescriptor(2, 3)).value == pytest.approx(
        gamma_norm(DiscreteHOperator(T.matrix @ Q), BanachDescriptor(2, 3)).value, rel=1e-12)


@given(st.floats(-5, 5), st.floats(-5, 5), st.sampled_from([1.5, 2.0, 4.0]))
@settings(max_examples=30, deadline=None)
def test_homogeneity(re, im, p):
    c = complex(re, im)
    if abs(c) < 1e-100:
        return
    T = _op(3, 8)
    B = BanachDescriptor(p, 3)
    a = gamma_norm(DiscreteHOperator(c * T.matrix), B, 200, seed=5).value
    b = gamma_norm(T, B, 200, seed=5).value
    assert a == pytest.approx(abs(c) * b, rel=1e-10, abs=1e-300)


def test_zero_column_does_not_change_norm():
    T = _op(3, 6)
    Z = np.concatenate([T.matrix, np.zeros((3, 1))], axis=1)
    assert gamma_norm(DiscreteHOperator(Z), BanachDescriptor(2, 3)).value == pytest.approx(
        gamma_norm(T, BanachDescriptor(2, 3)).value)


def test_mc_agrees_with_exact_p2():
    T = _op(4, 20)
    B = BanachDescriptor(2, 4)
    exact = gamma_norm(T, B).value
    est = gamma_norm(T, B, 5000, seed=11, method="mc")
    assert not est.exact and est.samples == 5000
    assert abs(est.value - exact) <= 4 * est.std_error


def test_mc_is_deterministic_per_seed():
    T = _op(3, 10)
    B = BanachDescriptor(3, 3)
    assert gamma_norm(T, B, 300, seed=4).value == gamma_norm(T, B, 300, seed=4).value
    assert gamma_norm(T, B, 300, seed=4).value != gamma_norm(T, B, 300, seed=5).value


def test_n1_is_h_norm_for_every_p():
    T = _op(1, 12)
    h = float(np.linalg.norm(T.matrix))
    for p in (1.0, 1.5, 3.0, np.inf):
        assert gamma_norm(T, BanachDescriptor(p, 1)).value == pytest.approx(h, rel=1e-13)


def test_covariance_factor_reproduces_covariance():
    rng = np.random.default_rng(0)
    W = rng.normal(size=(7, 3)) + 1j * rng.normal(size=(7, 3))
    L = covariance_factor(W)
    R = np.concatenate([W.real, W.imag], axis=1)
    np.testing.assert_allclose(L @ L.T, R.T @ R, atol=1e-10)


def test_profile_norms_keyed_by_x_index():
    tg = make_time_grid(m=16)
    rng = np.random.default_rng(2)
    V = rng.normal(size=(16, 5, 3)) + 1j * rng.normal(size=(16, 5, 3))
    B = BanachDescriptor(4, 3)
    full = gamma_profile_norms(V, tg.logweights, B, 200, seed=9)
    np.testing.assert_array_equal(full, gamma_profile_norms(V, tg.logweights, B, 200, seed=9))
    # x-index 0 alone sees the same stream as in the full batch
    first = gamma_profile_norms(V[:, :1], tg.logweights, B, 200, seed=9)
    assert first[0] == pytest.approx(full[0], rel=1e-12)


def test_field_norms_and_operator():
    tg = make_time_grid(m=16)
    xg = make_radial_grid(n=8)
    F = SpaceTimeField(tg, xg, np.ones((16, 8, 2)))
    out = gamma_field_norms(F, BanachDescriptor(2, 2))
    np.testing.assert_allclose(out.values, math.sqrt(2 * tg.logweights.sum()))
    T = field_to_operator(np.ones((16, 2)), DiscreteH(tg))
    assert T.shape == (2, 16)
    with pytest.raises(GridMismatchError):
        field_to_operator(np.ones((15, 2)), DiscreteH(tg))


def test_errors():
    with pytest.raises(InvalidBoundsError):
        BanachDescriptor(0.5, 2)
    with pytest.raises(DimensionMismatchError):
        gamma_norm(_op(3, 4), BanachDescriptor(2, 2))
    with pytest.raises(InvalidBoundsError):
        gamma_norm(_op(3, 4), BanachDescriptor(3, 3), samples=10)
    with pytest.raises(InvalidBoundsError):
        gamma_norm(_op(3, 4), BanachDescriptor(3, 3), method="exact")
    with pytest.raises(ValueError):
        gamma_norm(DiscreteHOperator(np.full((2, 2), np.nan)), BanachDescriptor(2, 2))


def test_streams_are_independent_and_reproducible():
    a = stream(1, 0).standard_normal(5)
    np.testing.assert_array_equal(a, stream(1, 0).standard_normal(5))
    assert not np.allclose(a, stream(1, 1).standard_normal(5))
    assert stream_seed(0, 1) != stream_seed(0, 2)


def test_coverage_check_small():
    r = gamma_mc_check(trials=40, samples=400)
    assert 0.0 <= r.value <= 1.0
    assert r.values["exact"] > 0
    assert abs(r.values["z_mean"]) < 1.0


def test_scalar_check():
    tg = make_time_grid(m=32)
    prof = np.exp(-np.log(tg.points) ** 2) * (1 + 1j)
    r = gamma_scalar_check(prof, tg.logweights)
    assert r.passed and r.value < 1e-12
