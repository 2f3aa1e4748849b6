"""Compiled kernel evaluation and near-singular kernel application.

All Poisson-type kernels share the theta-integral form

    int_0^pi sin^e(th) Q^{-p} [poly(Q) + clin * ((x - y) + y (1 - cos th))] dth,
    Q = A + B (1 - cos th),

with a complex pole near th = i*delta, delta = sqrt(A / (xy)).  The integral
is evaluated on a fixed geometric ladder of Gauss-Legendre panels whose
first panel is matched to delta, so accuracy is uniform up to the diagonal.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

KIND_POISSON = 0  # d^k/dt^k P_t^lam
KIND_DSTAR = 1  # D*_x P_t^{lam+1}
KIND_RIESZ = 2  # int_0^inf D_x P_t^lam dt
KIND_HCAL = 3  # -int_s^inf D*_x P_tau^{lam+1} dtau

_Q = 16
_LEVELS = 40
_LOG3 = math.log(3.0)


def _ladder_tables():
    z, w = np.polynomial.legendre.leggauss(_Q)
    V = np.empty((2, _LEVELS, _Q))
    S = np.empty((2, _LEVELS, _Q))
    Wt = np.empty((2, _LEVELS, _Q))
    for j in range(_LEVELS):
        b_hi = math.pi * 3.0 ** (-j)
        for kind, (lo, hi) in enumerate(((0.0, b_hi), (b_hi / 3.0, b_hi))):
            th = 0.5 * (hi - lo) * (z + 1.0) + lo
            V[kind, j] = 2.0 * np.sin(0.5 * th) ** 2
            S[kind, j] = np.sin(th)
            Wt[kind, j] = 0.5 * (hi - lo) * w
    return V, S, Wt


_TV, _TS, _TW = _ladder_tables()

_GL8_Z, _GL8_W = np.polynomial.legendre.leggauss(8)
_GL5_Z, _GL5_W = np.polynomial.legendre.leggauss(5)
_GL12_Z, _GL12_W = np.polynomial.legendre.leggauss(12)


@njit(cache=True)
def _start_level(delta):
    if 2.0 * delta >= math.pi:
        return 0
    J = int(math.ceil(math.log(math.pi / (2.0 * delta)) / _LOG3))
    if J > _LEVELS - 1:
        J = _LEVELS - 1
    return J


@njit(cache=True)
def theta_integral(A, B, d, y, delta, e, ei, p, pint, poly, npoly, clin):
    J = _start_level(delta)
    acc = 0.0
    for lev in range(J, -1, -1):
        kind = 0 if lev == J else 1
        for q in range(_Q):
            v = _TV[kind, lev, q]
            s = _TS[kind, lev, q]
            Q = A + B * v
            if ei >= 0:
                sp = s ** ei
            else:
                sp = s ** e
            if pint >= 0:
                qp = (1.0 / Q) ** pint
            else:
                qp = Q ** (-p)
            pv = 0.0
            for l in range(npoly - 1, -1, -1):
                pv = pv * Q + poly[l]
            if clin != 0.0:
                pv += clin * (d + y * v)
            acc += _TW[kind, lev, q] * sp * qp * pv
    return acc


@njit(cache=True)
def _as_int(v):
    r = round(v)
    if abs(v - r) < 1e-13:
        return int(r)
    return -1


@njit(cache=True)
def kernel_value(kind, lam, k, coef, tau, x, y):
    """Kernel of the given family at (tau, x, y); tau is t for kinds 0/1, s for 3."""
    d = x - y
    xy = x * y
    poly = np.zeros(4)
    if kind == KIND_POISSON:
        A = tau * tau + d * d
        npoly = coef.size
        for l in range(npoly):
            poly[l] = coef[l] * tau ** (k + 1 - 2 * l)
        e = 2.0 * lam - 1.0
        p = lam + 1.0 + k
        clin = 0.0
        pref = 2.0 * lam * xy ** lam / math.pi
    elif kind == KIND_DSTAR:
        A = tau * tau + d * d
        npoly = 2
        poly[1] = (2.0 * lam + 1.0) * x ** lam
        clin = -2.0 * (lam + 2.0) * x ** (lam + 1.0)
        e = 2.0 * lam + 1.0
        p = lam + 3.0
        pref = -2.0 * (lam + 1.0) / math.pi * tau * y ** (lam + 1.0)
    elif kind == KIND_RIESZ:
        A = d * d
        npoly = 0
        clin = 1.0
        e = 2.0 * lam - 1.0
        p = lam + 1.0
        pref = -2.0 * lam * xy ** lam / math.pi
    else:
        A = tau * tau + d * d
        npoly = 2
        poly[1] = (2.0 * lam + 1.0) * x ** lam
        clin = -2.0 * (lam + 1.0) * x ** (lam + 1.0)
        e = 2.0 * lam + 1.0
        p = lam + 2.0
        pref = y ** (lam + 1.0) / math.pi
    delta = math.sqrt(A / xy)
    I = theta_integral(A, 2.0 * xy, d, y, delta, e, _as_int(e), p, _as_int(p), poly, npoly, clin)
    return pref * I


@njit(cache=True)
def kernel_points(kind, lam, k, coef, tau, x, y):
    """Elementwise kernel_value over equally shaped 1-D arrays."""
    out = np.empty(x.size)
    for i in range(x.size):
        out[i] = kernel_value(kind, lam, k, coef, tau[i], x[i], y[i])
    return out


@njit(cache=True)
def _lagrange4(xi):
    # cubic Lagrange basis on local nodes -1, 0, 1, 2
    l0 = -xi * (xi - 1.0) * (xi - 2.0) / 6.0
    l1 = (xi + 1.0) * (xi - 1.0) * (xi - 2.0) / 2.0
    l2 = -(xi + 1.0) * xi * (xi - 2.0) / 2.0
    l3 = (xi + 1.0) * xi * (xi - 1.0) / 6.0
    return l0, l1, l2, l3


@njit(cache=True)
def _window_node(kind, lam, k, coef, tau, xi_pt, uq, wq, u, h, s0, F, acc):
    yq = math.exp(uq)
    K = kernel_value(kind, lam, k, coef, tau, xi_pt, yq) * wq * yq
    loc = (uq - u[s0]) / h - 1.0
    l0, l1, l2, l3 = _lagrange4(loc)
    for c in range(F.shape[1]):
        acc[c] += K * (l0 * F[s0, c] + l1 * F[s0 + 1, c] + l2 * F[s0 + 2, c] + l3 * F[s0 + 3, c])


@njit(cache=True)
def apply_stack(kind, lam, k, coef, taus, u, x, w, h, F, W, out):
    """out[it, i, :] = int K(taus[it]; x_i, y) F(y) dy over the grid span.

    Far from x_i the grid rule w is used; on a window of W cells each side
    the kernel is integrated exactly against the cubic interpolant of F in
    log y, with geometric grading toward x_i in the two adjacent cells.
    """
    n = x.size
    nc = F.shape[1]
    acc = np.zeros(nc, dtype=F.dtype)
    for it in range(taus.size):
        tau = taus[it]
        for i in range(n):
            xi_pt = x[i]
            a = i - W
            if a < 6:
                a = 0
            b = i + W
            if b > n - 7:
                b = n - 1
            for c in range(nc):
                acc[c] = 0.0
            # outer pieces, Gregory-closed at the window junctions
            for kk in range(0, a + 1):
                wk = w[kk]
                if kk == a:
                    wk = 0.375 * h * x[kk]
                elif kk == a - 1:
                    wk += h * x[kk] / 6.0
                elif kk == a - 2:
                    wk -= h * x[kk] / 24.0
                if a == 0:
                    break
                K = kernel_value(kind, lam, k, coef, tau, xi_pt, x[kk]) * wk
                for c in range(nc):
                    acc[c] += K * F[kk, c]
            for kk in range(b, n):
                if b == n - 1:
                    break
                wk = w[kk]
                if kk == b:
                    wk = 0.375 * h * x[kk]
                elif kk == b + 1:
                    wk += h * x[kk] / 6.0
                elif kk == b + 2:
                    wk -= h * x[kk] / 24.0
                K = kernel_value(kind, lam, k, coef, tau, xi_pt, x[kk]) * wk
                for c in range(nc):
                    acc[c] += K * F[kk, c]
            # window cells
            sig = tau / xi_pt
            for j in range(a, b):
                s0 = j - 1
                if s0 < 0:
                    s0 = 0
                if s0 > n - 4:
                    s0 = n - 4
                if j == i or j == i - 1:
                    sgn = 1.0 if j == i else -1.0
                    if 2.0 * sig >= h:
                        J = 0
                    else:
                        J = int(math.ceil(math.log(h / (2.0 * sig)) / _LOG3))
                        if J > 40:
                            J = 40
                    for lev in range(J, -1, -1):
                        hi = h * 3.0 ** (-lev)
                        lo = 0.0 if lev == J else hi / 3.0
                        half = 0.5 * (hi - lo)
                        for q in range(_GL12_Z.size):
                            dd = half * (_GL12_Z[q] + 1.0) + lo
                            _window_node(kind, lam, k, coef, tau, xi_pt, u[i] + sgn * dd,
                                         half * _GL12_W[q], u, h, s0, F, acc)
                elif j >= i - 4 and j <= i + 3:
                    half = 0.5 * h
                    for q in range(_GL8_Z.size):
                        uq = u[j] + half * (_GL8_Z[q] + 1.0)
                        _window_node(kind, lam, k, coef, tau, xi_pt, uq, half * _GL8_W[q],
                                     u, h, s0, F, acc)
                else:
                    half = 0.5 * h
                    for q in range(_GL5_Z.size):
                        uq = u[j] + half * (_GL5_Z[q] + 1.0)
                        _window_node(kind, lam, k, coef, tau, xi_pt, uq, half * _GL5_W[q],
                                     u, h, s0, F, acc)
            for c in range(nc):
                out[it, i, c] = acc[c]
    return out
