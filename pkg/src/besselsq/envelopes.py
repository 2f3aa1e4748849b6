"""Empirical certification of the kernel size estimates.

Each envelope divides a kernel quantity by the shape of its bound and takes
the supremum over a log-uniform parameter box.  Level l uses 2^l times the
sweep density and quadrature resolution of level 0 (sweeps are nested), and
an envelope is certified when the supremum moves by less than 5% from
level 0 to level 1.

Every ratio below is invariant under the dilation (t, x, y) -> (ct, cx, cy)
(c^2 t for the heat kernel), so boxes are swept in the dimensionless
variables y/x and t/x at a few anchors x.  Near the diagonal y/x = 1 +- q
with q log-spaced from the guard boundary, which both levels contain.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from . import _kernels as _k
from .fracderiv import frac_order
from .grids import log_trapezoid_weights
from .poisson import HeatKernelEval, derivative_coefficients, heat_kernel_dt
from .report import Report
from .riesz import ImaginaryPowerEvaluator, hcal_kernel, heat_power_kernel, riesz_kernel

GUARD = 1e-3
H59_C = 1.0 / 8.0


def _sweep(lo: float, hi: float, n0: int, level: int) -> np.ndarray:
    """Nested log-uniform sweep: level l refines level l-1 by midpoints."""
    n = (n0 - 1) * 2 ** level + 1
    return np.geomspace(lo, hi, n)


ANCHORS = (0.1, 1.0, 10.0)


def _qmin(x: float) -> float:
    # smallest |y/x - 1| that clears the guard on both sides of x
    return 1.001 * GUARD * (1.0 + 3.0 * x) / x


def _rho(x: float, level: int, n0: int = 25, qmax: float = 1e3) -> np.ndarray:
    """y/x values on both sides of the diagonal."""
    q0 = _qmin(x)
    minus = 1.0 - _sweep(q0, 0.999, n0, level)
    plus = 1.0 + _sweep(q0, qmax, n0, level)
    return np.concatenate([minus[::-1], plus])


def _guard(t, x, y):
    return t + np.abs(x - y) >= GUARD * (1.0 + x + y)


def _pkernel(lam: float, k: int, t, x, y):
    t, x, y = (np.ascontiguousarray(np.ravel(a), dtype=float) for a in np.broadcast_arrays(t, x, y))
    c = np.array(derivative_coefficients(lam, k))
    return _k.kernel_points(_k.KIND_POISSON, float(lam), int(k), c, t, x, y)


def _dstar(lam: float, t, x, y):
    t, x, y = (np.ascontiguousarray(np.ravel(a), dtype=float) for a in np.broadcast_arrays(t, x, y))
    return _k.kernel_points(_k.KIND_DSTAR, float(lam), 0, np.zeros(1), t, x, y)


def _argmax(ratio: np.ndarray, **coords) -> tuple[float, dict]:
    ratio = np.where(np.isfinite(ratio), ratio, -np.inf)
    j = int(np.argmax(ratio))
    return float(ratio.flat[j]), {k: float(np.ravel(v)[j]) for k, v in coords.items()}


def _txy_box(level: int, n_a: int = 25, n_r: int = 25, a_pow: float = 1.0, extra_a: bool = False):
    """Flattened (t, x, y[, s]) over anchors, t = a x^{a_pow}, y = rho x."""
    out = []
    for x in ANCHORS:
        a = _sweep(1e-3, 1e3, n_a, level)
        rho = _rho(x, level, n_r)
        grids = [a, a, rho] if extra_a else [a, rho]
        mesh = [m.ravel() for m in np.meshgrid(*grids, indexing="ij")]
        scale = x ** a_pow
        if extra_a:
            t, s, r = mesh
            out.append((t * scale, np.full(t.size, x), r * x, s * scale))
        else:
            t, r = mesh
            out.append((t * scale, np.full(t.size, x), r * x, np.zeros(t.size)))
    T, X, Y, S = (np.concatenate(c) for c in zip(*out))
    ok = _guard(T + S, X, Y)
    return T[ok], X[ok], Y[ok], S[ok]


# ---------------------------------------------------------------- pointwise kernels

def env_h2(lam: float, level: int) -> dict:
    """|d_t^k P_t(x, y)| (t + |x - y|)^{2 lam + 1 + k} / (xy)^lam."""
    T, X, Y, _ = _txy_box(level, 49, 49)
    out = {}
    for k in range(3):
        r = np.abs(_pkernel(lam, k, T, X, Y)) * (T + np.abs(X - Y)) ** (2 * lam + 1 + k) / (X * Y) ** lam
        out[f"k={k}"] = _argmax(r, t=T, x=X, y=Y)
    return out


def env_8prima(lam: float, level: int) -> dict:
    """|d_t^k P_{t+s}(x, y)| (t + s + |x - y|)^{k + 1}."""
    T, X, Y, S = _txy_box(level, 25, 25, extra_a=True)
    out = {}
    for k in range(3):
        r = np.abs(_pkernel(lam, k, T + S, X, Y)) * (T + S + np.abs(X - Y)) ** (k + 1)
        out[f"k={k}"] = _argmax(r, t=T, s=S, x=X, y=Y)
    return out


def env_h59(lam: float, level: int) -> dict:
    """|d_t W_t(x, y)| e^{c |x - y|^2 / t} t^{lam + 3/2} / (xy)^lam with c = 1/8."""
    T, X, Y, _ = _txy_box(level, 49, 49, a_pow=2.0)
    undamped = heat_kernel_dt(HeatKernelEval(lam), T, X, Y, damped=False)
    r = np.abs(undamped) * np.exp(-(0.25 - H59_C) * (X - Y) ** 2 / T) * T ** (lam + 1.5) / (X * Y) ** lam
    return {"c=1/8": _argmax(r, t=T, x=X, y=Y)}


def _pairs(level: int, n0: int = 25):
    """(x, y) off the diagonal at every anchor, y/x on both sides of 1."""
    X, Y = [], []
    for x in ANCHORS:
        r = _rho(x, level, n0)
        X.append(np.full(r.size, x))
        Y.append(r * x)
    return np.concatenate(X), np.concatenate(Y)


def _ratio_pairs(level: int, lo: float, hi: float, n0: int = 33):
    """(x, y) with y/x swept over [lo, hi] at every anchor."""
    r = _sweep(lo, hi, n0, level)
    X = np.repeat(np.array(ANCHORS), r.size)
    return X, np.tile(r, len(ANCHORS)) * X


def env_h43(lam: float, level: int) -> dict:
    """|R(y, x)| x^{lam + 2} / y^{lam + 1} for 0 < y < x/2 (y/x up to 1/2)."""
    X, Y = _ratio_pairs(level, 1e-4, 0.5)
    r = np.abs(riesz_kernel(lam, Y, X)) * X ** (lam + 2) / Y ** (lam + 1)
    return {"near-origin": _argmax(r, x=X, y=Y)}


def env_h51(lam: float, level: int) -> dict:
    """|R(y, x)| y^{lam + 1} / x^lam for 0 < 2x < y (y/x from 2)."""
    X, Y = _ratio_pairs(level, 2.0, 1e4)
    r = np.abs(riesz_kernel(lam, Y, X)) * Y ** (lam + 1) / X ** lam
    return {"far-field": _argmax(r, x=X, y=Y)}


def env_h45(lam: float, level: int) -> dict:
    """sup_s |calH(s; x, y)| |x - y|, s = 0 included."""
    X, Y = _pairs(level)
    best = np.zeros(X.size)
    for sv in np.concatenate([[0.0], _sweep(1e-4, 1e3, 29, level)]):
        h = np.abs(hcal_kernel(lam, np.full(X.size, sv * X), X, Y)) if sv else np.abs(hcal_kernel(lam, np.zeros(X.size), X, Y))
        best = np.maximum(best, h)
    return {"sup_s": _argmax(best * np.abs(X - Y), x=X, y=Y)}


def env_h60(lam: float, level: int, gammas=(0.5, 1.0)) -> dict:
    """|K^gamma(x, y)| |x - y|^{2 lam + 1} / (xy)^lam."""
    X, Y = _pairs(level, 13)
    out = {}
    for g in gammas:
        ev = ImaginaryPowerEvaluator(g, lam)
        K = np.array([heat_power_kernel(ev, x, y, step=0.05 / 2 ** level) for x, y in zip(X, Y)])
        r = np.abs(K) * np.abs(X - Y) ** (2 * lam + 1) / (X * Y) ** lam
        out[f"gamma={g:g}"] = _argmax(r, x=X, y=Y)
    return out


# ---------------------------------------------------------------- H-valued columns

def _tau_line(x: float, y: float, per_decade: int) -> np.ndarray:
    d = abs(x - y)
    lo, hi = 1e-4 * min(d, x, y), 1e4 * (x + y)
    n = int(math.ceil(per_decade * math.log10(hi / lo))) + 1
    return np.geomspace(lo, hi, n)


def frac_kernel_profile(lam: float, beta: float, x: float, y: float, tau: np.ndarray,
                        vstep: float = 0.1) -> np.ndarray:
    """d_t^beta P_t(x, y) at every tau (complex).

    With s = tau e^v, int_0^inf F_m(tau + s) s^{alpha - 1} ds = int F_m(tau + s) s^alpha dv;
    the v-line runs from e^{-18} to e^{14} with an exact head and a power-law tail
    F_m(tau + s) ~ s^{-(2 lam + 1 + m)}.
    """
    order = frac_order(beta)
    m = order.m
    if order.is_integer:
        return _pkernel(lam, m, tau, x, y).astype(complex)
    a = order.alpha
    v = np.arange(-18.0, 14.0 + 1e-12, vstep)
    w = np.full(v.size, vstep)
    w[0] = w[-1] = 0.5 * vstep
    S = tau[:, None] * np.exp(v)[None, :]
    F = _pkernel(lam, m, (tau[:, None] + S).ravel(), x, y).reshape(S.shape)
    body = (F * S ** a) @ w
    head = _pkernel(lam, m, tau, x, y) * (tau * math.exp(-18.0)) ** a / a
    p = 2 * lam + 1 + m
    tail = F[:, -1] * S[:, -1] ** a / (p - a)
    return (body + head + tail) * order.phase


def _h_norm_sq(vals: np.ndarray, tau: np.ndarray) -> float:
    h = math.log(tau[1] / tau[0])
    return float(log_trapezoid_weights(tau.size, h) @ (np.abs(vals) ** 2))


def _columns(lam: float, beta: float, level: int):
    """(x, y, tau, t^beta d^beta P_t(x, y)) over the pair sweep."""
    X, Y = _pairs(level, 13)
    pd = 16 * 2 ** level
    for x, y in zip(X, Y):
        tau = _tau_line(x, y, pd)
        K = tau ** beta * frac_kernel_profile(lam, beta, x, y, tau, vstep=0.1 / 2 ** level)
        yield x, y, tau, K


def env_h4_kb(lam: float, level: int, betas=(0.5, 1.0)) -> tuple[dict, dict]:
    """||K^beta(.; x, y)||_H |x - y| and, for |x - y| >= max(x, y)/2,
    ||K^beta(.; x, y)||_H |x - y|^{2 lam + 1} / (xy)^lam."""
    h4, kb = {}, {}
    for b in betas:
        rows = []
        for x, y, tau, K in _columns(lam, b, level):
            rows.append((x, y, math.sqrt(_h_norm_sq(K, tau))))
        X, Y, N = map(np.array, zip(*rows))
        d = np.abs(X - Y)
        h4[f"beta={b:g}"] = _argmax(N * d, x=X, y=Y)
        far = d >= np.maximum(X, Y) / 2
        kb[f"beta={b:g}"] = _argmax(N[far] * d[far] ** (2 * lam + 1) / (X[far] * Y[far]) ** lam,
                                    x=X[far], y=Y[far])
    return h4, kb


def env_h4(lam, level):
    return env_h4_kb(lam, level)[0]


def env_kb(lam, level):
    return env_h4_kb(lam, level)[1]


def env_h16(lam: float, level: int, betas=(0.5, 1.0)) -> dict:
    """sup_s ||t^beta d^beta P_{t+s}(x, y)||_H |x - y|, using
    t^beta (d^beta P)(t + s) = (t / (t + s))^beta K^beta(t + s)."""
    out = {}
    srel = np.concatenate([[0.0], _sweep(1e-3, 1e2, 11, level)])
    for b in betas:
        X, Y, V = [], [], []
        for x, y, tau, K in _columns(lam, b, level):
            lt = np.log(tau)
            spl = CubicSpline(lt, np.abs(K) ** 2)
            h = lt[1] - lt[0]
            w = log_trapezoid_weights(tau.size, h)
            best = 0.0
            for s in srel * x:
                ts = tau + s
                inside = ts <= tau[-1]
                vals = np.zeros(tau.size)
                vals[inside] = np.maximum(spl(np.log(ts[inside])), 0.0) * (tau[inside] / ts[inside]) ** (2 * b)
                best = max(best, float(w @ vals))
            X.append(x), Y.append(y), V.append(math.sqrt(best) * abs(x - y))
        out[f"beta={b:g}"] = _argmax(np.array(V), x=np.array(X), y=np.array(Y))
    return out


def env_h31(lam: float, level: int) -> dict:
    """||M(.; x, y)||_H |x - y| with M(t; x, y) = t D*_x P_t^{lam+1}(x, y)."""
    X, Y = _pairs(level, 13)
    vals = []
    for x, y in zip(X, Y):
        tau = _tau_line(x, y, 16 * 2 ** level)
        vals.append(math.sqrt(_h_norm_sq(tau * _dstar(lam, tau, x, y), tau)) * abs(x - y))
    return {"M": _argmax(np.array(vals), x=X, y=Y)}


# ---------------------------------------------------------------- registry and check

@dataclass(frozen=True)
class Envelope:
    name: str
    bound: str
    evaluate: Callable[[float, int], dict]


ENVELOPES: dict[str, Envelope] = {e.name: e for e in [
    Envelope("H2", "|d^k P_t| <= C (xy)^lam / (t + |x-y|)^{2 lam + 1 + k}", env_h2),
    Envelope("8prima", "|d^k P_{t+s}| <= C / (t + s + |x-y|)^{k + 1}", env_8prima),
    Envelope("H4", "||K^beta(.; x, y)||_H <= C / |x-y|", env_h4),
    Envelope("Kb", "||K^beta(.; x, y)||_H <= C (xy)^lam / |x-y|^{2 lam + 1}, |x-y| >= max/2", env_kb),
    Envelope("H16", "sup_s ||t^beta d^beta P_{t+s}(x, y)||_H <= C / |x-y|", env_h16),
    Envelope("H31", "||t D* P_t^{lam+1}(x, y)||_H <= C / |x-y|", env_h31),
    Envelope("H43", "|R(y, x)| <= C y^{lam + 1} x^{-lam - 2}, y < x/2", env_h43),
    Envelope("H51", "|R(y, x)| <= C x^lam / y^{lam + 1}, 2x < y", env_h51),
    Envelope("H55/H60", "|K^gamma(x, y)| <= C (xy)^lam / |x-y|^{2 lam + 1}", env_h60),
    Envelope("H59", "|d_t W_t| <= C e^{-c|x-y|^2/t} (xy)^lam / t^{lam + 3/2}, c = 1/8", env_h59),
    Envelope("H45", "sup_s |calH(s; x, y)| <= C / |x-y|", env_h45),
]}


def envelope_check(name: str, lam: float, tol: float = 0.05, levels=(0, 1)) -> Report:
    """Supremum at two nested levels; passes when every sub-supremum is
    finite, positive, and moves by less than ``tol`` (relative)."""
    env = ENVELOPES[name]
    t0 = time.perf_counter()
    res = [env.evaluate(lam, lv) for lv in levels]
    values, worst, ok = {}, 0.0, True
    for key in res[0]:
        a, b = res[0][key][0], res[-1][key][0]
        change = abs(b - a) / abs(b) if b else math.inf
        ok &= bool(np.isfinite(a) and np.isfinite(b) and b > 0)
        worst = max(worst, change)
        values[key] = {"sup": [r[key][0] for r in res], "argmax": res[-1][key][1], "change": change}
    return Report("envelopes", f"{name}/lam={lam:g}", {"envelope": name, "bound": env.bound, "lam": lam,
                                                       "levels": list(levels), "guard": GUARD},
                  values, worst, tol, ok and worst < tol, time.perf_counter() - t0, None, worst < tol)
