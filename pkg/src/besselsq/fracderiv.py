"""Segovia-Wheeden fractional derivatives and the square-function fields
G^{lam,beta}(f)(t, x) = t^beta d_t^beta P_t^lam f(x) and
calG^lam(f)(t, x) = t D*_lam P_t^{lam+1} f(x)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from . import _kernels as _k
from .errors import InvalidBoundsError, TailTooLargeError
from .fields import GCurlField, RadialField, SquareFunctionField, as_field
from .grids import TimeGrid, h_inner, make_time_grid
from .hankel import SPECTRAL_OVERSAMPLE, cached_hankel
from .poisson import kernel_stack
from .specfun import gamma

_INT_TOL = 1e-12


@dataclass(frozen=True)
class FracOrder:
    """beta > 0 with m - 1 <= beta < m; integer beta uses d^beta = d^m directly."""

    beta: float

    def __post_init__(self):
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise InvalidBoundsError("fractional order must be positive and finite")

    @property
    def is_integer(self) -> bool:
        return abs(self.beta - round(self.beta)) < _INT_TOL

    @property
    def m(self) -> int:
        return int(round(self.beta)) if self.is_integer else int(math.floor(self.beta)) + 1

    @property
    def alpha(self) -> float:
        """m - beta, the exponent of s in the Segovia-Wheeden weight (0 for integers)."""
        return 0.0 if self.is_integer else self.m - self.beta

    @property
    def phase(self) -> complex:
        if self.is_integer:
            return 1.0 + 0.0j
        return complex(np.exp(-1j * np.pi * self.alpha) / gamma(self.alpha))


def frac_order(beta: float) -> FracOrder:
    return FracOrder(float(beta))


def frac_deriv_profile(order: FracOrder, profile_m: Callable[[np.ndarray], np.ndarray], t: float,
                       s_max: float | None = None, step: float = 0.05, tail_tol: float = 1e-6) -> complex:
    """d_t^beta F(t) from s -> d^m F(t + s).

    The weight s^{m-beta-1} ds is s^{m-beta} d(log s); the integral is a
    trapezoid on a log-uniform s grid (spacing ``step``) from s_lo to s_max,
    plus the exact contribution of [0, s_lo] at frozen integrand.
    The tail beyond s_max is estimated from the change between s_max/10 and
    s_max; an estimate above ``tail_tol`` times the value raises.
    """
    if order.is_integer:
        return complex(np.asarray(profile_m(np.array([0.0])))[0])
    a = order.alpha
    scale = max(t, 1.0)
    s_lo = 1e-10 * min(t, 1.0)
    s_max = 1e6 * scale if s_max is None else float(s_max)
    l_lo, l_hi = math.log(s_lo), math.log(s_max)
    nq = int(math.ceil((l_hi - l_lo) / step)) + 1
    ls = np.linspace(l_lo, l_hi, nq)
    dw = ls[1] - ls[0]
    s = np.exp(ls)
    vals = np.asarray(profile_m(s), dtype=complex)
    integrand = vals * s ** a
    cum = np.concatenate(([0.0], np.cumsum(0.5 * dw * (integrand[1:] + integrand[:-1]))))
    head = complex(np.asarray(profile_m(np.array([0.0])))[0]) * s_lo ** a / a
    total = head + cum[-1]
    i_cut = np.searchsorted(s, s_max / 10.0)
    tail = abs(cum[-1] - cum[i_cut])
    value = order.phase * total
    if tail > tail_tol * max(abs(total), 1e-300):
        raise TailTooLargeError(f"tail estimate {tail:.3e} exceeds {tail_tol:g} of the value {abs(total):.3e}")
    return complex(value)


def tau_nodes(t_min: float, t_max: float, per_decade: int = 24, extend: float = 1e3) -> np.ndarray:
    """Log-uniform nodes on [t_min, extend * t_max] for time stacks."""
    lo, hi = math.log10(t_min), math.log10(extend * t_max)
    n = int(math.ceil((hi - lo) * per_decade)) + 1
    return np.logspace(lo, hi, n)


def _spline_basis(tau: np.ndarray, pts: np.ndarray, scale_pow: float) -> np.ndarray:
    """Matrix B with B @ V ~ V(pts) for samples V on tau (spline of tau^p V in log tau)."""
    B = CubicSpline(np.log(tau), np.eye(tau.size))(np.log(pts))
    return B * (tau[None, :] / pts[:, None]) ** scale_pow


def frac_matrix(tau: np.ndarray, t_eval, order: FracOrder, p_tail: float,
                step: float = 0.1) -> tuple[np.ndarray, np.ndarray]:
    """Linear map from samples of d^m F on ``tau`` to t^beta d^beta F(t_eval).

    Returns (A, A_tail) where A already includes the power-law tail beyond
    tau[-1] (decay exponent ``p_tail``) and A_tail is that tail part alone.
    """
    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    m = order.m
    sp = m + 1.0
    if np.any(t_eval < tau[0] * (1 - 1e-12)) or np.any(t_eval > tau[-1]):
        raise InvalidBoundsError("evaluation times must lie inside the tau nodes")
    if order.is_integer:
        A = _spline_basis(tau, t_eval, sp) * (t_eval ** m)[:, None]
        return A.astype(complex), np.zeros_like(A, dtype=complex)
    a = order.alpha
    N = tau.size
    A = np.zeros((t_eval.size, N), dtype=complex)
    A_tail = np.zeros_like(A)
    tmax = tau[-1]
    for i, t in enumerate(t_eval):
        s_lo = 1e-8 * t
        s_hi = tmax - t
        if s_hi <= s_lo:
            # t at the end of the stack: only the tail survives
            row = np.zeros(N)
        else:
            nq = int(math.ceil((math.log(s_hi) - math.log(s_lo)) / step)) + 1
            ls = np.linspace(math.log(s_lo), math.log(s_hi), nq)
            dl = ls[1] - ls[0]
            s = np.exp(ls)
            wq = dl * s ** a
            wq[0] *= 0.5
            wq[-1] *= 0.5
            pts = np.minimum(t + s, tmax)
            row = wq @ _spline_basis(tau, pts, sp)
            row += _spline_basis(tau, np.array([t]), sp)[0] * s_lo ** a / a
        # tail: F(tau) ~ F(tmax) (tau/tmax)^{-p}, s^{a-1} ~ tau^{a-1}
        tail = np.zeros(N)
        tail[-1] = tmax ** a / (p_tail - a)
        A[i] = row + tail
        A_tail[i] = tail
    fac = (order.phase * t_eval ** order.beta)[:, None]
    return A * fac, A_tail * fac


def _spectral_g_multiplier(order: FracOrder, t: np.ndarray, y: np.ndarray) -> np.ndarray:
    ty = np.outer(t, y)
    return np.exp(1j * np.pi * order.beta) * ty ** order.beta * np.exp(-ty)


def _spectral_time_field(f: RadialField, lam_in: float, lam_out: float, mult: np.ndarray) -> np.ndarray:
    """h_{lam_out}(mult(t, y) h_{lam_in} f) for every t; returns (m, n[, d])."""
    Hin = cached_hankel(float(lam_in), f.grid, SPECTRAL_OVERSAMPLE).matrix
    Hout = cached_hankel(float(lam_out), f.grid, SPECTRAL_OVERSAMPLE).matrix
    hf = Hin @ f.values
    if hf.ndim == 1:
        return (mult * hf[None, :]) @ Hout.T
    return np.einsum("ik,jk,kd->jid", Hout, mult, hf, optimize=True)


class TimeStack:
    """Samples of a time-dependent radial field on log-uniform tau nodes.

    ``kind`` selects the kernel family (see :mod:`besselsq._kernels`); the
    stack is built once and re-evaluated at arbitrary times by spline or by
    the fractional-integral map.
    """

    def __init__(self, f: RadialField, lam: float, kind: int, k: int, tau: np.ndarray):
        self.f = f
        self.lam = float(lam)
        self.kind = kind
        self.k = int(k)
        self.tau = np.asarray(tau, dtype=float)
        self.values = kernel_stack(kind, lam, k, self.tau, f)

    def _apply(self, A: np.ndarray) -> np.ndarray:
        return np.tensordot(A, self.values, axes=(1, 0))

    def g_values(self, order: FracOrder, t_eval) -> tuple[np.ndarray, float]:
        """t^beta d^beta P_t f at t_eval; the stack must hold d^m P (kind 0, k=m)."""
        if self.kind != _k.KIND_POISSON or self.k != order.m:
            raise InvalidBoundsError("stack does not hold the m-th Poisson derivative")
        A, A_tail = frac_matrix(self.tau, t_eval, order, p_tail=2 * self.lam + 1 + order.m)
        G = self._apply(A)
        tail = self._apply(A_tail) if np.any(A_tail) else np.zeros(1)
        gmax = np.max(np.abs(G))
        return G, float(np.max(np.abs(tail)) / gmax) if gmax > 0 else 0.0

    def gcurl_values(self, t_eval) -> np.ndarray:
        if self.kind != _k.KIND_DSTAR:
            raise InvalidBoundsError("stack does not hold D* P^{lam+1}")
        t_eval = np.atleast_1d(t_eval)
        B = _spline_basis(self.tau, t_eval, 2.0) * t_eval[:, None]
        return self._apply(B)


def _squeeze(f: RadialField, vals: np.ndarray) -> np.ndarray:
    return vals if f.is_vector else vals[..., 0]


def g_field(f, lam: float, order: FracOrder | float, tgrid: TimeGrid | None = None,
            path: str = "kernel", per_decade: int = 24) -> SquareFunctionField:
    """G^{lam,beta}(f) on tgrid x (grid of f)."""
    f = as_field(f)
    order = order if isinstance(order, FracOrder) else frac_order(order)
    tgrid = make_time_grid() if tgrid is None else tgrid
    meta = {"lam": float(lam), "beta": order.beta, "path": path}
    if path == "spectral":
        mult = _spectral_g_multiplier(order, tgrid.points, f.grid.points)
        vals = _spectral_time_field(f, lam, lam, mult)
        return SquareFunctionField(tgrid, f.grid, vals, meta)
    if path != "kernel":
        raise ValueError(f"unknown path {path!r}")
    if order.is_integer:
        F = kernel_stack(_k.KIND_POISSON, lam, order.m, tgrid.points, f)
        vals = F * (tgrid.points ** order.m)[:, None, None]
        meta["tail_fraction"] = 0.0
    else:
        st = TimeStack(f, lam, _k.KIND_POISSON, order.m, tau_nodes(tgrid.t_min, tgrid.t_max, per_decade))
        vals, meta["tail_fraction"] = st.g_values(order, tgrid.points)
    return SquareFunctionField(tgrid, f.grid, _squeeze(f, vals), meta)


def gcurl_field(f, lam: float, tgrid: TimeGrid | None = None, path: str = "kernel") -> GCurlField:
    """calG^lam(f)(t, x) = t D*_lam P_t^{lam+1} f(x); D* is applied inside the kernel."""
    f = as_field(f)
    tgrid = make_time_grid() if tgrid is None else tgrid
    meta = {"lam": float(lam), "path": path}
    if path == "spectral":
        ty = np.outer(tgrid.points, f.grid.points)
        vals = _spectral_time_field(f, lam + 1.0, lam, -ty * np.exp(-ty))
        return GCurlField(tgrid, f.grid, vals, meta)
    if path != "kernel":
        raise ValueError(f"unknown path {path!r}")
    F = kernel_stack(_k.KIND_DSTAR, lam, 0, tgrid.points, f)
    vals = F * tgrid.points[:, None, None]
    return GCurlField(tgrid, f.grid, _squeeze(f, vals), meta)


def h_norm_profile(field, x_index: int) -> float:
    """||field(., x_i)||_H for a scalar field."""
    if field.is_vector:
        raise InvalidBoundsError("vector-valued profiles are normed in gamma_norm")
    prof = field.profile(x_index)
    return float(np.sqrt(max(h_inner(prof, prof, field.tgrid).real, 0.0)))
