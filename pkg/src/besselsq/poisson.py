"""Bessel-Poisson and heat kernels, semigroup action and maximal operators."""
from __future__ import annotations

import functools
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as _k
from .errors import InvalidBoundsError
from .fields import RadialField, as_field
from .grids import ThetaRule, TimeGrid, theta_rule
from .hankel import apply_multiplier
from .specfun import bessel_i_scaled

# width in log-distance of the exactly integrated zone around each x_i; a
# fixed width keeps the far-rule error at O(h^4) as the grid is refined
WINDOW_LOG_WIDTH = 0.35


def window_cells(grid) -> int:
    return max(8, int(math.ceil(WINDOW_LOG_WIDTH / grid.h)))


@functools.lru_cache(maxsize=64)
def derivative_coefficients(lam: float, k: int) -> np.ndarray:
    """Coefficients c_l with d^k/dt^k [t Q^{-lam-1}] = sum_l c_l t^{k+1-2l} Q^{-(lam+1+k-l)}."""
    n = k + 1
    out = []
    for l in range(0, n // 2 + 1):
        E = 2 ** (n - 2 * l) * math.factorial(n) / (math.factorial(l) * math.factorial(n - 2 * l))
        rising = 1.0
        for i in range(1, k - l + 1):
            rising *= lam + i
        out.append(-0.5 * (-1) ** (n - l) * E * rising)
    arr = np.array(out)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PoissonKernelEval:
    """Evaluator for P_t^lam(x, y) and its t-derivatives.

    ``method='graded'`` integrates in theta on geometric panels matched to the
    pole near theta = 0 (accurate up to the diagonal); ``method='rule'`` uses
    the plain Gauss-Legendre ``theta_rule``.
    """

    lam: float
    rule: ThetaRule = None
    method: str = "graded"

    def __post_init__(self):
        if self.lam < 1:
            raise InvalidBoundsError("Poisson kernels require lambda >= 1")
        if self.rule is None:
            object.__setattr__(self, "rule", theta_rule(self.lam, 64))


@dataclass(frozen=True)
class HeatKernelEval:
    lam: float

    def __post_init__(self):
        if self.lam < 1:
            raise InvalidBoundsError("heat kernels require lambda >= 1")


def _rule_kernel(ev: PoissonKernelEval, t, x, y, k):
    th = ev.rule.nodes
    v = 2.0 * np.sin(0.5 * th) ** 2
    s = np.sin(th) ** (2 * ev.lam - 1)
    c = derivative_coefficients(ev.lam, k)
    t, x, y = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, x, y)))
    Q = (t * t + (x - y) ** 2)[..., None] + 2.0 * (x * y)[..., None] * v
    acc = np.zeros(Q.shape)
    for l, cl in enumerate(c):
        acc += cl * t[..., None] ** (k + 1 - 2 * l) * Q ** (-(ev.lam + 1 + k - l))
    val = (acc * s) @ ev.rule.weights
    return 2.0 * ev.lam * (x * y) ** ev.lam / np.pi * val


def poisson_kernel(ev: PoissonKernelEval, t, x, y, k: int = 0):
    """d^k/dt^k P_t^lam(x, y); scalars or broadcastable arrays."""
    if not 0 <= k <= 4:
        raise InvalidBoundsError("derivative order must satisfy 0 <= k <= 4")
    t_, x_, y_ = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, x, y)))
    if np.any(np.abs(x_ - y_) + t_ < 1e-8 * (x_ + y_)):
        warnings.warn("Poisson kernel evaluated at a nearly degenerate point", RuntimeWarning, stacklevel=2)
    if ev.method == "rule":
        out = _rule_kernel(ev, t_, x_, y_, k)
    else:
        c = np.array(derivative_coefficients(ev.lam, k))
        out = _k.kernel_points(_k.KIND_POISSON, float(ev.lam), int(k), c,
                               t_.ravel().copy(), x_.ravel().copy(), y_.ravel().copy()).reshape(t_.shape)
    return float(out) if out.ndim == 0 else out


def dstar_kernel(lam: float, t, x, y):
    """D*_{lam,x} P_t^{lam+1}(x, y) with D* applied inside the theta-integral."""
    t_, x_, y_ = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, x, y)))
    out = _k.kernel_points(_k.KIND_DSTAR, float(lam), 0, np.zeros(1),
                           t_.ravel().copy(), x_.ravel().copy(), y_.ravel().copy()).reshape(t_.shape)
    return float(out) if out.ndim == 0 else out


def kernel_stack(kind: int, lam: float, k: int, taus, f: RadialField,
                 window: int | None = None) -> np.ndarray:
    """Apply a kernel family at every tau in ``taus``; returns (len(taus), n, d)."""
    g = f.grid
    window = window_cells(g) if window is None else window
    F = np.ascontiguousarray(f.as_columns())
    if not np.iscomplexobj(F):
        F = F.astype(float)
    taus = np.ascontiguousarray(np.atleast_1d(taus), dtype=float)
    coef = np.array(derivative_coefficients(lam, k)) if kind == _k.KIND_POISSON else np.zeros(1)
    out = np.zeros((taus.size, g.n, F.shape[1]), dtype=F.dtype)
    _k.apply_stack(kind, float(lam), int(k), coef, taus, np.ascontiguousarray(g.u),
                   np.ascontiguousarray(g.points), np.ascontiguousarray(g.weights), g.h, F,
                   int(window), out)
    return out


def _reshape_like(f: RadialField, cols: np.ndarray) -> np.ndarray:
    return cols if f.is_vector else cols[:, 0]


def poisson_apply(ev: PoissonKernelEval, t: float, f, path: str = "kernel", k: int = 0) -> RadialField:
    """P_t^lam f (or d^k/dt^k P_t^lam f) on the grid of f."""
    f = as_field(f)
    if t <= 0:
        raise InvalidBoundsError("t must be positive")
    if path == "spectral":
        out = apply_multiplier(lambda y: (-y) ** k * np.exp(-t * y), f, ev.lam)
        return f.with_values(out.values, path="spectral")
    if path != "kernel":
        raise ValueError(f"unknown path {path!r}")
    out = kernel_stack(_k.KIND_POISSON, ev.lam, k, [t], f)[0]
    return f.with_values(_reshape_like(f, out), path="kernel")


def _norm_rows(vals: np.ndarray, norm) -> np.ndarray:
    if norm is None:
        return np.abs(vals) if vals.ndim == 1 else np.linalg.norm(vals, axis=-1)
    return norm(vals)


def maximal_p(ev: PoissonKernelEval, f, s_grid, norm: Callable | None = None) -> RadialField:
    """Pointwise max over s in s_grid of ||P_s f(x)||; a lower bound for P_* f.

    ``norm`` maps an (n, d) or (n,) array to the (n,) row norms; the default is
    the modulus / Euclidean norm.
    """
    f = as_field(f)
    s_vals = s_grid.points if isinstance(s_grid, TimeGrid) else np.atleast_1d(s_grid)
    stack = kernel_stack(_k.KIND_POISSON, ev.lam, 0, s_vals, f)
    best = np.zeros(f.grid.n)
    for j in range(stack.shape[0]):
        best = np.maximum(best, _norm_rows(_reshape_like(f, stack[j]), norm))
    return RadialField(f.grid, best, {"s_points": int(np.size(s_vals))})


def heat_kernel(ev: HeatKernelEval, t, x, y):
    """W_t^lam(x, y) using the exponentially scaled I_{lam-1/2}."""
    t, x, y = (np.asarray(a, dtype=float) for a in (t, x, y))
    z = x * y / (2.0 * t)
    out = np.sqrt(x * y) / (2.0 * t) * bessel_i_scaled(ev.lam - 0.5, z) * np.exp(-((x - y) ** 2) / (4.0 * t))
    return float(out) if np.ndim(out) == 0 else out


def heat_kernel_dt(ev: HeatKernelEval, t, x, y, damped: bool = True):
    """d/dt W_t^lam(x, y) in closed form.

    With z = xy/(2t) and nu = lam - 1/2, z I_nu'(z) = z I_{nu+1}(z) + nu I_nu(z),
    so dW/dt = W [ -(nu + 1)/t + (x^2 + y^2)/(4 t^2) ] - (xy)^{3/2}/(4 t^3) I_{nu+1}(z) e^{-(x^2+y^2)/4t}.
    With ``damped=False`` the factor e^{-(x-y)^2/4t} is left out.
    """
    t, x, y = (np.asarray(a, dtype=float) for a in (t, x, y))
    nu = ev.lam - 0.5
    z = x * y / (2.0 * t)
    damp = np.exp(-((x - y) ** 2) / (4.0 * t)) if damped else 1.0
    i0 = bessel_i_scaled(nu, z) * damp
    i1 = bessel_i_scaled(nu + 1.0, z) * damp
    sq = np.sqrt(x * y)
    W = sq / (2.0 * t) * i0
    out = W * (-(nu + 1.0) / t + (x * x + y * y) / (4.0 * t * t)) - sq * x * y / (4.0 * t ** 3) * i1
    return float(out) if np.ndim(out) == 0 else out


def poisson_kernel_lam1(t, x, y):
    """Closed form for lam = 1: 4txy / (pi (t^2 + (x-y)^2)(t^2 + (x+y)^2))."""
    t, x, y = (np.asarray(a, dtype=float) for a in (t, x, y))
    return 4.0 * t * x * y / (np.pi * (t * t + (x - y) ** 2) * (t * t + (x + y) ** 2))


def _rel_l2(grid, a, b) -> float:
    den = float(np.sqrt(grid.integrate(np.abs(b) ** 2)))
    num = float(np.sqrt(grid.integrate(np.abs(a - b) ** 2)))
    return num / den if den > 0 else num


def _gauss(lam, grid):
    from .hankel import make_test_function
    return make_test_function("slambda_gauss", grid, lam=lam)


def semigroup_check(lam: float, t: float = 0.3, s: float = 0.7, grid=None, tol: float = 1e-4):
    """P_t P_s f against P_{t+s} f on the kernel path."""
    from .grids import make_radial_grid
    from .report import deviation_report

    t0 = time.perf_counter()
    grid = make_radial_grid() if grid is None else grid
    ev = PoissonKernelEval(lam)
    f = _gauss(lam, grid)
    lhs = poisson_apply(ev, t, poisson_apply(ev, s, f)).values
    rhs = poisson_apply(ev, t + s, f).values
    return deviation_report("identities", f"semigroup/lam={lam:g}/t={t:g}/s={s:g}",
                            {"lam": lam, "t": t, "s": s, "grid": grid.to_dict()},
                            _rel_l2(grid, lhs, rhs), tol, runtime=time.perf_counter() - t0)


def poisson_path_check(lam: float, ts=(0.1, 1.0, 5.0), grid=None, tol: float = 1e-4):
    """Kernel-path against spectral-path P_t f, worst relative L^2 deviation over ts."""
    from .grids import make_radial_grid
    from .report import deviation_report

    t0 = time.perf_counter()
    grid = make_radial_grid() if grid is None else grid
    ev = PoissonKernelEval(lam)
    f = _gauss(lam, grid)
    devs = [_rel_l2(grid, poisson_apply(ev, t, f, "kernel").values, poisson_apply(ev, t, f, "spectral").values)
            for t in ts]
    return deviation_report("identities", f"poisson_paths/lam={lam:g}",
                            {"lam": lam, "ts": list(ts), "grid": grid.to_dict()}, max(devs), tol,
                            {"per_t": devs}, time.perf_counter() - t0)


def closed_form_check(tol: float = 1e-8, n: int = 41):
    """Graded theta quadrature for lam = 1 against the closed form on a (t, x, y) box."""
    from .report import deviation_report

    t0 = time.perf_counter()
    v = np.geomspace(1e-2, 1e2, n)
    T, X, Y = (a.ravel() for a in np.meshgrid(v[::4], v, v, indexing="ij"))
    ok = np.abs(X - Y) + T >= 1e-6 * (X + Y)
    T, X, Y = T[ok], X[ok], Y[ok]
    exact = poisson_kernel_lam1(T, X, Y)
    quad = poisson_kernel(PoissonKernelEval(1.0), T, X, Y)
    dev = float(np.max(np.abs(quad - exact) / np.abs(exact)))
    return deviation_report("identities", "poisson_closed_form/lam=1", {"points": int(T.size)}, dev, tol,
                            runtime=time.perf_counter() - t0)
