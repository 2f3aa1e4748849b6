"""Bessel Riesz transforms, imaginary powers, the operator T_{gamma,beta}
and the exact operator identities relating them to the square functions."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import _kernels as _k
from .errors import InvalidBoundsError
from .fields import RadialField, TestFunction, as_field
from .fracderiv import _spectral_g_multiplier, _spectral_time_field, frac_order, g_field, gcurl_field
from .grids import RadialGrid, TimeGrid, make_time_grid, padded_grid
from .hankel import SPECTRAL_OVERSAMPLE, apply_multiplier, cached_hankel, make_test_function
from .poisson import HeatKernelEval, PoissonKernelEval, heat_kernel_dt, kernel_stack, poisson_apply
from .report import Report, deviation_report
from .specfun import gamma as cgamma


@dataclass(frozen=True)
class RieszEvaluator:
    """R_lam and its adjoint.  The kernel route for R_lam^* integrates
    D*_lam P_tau^{lam+1} f over tau on a log grid."""

    lam: float
    tau_min: float = 1e-8
    tau_max: float = 1e5
    tau_step: float = 0.2

    def __post_init__(self):
        if not self.lam >= 1:
            raise InvalidBoundsError("lambda must be >= 1")

    def taus(self) -> np.ndarray:
        return np.exp(np.arange(math.log(self.tau_min), math.log(self.tau_max) + 1e-12, self.tau_step))


def _hankel(lam: float, grid: RadialGrid) -> np.ndarray:
    return cached_hankel(float(lam), grid, SPECTRAL_OVERSAMPLE).matrix


def riesz_apply(ev: RieszEvaluator, f, adjoint: bool = False, path: str = "spectral") -> RadialField:
    """R_lam f = h_{lam+1} h_lam f, or R_lam^* f = h_lam h_{lam+1} f.

    ``path='kernel'`` (adjoint only) uses R^* f = -int_0^inf D*_lam P_tau^{lam+1} f dtau,
    which needs no band limit on h_{lam+1} f and so stays accurate for inputs
    whose h_{lam+1}-transform decays slowly.
    """
    f = as_field(f)
    lam = ev.lam
    if path == "spectral":
        a, b = (lam + 1.0, lam) if adjoint else (lam, lam + 1.0)
        return f.with_values(_hankel(b, f.grid) @ (_hankel(a, f.grid) @ f.values), path=path)
    if path != "kernel":
        raise ValueError(f"unknown path {path!r}")
    if not adjoint:
        raise ValueError("the kernel route covers R_lam^*; use riesz_offdiag_apply for R_lam")
    tau = ev.taus()
    V = kernel_stack(_k.KIND_DSTAR, lam, 0, tau, f)
    vals = -np.tensordot(ev.tau_step * tau, V, axes=(0, 0))
    return f.with_values(vals if f.is_vector else vals[:, 0], path=path)


def riesz_kernel(lam: float, x, y):
    """Kernel of R_lam = h_{lam+1} h_lam at x != y.

    The t-integral of D_{lam,x} P_t^lam(x, y) is the kernel of -h_{lam+1} h_lam,
    so its sign is flipped here to match the spectral operator.
    """
    x_, y_ = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    z = np.zeros(x_.size)
    out = -_k.kernel_points(_k.KIND_RIESZ, float(lam), 0, np.zeros(1), z,
                            x_.ravel().copy(), y_.ravel().copy()).reshape(x_.shape)
    return float(out) if out.ndim == 0 else out


def hcal_kernel(lam: float, s, x, y):
    """calH^lam(s; x, y) = -int_0^inf D*_{lam,x} P_{t+s}^{lam+1}(x, y) dt."""
    s_, x_, y_ = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s, x, y)))
    out = _k.kernel_points(_k.KIND_HCAL, float(lam), 0, np.zeros(1), s_.ravel().copy(),
                           x_.ravel().copy(), y_.ravel().copy()).reshape(s_.shape)
    return float(out) if out.ndim == 0 else out


def riesz_offdiag_apply(ev: RieszEvaluator, f, x_eval) -> np.ndarray:
    """R_lam f at points x_eval by the grid rule over the support of f; valid only
    where f vanishes near x_eval."""
    f = as_field(f)
    cols = f.as_columns()
    supp = np.nonzero(np.any(cols != 0, axis=1))[0]
    x_eval = np.atleast_1d(np.asarray(x_eval, dtype=float))
    if np.any(np.isin(x_eval, f.grid.points[supp])):
        raise InvalidBoundsError("evaluation points must lie off the support of f")
    X, Y = np.meshgrid(x_eval, f.grid.points[supp], indexing="ij")
    out = riesz_kernel(ev.lam, X, Y) @ (f.grid.weights[supp, None] * cols[supp])
    return out if f.is_vector else out[:, 0]


def _l2(grid: RadialGrid, v: np.ndarray) -> float:
    a = np.abs(v) ** 2
    if a.ndim == 2:
        a = a.sum(axis=1)
    return float(np.sqrt(grid.weights @ a))


def commutation_check(ev: RieszEvaluator, f, s: float, tol: float = 1e-3, abs_tol: float = 1e-8,
                      path: str = "kernel", pad: tuple[float, float] = (1.0, 1.0)) -> Report:
    """P_s^lam R^* f against R^* P_s^{lam+1} f.

    The kernel route applies P_s and R^* in x-space on the grid of f padded
    by ``pad`` decades (left, right); R^* f decays only algebraically, and
    for large s the semigroup spreads it past x_max.  ``path='spectral'``
    composes the discrete Hankel matrices instead.
    """
    t0 = time.perf_counter()
    f = as_field(f) if not isinstance(f, RadialField) else f
    grid = f.grid
    sl = slice(0, grid.n)
    fb = f
    if path == "kernel" and any(pad):
        big, sl2 = padded_grid(grid, *pad)
        fr = _resample(f, big)
        if fr is not None:
            fb, sl = fr, sl2
    if path == "kernel":
        lhs = poisson_apply(PoissonKernelEval(ev.lam), s, riesz_apply(ev, fb, True, "kernel")).values[sl]
        rhs = riesz_apply(ev, poisson_apply(PoissonKernelEval(ev.lam + 1.0), s, fb), True, "kernel").values[sl]
    else:
        lhs = apply_multiplier(lambda y: np.exp(-s * y), riesz_apply(ev, f, adjoint=True), ev.lam).values
        rhs = riesz_apply(ev, apply_multiplier(lambda y: np.exp(-s * y), f, ev.lam + 1.0), adjoint=True).values
    diff, den = _l2(grid, lhs - rhs), _l2(grid, rhs)
    rel = diff / den if den > 0 else 0.0
    passed = rel <= tol or diff <= abs_tol
    return Report("identities", f"commutation/lam={ev.lam:g}/s={s:g}",
                  {"lam": ev.lam, "s": s, "path": path, "pad": list(pad) if sl.start else [0, 0],
                   "grid": grid.to_dict()},
                  {"relative": rel, "absolute": diff, "norm": den}, rel, tol, passed,
                  time.perf_counter() - t0)


def _resample(f, grid: RadialGrid):
    """Samples of f on ``grid``, or None if f cannot be re-evaluated."""
    if callable(f) and not isinstance(f, RadialField):
        return RadialField(grid, np.asarray(f(grid.points)))
    if isinstance(f, TestFunction) and f.descriptor.get("family"):
        d = dict(f.descriptor)
        return make_test_function(d.pop("family"), grid, **d)
    return None


def _pad(f, pad_decades: float):
    """(field on padded grid, slice of the original nodes, original grid)."""
    if isinstance(f, RadialField):
        grid = f.grid
    else:
        raise InvalidBoundsError("need a sampled field or test function")
    if pad_decades > 0:
        big, sl = padded_grid(grid, pad_decades)
        fb = _resample(f, big)
        if fb is not None:
            return fb, sl, grid
    return f, slice(0, grid.n), grid


def _st_dev(a: np.ndarray, b: np.ndarray, tgrid: TimeGrid, grid: RadialGrid) -> tuple[float, float]:
    A = np.abs(a - b) ** 2
    Bv = np.abs(b) ** 2
    num = tgrid.logweights @ A @ grid.weights
    den = tgrid.logweights @ Bv @ grid.weights
    return float(np.sqrt(num / den)) if den > 0 else float(np.sqrt(num)), float(np.sqrt(den))


def cauchy_riemann_check(f, lam: float, tgrid: TimeGrid | None = None, pad_decades: float = 1.0,
                         tol: float = 2e-3, ev: RieszEvaluator | None = None) -> Report:
    """G^{lam,1}(R^* f) against calG^lam(f) in L^2(dx dt/t).

    All fields are computed on the grid of f extended ``pad_decades`` to the
    left (when f can be re-sampled) and compared on the original nodes; R^* f
    decays only like x^lam log(1/x) at the origin, so cutting the line at
    x_min otherwise leaves an edge artifact.
    """
    t0 = time.perf_counter()
    tgrid = make_time_grid() if tgrid is None else tgrid
    ev = ev or RieszEvaluator(lam)
    fb, sl, grid = _pad(f, pad_decades)
    if not np.any(fb.values):
        return deviation_report("identities", f"cauchy_riemann/lam={lam:g}", {"lam": lam}, 0.0, tol)
    R = riesz_apply(ev, fb, adjoint=True, path="kernel")
    a = g_field(R, lam, 1.0, tgrid, "kernel").values[:, sl]
    b = gcurl_field(fb, lam, tgrid, "kernel").values[:, sl]
    dev, scale = _st_dev(a, b, tgrid, grid)
    inputs = {"lam": lam, "x_grid": grid.to_dict(), "t_grid": tgrid.to_dict(),
              "pad_decades": pad_decades if sl.start else 0.0,
              "f": getattr(f, "descriptor", {})}
    return deviation_report("identities", f"cauchy_riemann/lam={lam:g}/n={grid.n}", inputs, dev, tol,
                            {"gcurl_norm": scale}, time.perf_counter() - t0)


# ---------------------------------------------------------------- imaginary powers

@dataclass(frozen=True)
class ImaginaryPowerEvaluator:
    gamma: float
    lam: float

    def __post_init__(self):
        if self.gamma == 0:
            raise InvalidBoundsError("gamma must be nonzero")
        if not self.lam >= 1:
            raise InvalidBoundsError("lambda must be >= 1")

    def multiplier(self, y: np.ndarray) -> np.ndarray:
        return np.exp(2j * self.gamma * np.log(y))


def imaginary_power_apply(ev: ImaginaryPowerEvaluator, f) -> RadialField:
    """Delta_lam^{i gamma} f = h_lam(y^{2 i gamma} h_lam f)."""
    return apply_multiplier(ev.multiplier, f, ev.lam)


def laplace_multiplier(ev: ImaginaryPowerEvaluator, y, U: float = 1e4, step: float = 0.02) -> tuple[np.ndarray, np.ndarray]:
    """y^2 int_0^U e^{-y^2 u} u^{-i gamma} du / Gamma(1 - i gamma) and the omitted tail bound.

    With v = y^2 u the integral is y^{2 i gamma - 2} int_0^{y^2 U} e^{-v} v^{1 - i gamma} d(log v);
    the log-v trapezoid gets an exact head below v = e^{-40}.  The tail beyond
    y^2 U is bounded by int_{y^2 U}^inf e^{-v} dv = e^{-y^2 U}.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    a = 1.0 - 1j * ev.gamma
    out = np.empty(y.size, dtype=complex)
    for i, yi in enumerate(y):
        V = yi * yi * U
        w = np.arange(-40.0, math.log(V), step)
        w = np.append(w, math.log(V))
        g = np.exp(-np.exp(w) + a * w)
        wt = np.full(w.size, step)
        wt[0] *= 0.5
        wt[-2] = 0.5 * step + 0.5 * (w[-1] - w[-2])
        wt[-1] = 0.5 * (w[-1] - w[-2])
        head = np.exp(-40.0 * a) / a
        out[i] = (wt @ g + head) * yi ** (2j * ev.gamma)
    return out / cgamma(a), np.exp(-y * y * U)


# ---------------------------------------------------------------- heat-kernel representation

def heat_power_kernel(ev: ImaginaryPowerEvaluator, x: float, y: float, step: float = 0.0125,
                      full: bool = False):
    """K_lam^gamma(x, y) = -(1/Gamma(1 - i gamma)) int_0^inf t^{-i gamma} dW_t/dt dt.

    Trapezoid in u = log t.  Below t = (x - y)^2 / 400 the integrand is
    smaller than e^{-100}; above the cut T it is replaced by the leading
    power law dW/dt ~ -(lam + 1/2) C t^{-lam - 3/2}, whose integral is the
    recorded tail.
    """
    if x == y:
        raise InvalidBoundsError("heat_power_kernel needs x != y")
    lam, g = ev.lam, ev.gamma
    hev = HeatKernelEval(lam)
    t_lo = (x - y) ** 2 / 400.0
    T = 1e4 * max(x, y) ** 2
    u = np.arange(math.log(t_lo), math.log(T) + 1e-12, step)
    t = np.exp(u)
    wt = np.full(u.size, step)
    wt[0] = wt[-1] = 0.5 * step
    body = wt @ (t ** (1.0 - 1j * g) * heat_kernel_dt(hev, t, x, y))
    nu = lam - 0.5
    C = math.sqrt(x * y) * (x * y / 4.0) ** nu / (2.0 * math.gamma(nu + 1.0))
    tail = -(lam + 0.5) * C * T ** (-lam - 0.5 - 1j * g) / (lam + 0.5 + 1j * g)
    val = -(body + tail) / cgamma(1.0 - 1j * g)
    if full:
        return complex(val), float(abs(tail / cgamma(1.0 - 1j * g)))
    return complex(val)


# ---------------------------------------------------------------- T_{gamma, beta}

@dataclass(frozen=True)
class TGammaBeta:
    """T(h)(t) = t^{-beta} int_0^t (t - s)^{beta - 1} h(t - s) psi(s) ds,
    psi(s) = s^{-2 i gamma} / Gamma(1 - 2 i gamma)."""

    gamma: float
    beta: float

    def __post_init__(self):
        if self.gamma == 0 or not self.beta > 0:
            raise InvalidBoundsError("need gamma != 0 and beta > 0")

    @property
    def norm_const(self) -> complex:
        return 1.0 / cgamma(1.0 - 2j * self.gamma)

    def psi(self, s):
        return np.exp(-2j * self.gamma * np.log(s)) * self.norm_const

    def on_ones(self, t):
        """Closed form T(1)(t) = t^{-2 i gamma} Gamma(beta) / Gamma(1 + beta - 2 i gamma)."""
        t = np.asarray(t, dtype=float)
        return np.exp(-2j * self.gamma * np.log(t)) * math.gamma(self.beta) / cgamma(1.0 + self.beta - 2j * self.gamma)


def _sampled(h, tgrid: TimeGrid):
    """Callable extension of samples on tgrid: cubic in log t, zero outside."""
    h = np.asarray(h)
    spl = CubicSpline(np.log(tgrid.points), h, axis=0)
    lo, hi = np.log(tgrid.t_min), np.log(tgrid.t_max)

    def ext(r):
        lr = np.log(r)
        inside = (lr >= lo - 1e-12) & (lr <= hi + 1e-12)
        out = np.zeros(r.shape + h.shape[1:], dtype=np.result_type(h, float))
        out[inside] = spl(np.clip(lr[inside], lo, hi))
        return out

    return ext


def t_gamma_beta_apply(op: TGammaBeta, h, tgrid: TimeGrid | None = None, t_eval=None,
                       step: float = 0.04, w_min: float = -40.0, w_max: float = 4.0) -> np.ndarray:
    """T_{gamma,beta} h at t_eval (default: the tgrid nodes).

    ``h`` is a callable of t or samples on tgrid (columns allowed), taken as
    zero outside the grid.  Writing r = t - s = t(1 - e^{-v}) and v = e^w,
    T h(t) = t^{-beta} psi-const int r^{beta-1} h(r) s^{1 - 2 i gamma} v dw,
    whose integrand is smooth and decays at both ends of the w-line, so a
    plain trapezoid is used.
    """
    tgrid = make_time_grid() if tgrid is None else tgrid
    t_eval = tgrid.points if t_eval is None else np.atleast_1d(np.asarray(t_eval, dtype=float))
    fn = h if callable(h) else _sampled(h, tgrid)
    w = np.arange(w_min, w_max + 1e-12, step)
    v = np.exp(w)
    em = -np.expm1(-v)                       # 1 - e^{-v}
    base = step * v * np.exp(-v) ** (1.0 - 2j * op.gamma) * em ** (op.beta - 1.0)
    out = None
    for j, t in enumerate(t_eval):
        r = t * em
        vals = np.asarray(fn(r))
        # t^{-beta} * r^{beta-1} * s^{1-2ig} * dv = t^{-2ig} * base
        coef = np.exp(-2j * op.gamma * math.log(t)) * base
        row = np.tensordot(coef, vals, axes=(0, 0))
        if out is None:
            out = np.zeros((t_eval.size,) + np.shape(row), dtype=complex)
        out[j] = row
    return out * op.norm_const


def gaussian_panel(tgrid: TimeGrid, k: int = 16) -> np.ndarray:
    """k Gaussian bumps in log t, well inside the grid; shape (m, k)."""
    lo, hi = np.log(tgrid.t_min), np.log(tgrid.t_max)
    width = (hi - lo) / (k + 5)
    centers = np.linspace(lo + 3 * width, hi - 3 * width, k)
    u = np.log(tgrid.points)[:, None]
    return np.exp(-0.5 * ((u - centers[None, :]) / width) ** 2)


def _bilinear(F: np.ndarray, H: np.ndarray, lw: np.ndarray) -> np.ndarray:
    """sum_j F[j, x] H[j, k] lw_j -> (n, k)."""
    return np.einsum("jx,jk,j->xk", F, H, lw)


def intertwining_check(f, lam: float, beta: float, gamma: float, tgrid: TimeGrid | None = None,
                       path: str = "spectral", panel: int = 16, tol: float = 5e-3,
                       rel_floor: float = 1e-2, extend_decades: float = 3.0, detail: bool = False):
    """<G^beta(Delta^{i gamma} f)(., x), h> = -<G^{beta+1}(f)(., x), T_{gamma,beta} h>
    for a panel of bumps h, with the bilinear pairing of L^2(dt/t).

    On the spectral path G^beta(Delta^{i gamma} f) is one multiplier,
    e^{i beta pi}(ty)^beta e^{-ty} y^{2 i gamma}, applied to h_lam f: sampling
    Delta^{i gamma} f first would cut its x^{-lam-1} tail at x_max.  T h is
    supported on all of (t_h, inf), so the right side is paired on the time
    grid extended ``extend_decades`` to the right.

    The deviation is the largest, over x with a non-negligible pairing vector,
    of ||lhs_x - rhs_x|| / ||lhs_x||.
    """
    t0 = time.perf_counter()
    f = as_field(f)
    tgrid = make_time_grid() if tgrid is None else tgrid
    case = f"intertwining/lam={lam:g}/beta={beta:g}/gamma={gamma:g}"
    inputs = {"lam": lam, "beta": beta, "gamma": gamma, "path": path, "panel": panel,
              "x_grid": f.grid.to_dict(), "t_grid": tgrid.to_dict(), "extend_decades": extend_decades}
    if not np.any(f.values):
        return deviation_report("identities", case, inputs, 0.0, tol)
    ev = ImaginaryPowerEvaluator(gamma, lam)
    k = int(round(extend_decades * math.log(10.0) / tgrid.h))
    text = make_time_grid(tgrid.t_min, tgrid.t_max * math.exp(k * tgrid.h), tgrid.m + k)
    if path == "spectral":
        y = f.grid.points
        mult = _spectral_g_multiplier(frac_order(beta), tgrid.points, y) * ev.multiplier(y)[None, :]
        F1 = _spectral_time_field(f, lam, lam, mult)
    else:
        F1 = g_field(imaginary_power_apply(ev, f), lam, beta, tgrid, path).values
    F2 = g_field(f, lam, beta + 1.0, text, path).values
    H = gaussian_panel(tgrid, panel)
    TH = t_gamma_beta_apply(TGammaBeta(gamma, beta), H, tgrid, t_eval=text.points)
    L = _bilinear(F1, H, tgrid.logweights)
    R = -_bilinear(F2, TH, text.logweights)
    nl = np.linalg.norm(L, axis=1)
    keep = nl >= rel_floor * nl.max()
    per_x = np.linalg.norm(L - R, axis=1)[keep] / nl[keep]
    dev = float(per_x.max())
    rep = deviation_report("identities", case, inputs, dev, tol,
                           {"x_used": int(keep.sum()), "median": float(np.median(per_x))},
                           time.perf_counter() - t0)
    return (rep, L, R) if detail else rep


def polarization_constant(beta: float) -> complex:
    return np.exp(2j * np.pi * beta) * math.gamma(2 * beta) / 2.0 ** (2 * beta)


def polarization_check(f, a, lam: float, beta: float, tgrid: TimeGrid | None = None,
                       path: str = "kernel", pad_decades: float = 0.0, tol: float = 2e-2) -> Report:
    """int int G^beta(f) G^beta(a) dx dt/t against e^{2 pi i beta} Gamma(2 beta) 2^{-2 beta} int f a."""
    t0 = time.perf_counter()
    tgrid = make_time_grid() if tgrid is None else tgrid
    fb, _, grid = _pad(as_field(f) if not isinstance(f, RadialField) else f, pad_decades)
    if a is f:
        ab = fb
    else:
        ab, _, _ = _pad(a, pad_decades) if pad_decades > 0 else (a, None, None)
        if not ab.grid.same_as(fb.grid):
            raise InvalidBoundsError("f and a must share a grid")
    g = fb.grid
    const = polarization_constant(beta)
    rhs = const * complex(g.integrate(fb.values * ab.values))
    case = f"polarization/lam={lam:g}/beta={beta:g}/n={grid.n}"
    inputs = {"lam": lam, "beta": beta, "path": path, "x_grid": grid.to_dict(), "t_grid": tgrid.to_dict(),
              "pad_decades": pad_decades, "f": getattr(f, "descriptor", {}), "a": getattr(a, "descriptor", {})}
    Gf = g_field(fb, lam, beta, tgrid, path).values
    Ga = Gf if ab is fb else g_field(ab, lam, beta, tgrid, path).values
    lhs = complex(tgrid.logweights @ (Gf * Ga) @ g.weights)
    scale = math.sqrt(max(g.integrate(np.abs(fb.values) ** 2), 0) * max(g.integrate(np.abs(ab.values) ** 2), 0))
    vals = {"lhs": lhs, "rhs": rhs, "constant": const}
    if abs(rhs) <= 1e-12 * max(scale, 1e-300):
        vals["degenerate"] = True
        dev = abs(lhs - rhs)
        return Report("identities", case, inputs, vals, dev, tol, dev <= 1e-10 * max(scale, 1.0),
                      time.perf_counter() - t0)
    return deviation_report("identities", case, inputs, abs(lhs - rhs) / abs(rhs), tol, vals,
                            time.perf_counter() - t0)
