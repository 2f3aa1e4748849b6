"""Hankel transform h_lam as a dense quadrature matrix, spectral multipliers,
test-function families and the S_lam seminorms."""
from __future__ import annotations

import functools
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GridMismatchError, InvalidBoundsError, UnknownFamilyError
from .fields import RadialField, TestFunction, as_field
from .grids import RadialGrid, log_trapezoid_weights, make_radial_grid
from .specfun import bessel_j

# product-integration refinement used by the spectral paths of other modules
SPECTRAL_OVERSAMPLE = 4


@dataclass(frozen=True, eq=False)
class HankelOperator:
    """Dense n_out x n_in matrix approximating h_lam.

    With ``oversample == 1`` the entries are sqrt(x_i y_k) J_{lam-1/2}(x_i y_k) w_k.
    With ``oversample = r > 1`` the input is interpolated by a cubic spline in
    log y onto an r-times finer grid before the quadrature, which removes the
    aliasing of the oscillatory kernel at moderate n.
    """

    lam: float
    in_grid: RadialGrid
    out_grid: RadialGrid
    matrix: np.ndarray
    oversample: int = 1

    def __call__(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ values


def _kernel_block(lam, xo, yi, wi):
    X = np.outer(xo, yi)
    return np.sqrt(X) * bessel_j(lam - 0.5, X) * wi[None, :]


def build_hankel(lam: float, in_grid: RadialGrid, out_grid: RadialGrid | None = None,
                 oversample: int = 1) -> HankelOperator:
    if lam < 1:
        raise InvalidBoundsError("Hankel operators are built for lambda >= 1")
    out_grid = in_grid if out_grid is None else out_grid
    r = int(oversample)
    if r <= 1:
        mat = _kernel_block(lam, out_grid.points, in_grid.points, in_grid.weights)
        r = 1
    else:
        n = in_grid.n
        nf = r * (n - 1) + 1
        uf = np.linspace(np.log(in_grid.x_min), np.log(in_grid.x_max), nf)
        yf = np.exp(uf)
        wf = log_trapezoid_weights(nf, uf[1] - uf[0]) * yf
        S = CubicSpline(in_grid.u, np.eye(n))(uf)
        mat = _kernel_block(lam, out_grid.points, yf, wf) @ S
    mat.setflags(write=False)
    return HankelOperator(float(lam), in_grid, out_grid, mat, r)


@functools.lru_cache(maxsize=16)
def cached_hankel(lam: float, grid: RadialGrid, oversample: int = SPECTRAL_OVERSAMPLE) -> HankelOperator:
    return build_hankel(lam, grid, grid, oversample)


def hankel_apply(op: HankelOperator, f) -> RadialField:
    f = as_field(f, op.in_grid)
    return RadialField(op.out_grid, op.matrix @ f.values, {"transform": f"h_{op.lam:g}"})


def apply_multiplier(m: Callable[[np.ndarray], np.ndarray], f, lam: float,
                     oversample: int = SPECTRAL_OVERSAMPLE) -> RadialField:
    """h_lam(m(y) h_lam(f)) on the grid of f."""
    f = as_field(f)
    H = cached_hankel(float(lam), f.grid, int(oversample))
    mv = np.asarray(m(f.grid.points))
    hf = H.matrix @ f.values
    mv = mv.reshape(mv.shape + (1,) * (hf.ndim - mv.ndim))
    return f.with_values(H.matrix @ (mv * hf))


def _divided_2d_du(g: np.ndarray, u: np.ndarray) -> np.ndarray:
    # (1/x) d/dx = 2 d/du with u = x^2
    return 2.0 * np.gradient(g, u, edge_order=2)


def seminorm_eta(f, m: int, k: int, lam: float | None = None) -> float:
    """Grid supremum of (1 + x^2)^m |((1/x) d/dx)^k (x^-lam f)|."""
    f = as_field(f)
    if k > 3 or k < 0 or m < 0:
        raise InvalidBoundsError("seminorm_eta supports 0 <= k <= 3 and m >= 0")
    if lam is None:
        lam = f.descriptor.get("lam") if isinstance(f, TestFunction) else None
        if lam is None:
            raise InvalidBoundsError("lambda is required for fields without a descriptor")
    if k == 3 and f.grid.n < 512:
        warnings.warn("third divided difference is unstable below 512 nodes", RuntimeWarning, stacklevel=2)
    x = f.grid.points
    g = np.asarray(f.values, dtype=complex if np.iscomplexobj(f.values) else float)
    g = g * (x ** (-lam)).reshape((-1,) + (1,) * (g.ndim - 1))
    u = x * x
    for _ in range(k):
        g = np.apply_along_axis(_divided_2d_du, 0, g, u)
    mag = np.abs(g) if g.ndim == 1 else np.linalg.norm(g, axis=1)
    return float(np.max((1.0 + x * x) ** m * mag))


def indicator_samples(grid: RadialGrid, lo: float, hi: float) -> np.ndarray:
    """Fraction of each node's log-dual cell that lies in (lo, hi)."""
    u = grid.u
    h = grid.h
    left = np.exp(np.maximum(u - 0.5 * h, u[0]))
    right = np.exp(np.minimum(u + 0.5 * h, u[-1]))
    left[0], right[-1] = grid.x_min, grid.x_max
    lo = max(lo, 0.0)
    ov = np.clip(np.minimum(right, hi) - np.maximum(left, lo), 0.0, None)
    return ov / (right - left)


FAMILIES = ("slambda_gauss", "atom_ai", "atom_aii", "bmo_log", "indicator")


def make_test_function(family: str, grid: RadialGrid | None = None, **params) -> TestFunction:
    """Sample a named test-function family on ``grid``.

    slambda_gauss: x^lam poly(x^2) exp(-a x^2); params lam, a, poly (coefficients in x^2).
    atom_ai: (b / delta) chi_(0, delta); params delta, b.
    atom_aii: (b / |I|)(chi_(lo, mid) - chi_(mid, hi)); params interval, b.
    bmo_log: log x.  indicator: chi_(lo, hi); param interval.
    """
    grid = make_radial_grid() if grid is None else grid
    x = grid.points
    desc = {"family": family, **params}
    b = params.get("b")
    if family == "slambda_gauss":
        lam = float(params.get("lam", 1.0))
        a = float(params.get("a", 1.0))
        poly = np.atleast_1d(params.get("poly", [1.0])).astype(float)
        vals = x ** lam * np.polynomial.polynomial.polyval(x * x, poly) * np.exp(-a * x * x)
        desc.update(lam=lam, a=a, poly=poly.tolist())
    elif family == "atom_ai":
        delta = float(params.get("delta", 1.0))
        vals = indicator_samples(grid, 0.0, delta) / delta
    elif family == "atom_aii":
        lo, hi = map(float, params.get("interval", (1.0, 2.0)))
        mid = 0.5 * (lo + hi)
        vals = (indicator_samples(grid, lo, mid) - indicator_samples(grid, mid, hi)) / (hi - lo)
    elif family == "bmo_log":
        vals = np.log(x)
    elif family == "indicator":
        lo, hi = map(float, params.get("interval", (0.0, 1.0)))
        vals = indicator_samples(grid, lo, hi)
    else:
        raise UnknownFamilyError(family)
    if b is not None:
        bv = np.asarray(b, dtype=complex)
        vals = vals[:, None] * bv[None, :]
    return TestFunction(grid, vals, {}, desc)


def gauss_transform(lam: float, y: np.ndarray, a: float = 1.0) -> np.ndarray:
    """h_lam of x^lam e^{-a x^2} in closed form: y^lam e^{-y^2/4a} / (2a)^{lam+1/2}."""
    return y ** lam * np.exp(-y * y / (4.0 * a)) / (2.0 * a) ** (lam + 0.5)


def hankel_consistency_check(lam: float, n: int = 2048, tol: float = 1e-3, x_min: float = 1e-3,
                             x_max: float = 50.0):
    """Self-inverse, Plancherel and closed-form checks of h_lam on x^lam e^{-x^2}."""
    from .report import deviation_report

    t0 = time.perf_counter()
    grid = make_radial_grid(x_min, x_max, n)
    f = make_test_function("slambda_gauss", grid, lam=lam)
    H = cached_hankel(float(lam), grid)
    hf = H.matrix @ f.values
    back = H.matrix @ hf
    l2 = lambda v: float(np.sqrt(grid.integrate(np.abs(v) ** 2)))
    nf = l2(f.values)
    inverse = l2(back - f.values) / nf
    plancherel = abs(l2(hf) / nf - 1.0)
    exact = l2(hf - gauss_transform(lam, grid.points)) / nf
    dev = max(inverse, plancherel, exact)
    return deviation_report("identities", f"hankel_roundtrip/lam={lam:g}/n={n}",
                            {"lam": lam, "grid": grid.to_dict(), "f": f.descriptor}, dev, tol,
                            {"self_inverse": inverse, "plancherel": plancherel, "closed_form": exact},
                            time.perf_counter() - t0)
