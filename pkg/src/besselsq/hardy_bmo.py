"""Atoms, and the H^1_o and BMO_o norm functionals on finite families."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidAtomError, InvalidBoundsError
from .fields import GCurlField, RadialField, SpaceTimeField, as_field
from .gamma_norm import BanachDescriptor, batch_gamma_norms, gamma_profile_norms, x_streams
from .grids import RadialGrid, TimeGrid, make_time_grid
from .hankel import indicator_samples
from .poisson import PoissonKernelEval, maximal_p

Norm = Callable[[np.ndarray], np.ndarray]


def _row_norms(values: np.ndarray, norm: Norm | None) -> np.ndarray:
    if norm is not None:
        return np.asarray(norm(values), dtype=float)
    return np.abs(values) if values.ndim == 1 else np.linalg.norm(values, axis=1)


def banach_norm_hook(B: BanachDescriptor) -> Norm:
    return lambda v: B.norm(v, axis=-1) if np.ndim(v) == 2 else np.abs(v)


# ---------------------------------------------------------------- atoms

@dataclass(frozen=True)
class Atom:
    """(Ai): (b / delta) chi_(0, delta).  (Aii): mean-zero, supported in I = (lo, hi).

    Aii atoms default to the two-step profile chi_(lo, mid) - chi_(mid, hi);
    ``profile`` replaces it by any callable of x, which is then centred and
    scaled on the grid so that the size and cancellation conditions hold for
    the discrete measure.
    """

    kind: str
    b: tuple = (1.0,)
    delta: float | None = None
    interval: tuple[float, float] | None = None
    q: float = np.inf
    profile: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == "Ai":
            if self.delta is None or not self.delta > 0:
                raise InvalidAtomError("an Ai atom needs delta > 0")
        elif self.kind == "Aii":
            if self.interval is None or not 0 < self.interval[0] < self.interval[1]:
                raise InvalidAtomError("an Aii atom needs an interval 0 < lo < hi")
            if not self.q > 1:
                raise InvalidAtomError("an Aii atom needs q > 1")
        else:
            raise InvalidAtomError(f"unknown atom kind {self.kind!r}")

    @property
    def bvec(self) -> np.ndarray:
        return np.asarray(self.b, dtype=complex)

    def sample(self, grid: RadialGrid, B: BanachDescriptor | None = None) -> np.ndarray:
        """(n, d) samples; raises InvalidAtomError if ||b||_B != 1."""
        bv = self.bvec
        B = B or BanachDescriptor(2, bv.size)
        if bv.size != B.n or abs(B.norm(bv) - 1.0) > 1e-12:
            raise InvalidAtomError("b must be a unit vector of the target space")
        if self.kind == "Ai":
            s = indicator_samples(grid, 0.0, self.delta) / self.delta
        else:
            s = self._aii_scalar(grid)
        return s[:, None] * bv[None, :]

    def _aii_scalar(self, grid: RadialGrid) -> np.ndarray:
        lo, hi = self.interval
        if hi > grid.x_max or lo < grid.x_min:
            raise InvalidAtomError("atom support leaves the grid")
        length = hi - lo
        chi = indicator_samples(grid, lo, hi)
        w = grid.weights * chi
        if self.profile is None:
            mid = 0.5 * (lo + hi)
            p = indicator_samples(grid, lo, mid)
            m = indicator_samples(grid, mid, hi)
            s = p / (grid.weights @ p) - m / (grid.weights @ m)
            s *= 0.5
        else:
            g = np.asarray(self.profile(grid.points), dtype=float)
            s = (g - (w @ g) / w.sum()) * chi
            if not np.any(s):
                raise InvalidAtomError("profile is constant on the interval")
        # scale so that ||s||_{L^q} <= |I|^{1/q - 1} on the grid
        if np.isinf(self.q):
            size = np.abs(s).max()
        else:
            size = (grid.weights @ np.abs(s) ** self.q) ** (1.0 / self.q)
        bound = length ** (1.0 / self.q - 1.0)
        return s * (bound / size)


@dataclass(frozen=True, eq=False)
class AtomicSum:
    field: RadialField
    certificate: float


def make_atomic_sum(atoms, coeffs, grid: RadialGrid, B: BanachDescriptor | None = None) -> AtomicSum:
    """Sampled sum of coeff_j a_j; the certificate sum |coeff_j| bounds the atomic norm."""
    atoms, coeffs = list(atoms), np.asarray(coeffs, dtype=complex)
    if len(atoms) != coeffs.size or not atoms:
        raise InvalidAtomError("need one coefficient per atom")
    vals = sum(c * a.sample(grid, B) for a, c in zip(atoms, coeffs))
    if vals.shape[1] == 1:
        vals = vals[:, 0]
    cert = float(np.abs(coeffs).sum())
    return AtomicSum(RadialField(grid, vals, {"certificate": cert}), cert)


# ---------------------------------------------------------------- H^1_o

def default_s_grid(grid: RadialGrid, per_decade: int = 6) -> TimeGrid:
    """Heights for the maximal function, from below the grid scale to beyond x_max."""
    lo, hi = 0.1 * grid.x_min, 10.0 * grid.x_max
    m = int(np.ceil(per_decade * np.log10(hi / lo))) + 1
    return make_time_grid(lo, hi, m)


def h1o_norm(f, lam: float, s_grid: TimeGrid | None = None, norm: Norm | None = None,
             B: BanachDescriptor | None = None, samples: int = 400, seed: int = 0) -> float:
    """L^1 norm of the discrete Poisson maximal function of f.

    ``f`` is a scalar or vector RadialField, or a SpaceTimeField whose
    x-slices are H-valued (a square-function profile).  The supremum over
    s > 0 runs over ``s_grid`` together with s -> 0 (f itself), so the value
    is a lower bound of the true norm up to quadrature.
    """
    if isinstance(f, SpaceTimeField):
        prof = gamma_maximal_profile(f, B, s_grid, samples, seed)
        return float(f.xgrid.integrate(prof))
    f = as_field(f)
    s_grid = s_grid or default_s_grid(f.grid)
    M = maximal_p(PoissonKernelEval(lam), f, s_grid, norm)
    prof = np.maximum(M.values, _row_norms(f.values, norm))
    return float(f.grid.integrate(prof))


def _semigroup_exponent(F: SpaceTimeField) -> float:
    if isinstance(F, GCurlField):
        return 1.0
    if "beta" not in F.meta:
        raise InvalidBoundsError("square-function field carries no order")
    return float(F.meta["beta"])


def _weighted_slices(V: np.ndarray, lw: np.ndarray) -> np.ndarray:
    """(m, n[, d]) samples -> (n, m, d) operators with columns scaled by sqrt(u_j)."""
    V = V if V.ndim == 3 else V[:, :, None]
    return np.transpose(V * np.sqrt(lw)[:, None, None], (1, 0, 2))


def shifted_profile(F: SpaceTimeField, s: float, spline: CubicSpline | None = None) -> np.ndarray:
    """P_s applied in x to a square-function field.

    P_s commutes with the time derivatives, so P_s F(t) = (t / (t + s))^beta F(t + s);
    F(t + s) is interpolated in log t and set to zero beyond the time grid.
    Returns shape (m, n, d).
    """
    beta = _semigroup_exponent(F)
    t = F.tgrid.points
    V = F.values if F.values.ndim == 3 else F.values[:, :, None]
    if s == 0:
        return V
    spline = spline or CubicSpline(np.log(t), V, axis=0)
    out = np.zeros_like(V)
    ts = t + s
    inside = ts <= t[-1]
    out[inside] = spline(np.log(ts[inside])) * ((t[inside] / ts[inside]) ** beta)[:, None, None]
    return out


def gamma_maximal_profile(F: SpaceTimeField, B: BanachDescriptor | None, s_grid=None,
                          samples: int = 400, seed: int = 0) -> np.ndarray:
    """x -> max over s of the gamma(H, B)-norm of P_s F(., x), including s = 0.

    Monte Carlo draws are keyed per x-index and shared across s.
    """
    d = F.values.shape[2] if F.values.ndim == 3 else 1
    B = B or BanachDescriptor(2, d)
    if s_grid is None:
        s_grid = default_s_grid(F.xgrid, per_decade=4)
    s_vals = np.concatenate([[0.0], s_grid.points if isinstance(s_grid, TimeGrid) else np.atleast_1d(s_grid)])
    V = F.values if F.values.ndim == 3 else F.values[:, :, None]
    spline = CubicSpline(np.log(F.tgrid.points), V, axis=0)
    z = None if (B.p == 2 or d == 1) else x_streams(seed, F.xgrid.n, d, samples)
    best = np.zeros(F.xgrid.n)
    for s in s_vals:
        W = _weighted_slices(shifted_profile(F, s, spline), F.tgrid.logweights)
        best = np.maximum(best, batch_gamma_norms(W, B, z))
    return best


# ---------------------------------------------------------------- BMO_o

@dataclass(frozen=True)
class IntervalFamily:
    """Intervals (0, r) for (Bi) and (r, s) for (Bii)."""

    zero_based: tuple[float, ...]
    pairs: tuple[tuple[float, float], ...]

    def check(self, grid: RadialGrid) -> None:
        for r in self.zero_based:
            if not grid.x_min < r <= grid.x_max:
                raise InvalidBoundsError(f"interval (0, {r}) leaves the grid")
        for r, s in self.pairs:
            if not (grid.x_min <= r < s <= grid.x_max):
                raise InvalidBoundsError(f"interval ({r}, {s}) leaves the grid")

    def to_dict(self) -> dict:
        return {"zero_based": list(self.zero_based), "pairs": [list(p) for p in self.pairs]}


def dyadic_family(grid: RadialGrid, kmin: int = -6, kmax: int = 4, ratios=(2, 4, 8)) -> IntervalFamily:
    """Dyadic (0, r) and (r, s) with s/r in ``ratios``, restricted to the grid."""
    rs = [2.0 ** k for k in range(kmin, kmax + 1)]
    zero = tuple(r for r in rs if grid.x_min < r <= grid.x_max)
    pairs = tuple((r, r * q) for r in rs for q in ratios if grid.x_min <= r and r * q <= grid.x_max)
    return IntervalFamily(zero, pairs)


@dataclass(frozen=True)
class BMOValue:
    value: float
    bi: float
    bii: float
    bi_terms: np.ndarray = field(repr=False)
    bii_terms: np.ndarray = field(repr=False)


def _interval_weights(grid: RadialGrid, lo: float, hi: float) -> np.ndarray:
    w = grid.weights * indicator_samples(grid, lo, hi)
    return w / w.sum()


def bmoo_norm(f, family: IntervalFamily | None = None, norm: Norm | None = None,
              B: BanachDescriptor | None = None, samples: int = 400, seed: int = 0,
              detail: bool = False):
    """max over the family of (Bi) averages and (Bii) mean oscillations.

    For a SpaceTimeField the pointwise norm is the gamma(H, B)-norm of the
    x-slice, and the interval mean is the mean operator; Monte Carlo draws
    are keyed per x-index as in gamma_profile_norms.
    """
    grid = f.xgrid if isinstance(f, SpaceTimeField) else as_field(f).grid
    family = family or dyadic_family(grid)
    family.check(grid)
    if isinstance(f, SpaceTimeField):
        Y = _weighted_slices(f.values, f.tgrid.logweights)          # (n, m, d)
        d = Y.shape[2]
        B = B or BanachDescriptor(2, d)
        z = None if (B.p == 2 or d == 1) else x_streams(seed, grid.n, d, samples)

        def pnorm(v, idx):
            return batch_gamma_norms(v, B, None if z is None else z[idx])
    else:
        f = as_field(f)
        Y = f.values if f.values.ndim == 2 else f.values[:, None]

        def pnorm(v, idx):
            return _row_norms(v if v.shape[1] > 1 else v[:, 0], norm)
    allx = np.arange(grid.n)
    absf = pnorm(Y, allx)
    bi = np.array([_interval_weights(grid, 0.0, r) @ absf for r in family.zero_based])
    bii = []
    for r, s in family.pairs:
        w = _interval_weights(grid, r, s)
        idx = np.nonzero(w)[0]
        avg = np.tensordot(w[idx], Y[idx], axes=(0, 0))
        bii.append(w[idx] @ pnorm(Y[idx] - avg[None], idx))
    bii = np.array(bii)
    v_bi = float(bi.max()) if bi.size else 0.0
    v_bii = float(bii.max()) if bii.size else 0.0
    res = BMOValue(max(v_bi, v_bii), v_bi, v_bii, bi, bii)
    return res if detail else res.value


def gamma_profile(F: SpaceTimeField, B: BanachDescriptor | None = None, samples: int = 400,
                  seed: int = 0) -> np.ndarray:
    """x -> gamma(H, B)-norm of F(., x)."""
    d = F.values.shape[2] if F.values.ndim == 3 else 1
    B = B or BanachDescriptor(2, d)
    return gamma_profile_norms(F.values, F.tgrid.logweights, B, samples, seed)


# ---------------------------------------------------------------- calibration checks

def h1o_atom_check(lams=(1.0, 2.0), sizes=(256, 512), tol: float = 0.05):
    """H^1_o value of chi_(0,1): stable under grid doubling for each lam, and the
    lam-ratio (a bracket, the norms being equivalent) stable as well."""
    import time

    from .grids import make_radial_grid
    from .report import Report

    t0 = time.perf_counter()
    vals = {}
    for lam in lams:
        vals[lam] = [h1o_norm(RadialField(g, indicator_samples(g, 0.0, 1.0)), lam)
                     for g in (make_radial_grid(n=n) for n in sizes)]
    changes = {f"lam={lam:g}": abs(v[-1] - v[0]) / v[-1] for lam, v in vals.items()}
    ratios = [vals[lams[0]][i] / vals[lams[-1]][i] for i in range(len(sizes))]
    changes["lam_ratio"] = abs(ratios[-1] - ratios[0]) / ratios[-1]
    worst = max(changes.values())
    return Report("equivalence", "h1o_atom/chi(0,1)", {"lams": list(lams), "sizes": list(sizes)},
                  {"values": {f"lam={l:g}": v for l, v in vals.items()}, "lam_ratio": ratios, "changes": changes},
                  worst, tol, worst < tol, time.perf_counter() - t0, None, worst < tol)


def bmoo_log_check(kmax: int = 10, n: int = 1024, tol: float = 1e-2):
    """(Bi) averages of log x over (0, 2^-k): strictly increasing in k and equal to 1 + k log 2."""
    import time

    from .grids import make_radial_grid
    from .report import Report

    t0 = time.perf_counter()
    grid = make_radial_grid(1e-5, 50.0, n)
    fam = IntervalFamily(tuple(2.0 ** -k for k in range(1, kmax + 1)), ())
    res = bmoo_norm(RadialField(grid, np.log(grid.points)), fam, detail=True)
    exact = 1.0 + np.arange(1, kmax + 1) * np.log(2.0)
    dev = float(np.max(np.abs(res.bi_terms - exact) / exact))
    increasing = bool(np.all(np.diff(res.bi_terms) > 0))
    ok = dev <= tol and increasing
    return Report("equivalence", "bmoo_reject/log", {"kmax": kmax, "grid": grid.to_dict(), "family": fam.to_dict()},
                  {"bi_terms": res.bi_terms, "analytic": exact, "increasing": increasing, "rejected": ok},
                  dev, tol, ok, time.perf_counter() - t0)


def bmoo_step_check(sizes=(512, 1024), tol: float = 0.02):
    """chi_(0,1) - chi_(1,2) over the default dyadic family: finite and refinement-stable."""
    import time

    from .grids import make_radial_grid
    from .report import Report

    t0 = time.perf_counter()
    vals = []
    for n in sizes:
        g = make_radial_grid(n=n)
        f = indicator_samples(g, 0.0, 1.0) - indicator_samples(g, 1.0, 2.0)
        vals.append(bmoo_norm(RadialField(g, f), dyadic_family(g)))
    change = abs(vals[-1] - vals[0]) / vals[-1]
    ok = bool(np.all(np.isfinite(vals)) and change < tol)
    return Report("equivalence", "bmoo_accept/step", {"sizes": list(sizes)}, {"values": vals, "change": change},
                  change, tol, ok, time.perf_counter() - t0, None, change < tol)
