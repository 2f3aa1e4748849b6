"""Ratio studies for the square-function norm equivalences.

For a family of C^d-valued functions f_k, the study compares the H^1_o or
BMO_o norm of the gamma(H, B)-valued profile of G^{lam,delta}(f_k) (or of
calG^lam(f_k)) with the same norm of f_k itself.  The constants in the
equivalences are not explicit, so a study reports the ratio vector, its
spread max/min, and whether that spread survives grid doubling.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .fields import GCurlField, RadialField, SquareFunctionField
from .fracderiv import g_field, gcurl_field
from .gamma_norm import BanachDescriptor
from .grids import RadialGrid, TimeGrid, make_radial_grid, make_time_grid
from .hankel import indicator_samples
from .hardy_bmo import banach_norm_hook, bmoo_norm, default_s_grid, dyadic_family, h1o_norm
from .poisson import kernel_stack
from .report import Report

# (name, builder(grid, lam) -> samples)
def _step(grid, lo, hi):
    mid = 0.5 * (lo + hi)
    return (indicator_samples(grid, lo, mid) - indicator_samples(grid, mid, hi)) / (hi - lo)


SCALAR_BASIS = (
    ("ai_1", lambda g, lam: indicator_samples(g, 0.0, 1.0)),
    ("ai_quarter", lambda g, lam: 4.0 * indicator_samples(g, 0.0, 0.25)),
    ("ai_4", lambda g, lam: 0.25 * indicator_samples(g, 0.0, 4.0)),
    ("aii_1_2", lambda g, lam: _step(g, 1.0, 2.0)),
    ("aii_quarter", lambda g, lam: _step(g, 0.25, 0.75)),
    ("gauss_0.3", lambda g, lam: (g.points / 0.3) ** lam * np.exp(-(g.points / 0.3) ** 2)),
    ("gauss_1", lambda g, lam: g.points ** lam * np.exp(-g.points ** 2)),
    ("gauss_3", lambda g, lam: (g.points / 3.0) ** lam * np.exp(-(g.points / 3.0) ** 2)),
)

# each member is a pair of basis functions carried by two fixed directions
FAMILY_PAIRS = ((0, 6), (1, 5), (2, 7), (3, 6), (4, 5), (0, 3), (1, 4), (2, 3), (5, 7), (6, 7), (0, 4), (1, 7))
FAMILY_SEED = 20240611


def family_coefficients(d: int = 4, seed: int = FAMILY_SEED) -> list[np.ndarray]:
    """Coefficient matrices C_k (K x d): f_k = sum_j phi_j C_k[j]."""
    rng = np.random.default_rng(seed)
    out = []
    for a, b in FAMILY_PAIRS:
        C = np.zeros((len(SCALAR_BASIS), d), dtype=complex)
        C[a] = rng.normal(size=d) + 1j * rng.normal(size=d)
        C[b] = rng.normal(size=d) + 1j * rng.normal(size=d)
        C /= np.abs(C).max()
        out.append(C)
    return out


def scalar_basis(grid: RadialGrid, lam: float) -> RadialField:
    return RadialField(grid, np.stack([b(grid, lam) for _, b in SCALAR_BASIS], axis=1),
                       {"names": [n for n, _ in SCALAR_BASIS]})


@dataclass
class StudyFields:
    """Square-function fields of the scalar basis at one (lam, grid) level."""

    lam: float
    xgrid: RadialGrid
    tgrid: TimeGrid
    basis: RadialField
    G: dict = field(default_factory=dict)          # delta -> (m, n, K)
    gcurl: np.ndarray | None = None
    P: np.ndarray | None = None                    # (S, n, K) Poisson stack for the denominators
    s_grid: TimeGrid | None = None


def build_fields(lam: float, xgrid: RadialGrid, tgrid: TimeGrid, deltas=(0.5, 1.0, 1.5, 2.0),
                 with_gcurl: bool = True, path: str = "kernel") -> StudyFields:
    basis = scalar_basis(xgrid, lam)
    sf = StudyFields(lam, xgrid, tgrid, basis)
    for dlt in deltas:
        sf.G[float(dlt)] = g_field(basis, lam, dlt, tgrid, path).values
    if with_gcurl:
        sf.gcurl = gcurl_field(basis, lam, tgrid, path).values
    sf.s_grid = default_s_grid(xgrid)
    sf.P = kernel_stack(_k.KIND_POISSON, lam, 0, sf.s_grid.points, basis)
    return sf


def _member_field(sf: StudyFields, C: np.ndarray, delta: float | None):
    vals = np.tensordot(sf.G[delta] if delta is not None else sf.gcurl, C, axes=(2, 0))
    if delta is None:
        return GCurlField(sf.tgrid, sf.xgrid, vals, {"lam": sf.lam})
    return SquareFunctionField(sf.tgrid, sf.xgrid, vals, {"lam": sf.lam, "beta": delta})


def denominators(sf: StudyFields, coeffs, B: BanachDescriptor, E: str) -> np.ndarray:
    hook = banach_norm_hook(B)
    out = []
    for C in coeffs:
        f = sf.basis.values @ C
        if E == "H1o":
            prof = hook(f)
            for j in range(sf.P.shape[0]):
                prof = np.maximum(prof, hook(sf.P[j] @ C))
            out.append(float(sf.xgrid.integrate(prof)))
        else:
            out.append(bmoo_norm(RadialField(sf.xgrid, f), dyadic_family(sf.xgrid), norm=hook))
    return np.array(out)


def numerators(sf: StudyFields, coeffs, B: BanachDescriptor, E: str, delta: float | None,
               samples: int = 400, seed: int = 0) -> np.ndarray:
    out = []
    for k, C in enumerate(coeffs):
        F = _member_field(sf, C, delta)
        if E == "H1o":
            out.append(h1o_norm(F, sf.lam, B=B, samples=samples, seed=seed + k))
        else:
            out.append(bmoo_norm(F, dyadic_family(sf.xgrid), B=B, samples=samples, seed=seed + k))
    return np.array(out)


DEFAULT_LEVELS = ((256, 128), (512, 256))


def level_grids(levels=DEFAULT_LEVELS):
    return [(make_radial_grid(1e-3, 50.0, n), make_time_grid(1e-3, 50.0, m)) for n, m in levels]


def equivalence_report(E: str, lam: float, delta: float | None, B: BanachDescriptor,
                       ratios: list[np.ndarray], levels, tol: float = 0.15, runtime: float = 0.0,
                       seed: int = 0, samples: int = 400) -> Report:
    """Two-sided study (delta given): min > 0, finite max, max/min stable.
    One-sided calG study (delta None): finite, positive max ratio, stable."""
    variant = "calG" if delta is None else f"delta={delta:g}"
    case = f"{E}/lam={lam:g}/{variant}/p={B.p:g},n={B.n}"
    stats = []
    for r in ratios:
        stats.append({"min": float(r.min()), "max": float(r.max()), "spread": float(r.max() / r.min())
                      if r.min() > 0 else float("inf"), "ratios": r})
    key = "max" if delta is None else "spread"
    a, b = stats[0][key], stats[-1][key]
    change = abs(b - a) / abs(b) if np.isfinite(b) and b else float("inf")
    ok = all(np.all(np.isfinite(s["ratios"])) and s["min"] > 0 for s in stats) and change < tol
    return Report("equivalence", case,
                  {"E": E, "lam": lam, "delta": delta, "variant": variant, "banach": B.to_dict(),
                   "levels": [list(l) for l in levels], "family": [list(p) for p in FAMILY_PAIRS],
                   "basis": [n for n, _ in SCALAR_BASIS], "samples": samples},
                  {"levels": stats, "change": change}, change, tol, ok, runtime, seed, change < tol)


def equivalence_study(lams=(1.0, 2.0), deltas=(0.5, 1.0, 1.5, 2.0), banach=((2, 4), (4, 4)),
                      spaces=("H1o", "BMOo"), levels=DEFAULT_LEVELS, samples: int = 400, seed: int = 0,
                      with_gcurl: bool = True, path: str = "kernel") -> list[Report]:
    """Every (E, lam, delta or calG, B) ratio table across the grid levels."""
    reports = []
    grids = level_grids(levels)
    Bs = [BanachDescriptor(p, n) for p, n in banach]
    for lam in lams:
        t0 = time.perf_counter()
        fields = [build_fields(lam, xg, tg, deltas, with_gcurl, path) for xg, tg in grids]
        build_time = time.perf_counter() - t0
        for B in Bs:
            coeffs = family_coefficients(B.n)
            for E in spaces:
                dens = [denominators(sf, coeffs, B, E) for sf in fields]
                variants = list(deltas) + ([None] if with_gcurl else [])
                for dlt in variants:
                    t1 = time.perf_counter()
                    ratios = [numerators(sf, coeffs, B, E, dlt, samples, seed) / den
                              for sf, den in zip(fields, dens)]
                    reports.append(equivalence_report(E, lam, dlt, B, ratios, levels, runtime=
                                                      time.perf_counter() - t1 + build_time / len(variants),
                                                      seed=seed, samples=samples))
    return reports
