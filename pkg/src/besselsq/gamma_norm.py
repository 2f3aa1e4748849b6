"""gamma-radonifying norms of discretized operators H -> l^p_n."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, GridMismatchError, InvalidBoundsError
from .fields import RadialField, SpaceTimeField
from .grids import DiscreteH


@dataclass(frozen=True)
class BanachDescriptor:
    """The surrogate space l^p_n over C."""

    p: float
    n: int

    def __post_init__(self):
        if not (self.p >= 1) or int(self.n) != self.n or self.n < 1:
            raise InvalidBoundsError(f"invalid Banach descriptor p={self.p}, n={self.n}")

    @property
    def is_umd(self) -> bool:
        return 1 < self.p < np.inf

    def norm(self, v: np.ndarray, axis: int = -1) -> np.ndarray:
        a = np.abs(np.asarray(v))
        if np.isinf(self.p):
            return a.max(axis=axis)
        if self.p == 2:
            return np.sqrt((a * a).sum(axis=axis))
        return (a ** self.p).sum(axis=axis) ** (1.0 / self.p)

    def to_dict(self) -> dict:
        return {"p": float(self.p), "n": int(self.n)}


@dataclass(frozen=True, eq=False)
class DiscreteHOperator:
    """Matrix of T: H -> C^n in the normalized cell basis of a DiscreteH."""

    matrix: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


@dataclass(frozen=True)
class GammaEstimate:
    value: float
    std_error: float
    samples: int
    seed: int | None
    exact: bool


def field_to_operator(F, h: DiscreteH) -> DiscreteHOperator:
    """Column j of the operator is F(t_j) sqrt(u_j)."""
    F = np.asarray(F)
    if F.ndim == 1:
        F = F[:, None]
    if F.shape[0] != h.dim:
        raise GridMismatchError(f"profile has {F.shape[0]} time samples, expected {h.dim}")
    M = (F * np.sqrt(h.grid.logweights)[:, None]).T
    return DiscreteHOperator(np.ascontiguousarray(M))


def stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the sub-stream identified by ``key``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def _mc_norm_samples(M: np.ndarray, B: BanachDescriptor, g: np.ndarray) -> np.ndarray:
    """||M g_k||_B^2 for the columns g_k of g."""
    return B.norm(M @ g, axis=0) ** 2


def gamma_norm(T: DiscreteHOperator, B: BanachDescriptor, samples: int = 1000, seed: int = 0,
               method: str = "auto") -> GammaEstimate:
    """||T||_{gamma(H, B)}.

    ``method='auto'`` uses the exact Frobenius identity for p = 2 (and for
    n = 1, where every l^p_1 norm is the modulus) and real-Gaussian Monte
    Carlo otherwise; ``'mc'`` forces sampling.  The reported std_error is
    the delta-method error of sqrt(mean ||Mg||^2).
    """
    M = np.asarray(T.matrix)
    if not np.all(np.isfinite(M)):
        raise ValueError("operator matrix has non-finite entries")
    if M.shape[0] != B.n:
        raise DimensionMismatchError(f"operator maps into C^{M.shape[0]}, descriptor has n={B.n}")
    exact_ok = B.p == 2 or B.n == 1
    if method == "exact" or (method == "auto" and exact_ok):
        if not exact_ok:
            raise InvalidBoundsError("exact gamma norm is only available for p = 2 or n = 1")
        return GammaEstimate(float(np.sqrt(np.sum(np.abs(M) ** 2))), 0.0, 0, None, True)
    if samples < 100:
        raise InvalidBoundsError("Monte Carlo needs at least 100 samples")
    g = stream(seed).standard_normal((M.shape[1], int(samples)))
    X = _mc_norm_samples(M, B, g)
    mean = float(X.mean())
    if mean == 0.0:
        return GammaEstimate(0.0, 0.0, int(samples), int(seed), False)
    value = float(np.sqrt(mean))
    se = float(X.std(ddof=1) / np.sqrt(samples) / (2.0 * value))
    return GammaEstimate(value, se, int(samples), int(seed), False)


def covariance_factor(W: np.ndarray) -> np.ndarray:
    """L with L L^T = Cov[(Re, Im)(W g)] for W of shape (..., m, d) and real Gaussian g.

    W g is a Gaussian vector in C^d = R^{2d}, so sampling L z with z ~ N(0, I_{2d})
    reproduces its law exactly; returns shape (..., 2d, 2d).
    """
    W = np.asarray(W)
    R = np.concatenate([W.real, W.imag], axis=-1) if np.iscomplexobj(W) else np.concatenate([W, 0 * W], axis=-1)
    C = np.einsum("...mi,...mj->...ij", R, R)
    w, V = np.linalg.eigh(C)
    return V * np.sqrt(np.clip(w, 0.0, None))[..., None, :]


def batch_gamma_norms(W: np.ndarray, B: BanachDescriptor, z: np.ndarray | None = None,
                      return_se: bool = False):
    """gamma(H, B)-norms of the operators W[k] (shape (N, m, d), columns already
    weighted by sqrt(u_j)).  Exact for p = 2 or d = 1; otherwise Monte Carlo
    with the standard normal draws z of shape (N, 2d, S)."""
    W = np.asarray(W)
    d = W.shape[-1]
    if B.p == 2 or d == 1:
        v = np.sqrt(np.sum(np.abs(W) ** 2, axis=(-2, -1)))
        return (v, np.zeros_like(v)) if return_se else v
    L = covariance_factor(W)
    Y = L @ z
    X = B.norm(Y[:, :d, :] + 1j * Y[:, d:, :], axis=1) ** 2
    mean = X.mean(axis=1)
    v = np.sqrt(mean)
    if not return_se:
        return v
    with np.errstate(divide="ignore", invalid="ignore"):
        se = np.where(v > 0, X.std(axis=1, ddof=1) / np.sqrt(X.shape[1]) / (2 * v), 0.0)
    return v, se


def x_streams(seed: int, n: int, d: int, samples: int) -> np.ndarray:
    """Per-x standard normal draws of shape (n, 2d, samples), stream i keyed by (seed, i)."""
    return np.stack([stream(seed, i).standard_normal((2 * d, samples)) for i in range(n)])


def gamma_profile_norms(values: np.ndarray, logweights: np.ndarray, B: BanachDescriptor,
                        samples: int = 1000, seed: int = 0, method: str = "auto",
                        return_se: bool = False):
    """gamma-norms of the time profiles values[:, i, :] for every x-index i.

    ``method='auto'`` is exact for p = 2 and n = 1; Monte Carlo draws for
    x-index i come from the stream keyed by (seed, i), so results do not
    depend on evaluation order.
    """
    V = np.asarray(values)
    if V.ndim == 2:
        V = V[:, :, None]
    if V.shape[2] != B.n:
        raise DimensionMismatchError(f"field has {V.shape[2]} components, descriptor has n={B.n}")
    W = np.transpose(V * np.sqrt(np.asarray(logweights))[:, None, None], (1, 0, 2))
    exact = method == "exact" or (method == "auto" and (B.p == 2 or B.n == 1))
    if exact:
        Bx = BanachDescriptor(2, B.n)
        return batch_gamma_norms(W, Bx, None, return_se)
    if samples < 100:
        raise InvalidBoundsError("Monte Carlo needs at least 100 samples")
    return batch_gamma_norms(W, B, x_streams(seed, W.shape[0], B.n, samples), return_se)


def stream_seed(seed: int, i: int) -> int:
    """Deterministic integer seed for sub-stream i."""
    return int(np.random.SeedSequence([int(seed), int(i)]).generate_state(1, np.uint64)[0] >> np.uint64(1))


def gamma_field_norms(field: SpaceTimeField, B: BanachDescriptor, samples: int = 1000, seed: int = 0,
                      method: str = "auto") -> RadialField:
    """x_i -> ||field(., x_i)||_{gamma(H, B)}."""
    vals, se = gamma_profile_norms(field.values, field.tgrid.logweights, B, samples, seed, method, True)
    return RadialField(field.xgrid, vals, {"std_error": se, "banach": B.to_dict(), "seed": seed})


def _test_operator(n: int, m: int, seed: int) -> DiscreteHOperator:
    rng = stream(seed, 0xC0FFEE)
    return DiscreteHOperator(rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m)))


def gamma_mc_check(trials: int = 200, samples: int = 1000, seed: int = 0, n: int = 4, m: int = 32,
                   tol: float = 0.99):
    """Coverage of exact p = 2 values by MC estimate +- 3 std_error over seeded trials."""
    import time

    from .report import Report

    t0 = time.perf_counter()
    T = _test_operator(n, m, seed)
    B = BanachDescriptor(2, n)
    exact = gamma_norm(T, B).value
    hits, z = 0, []
    for k in range(trials):
        est = gamma_norm(T, B, samples, stream_seed(seed, k), method="mc")
        zk = (est.value - exact) / est.std_error
        z.append(zk)
        hits += abs(zk) <= 3.0
    cover = hits / trials
    return Report("gamma", f"mc_coverage/p=2/n={n}", {"trials": trials, "samples": samples, "n": n, "m": m},
                  {"coverage": cover, "exact": exact, "z_mean": float(np.mean(z)), "z_std": float(np.std(z))},
                  cover, tol, cover >= tol, time.perf_counter() - t0, seed)


def gamma_scalar_check(profile: np.ndarray, logweights: np.ndarray, ps=(1.5, 2.0, 3.0, 4.0, np.inf),
                       tol: float = 1e-12):
    """n = 1: the gamma-norm on the exact path equals the H-norm for every p."""
    import time

    from .report import deviation_report

    t0 = time.perf_counter()
    h = float(np.sqrt(np.sum(np.abs(profile) ** 2 * logweights)))
    M = DiscreteHOperator((np.asarray(profile) * np.sqrt(logweights))[None, :])
    vals = {f"p={p:g}": gamma_norm(M, BanachDescriptor(p, 1), method="exact").value for p in ps}
    dev = max(abs(v - h) for v in vals.values()) / h
    return deviation_report("gamma", "scalar_identification/n=1", {"ps": [float(p) for p in ps]}, dev, tol,
                            {"h_norm": h, **vals}, time.perf_counter() - t0)
