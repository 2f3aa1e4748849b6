"""Log-spaced grids, quadrature weights and the discretized space L^2(dt/t)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, InvalidBoundsError

# Gregory end corrections for the trapezoid rule (third order); the weights
# sum to the same total as the trapezoid, so constants integrate exactly.
_GREGORY_END = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])


def log_trapezoid_weights(n: int, h: float) -> np.ndarray:
    """Weights in the log variable u for n equispaced nodes with spacing h."""
    c = np.ones(n)
    if n >= 6:
        c[:3] = _GREGORY_END
        c[-3:] = _GREGORY_END[::-1]
    else:
        c[0] = c[-1] = 0.5
    return h * c


def _check_bounds(lo: float, hi: float, n: int, nmin: int) -> None:
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo <= 0 or hi <= lo:
        raise InvalidBoundsError(f"need 0 < lo < hi, got ({lo}, {hi})")
    if int(n) != n or n < nmin:
        raise InvalidBoundsError(f"need at least {nmin} nodes, got {n}")


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Log-uniform nodes on [x_min, x_max] with weights for the measure dx."""

    points: np.ndarray
    weights: np.ndarray
    x_min: float
    x_max: float
    h: float = field(repr=False)

    @property
    def n(self) -> int:
        return self.points.size

    @property
    def u(self) -> np.ndarray:
        return np.log(self.points)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Quadrature of samples (first axis = grid) against dx."""
        values = np.asarray(values)
        if values.shape[0] != self.n:
            raise GridMismatchError("samples do not match the radial grid")
        return np.tensordot(self.weights, values, axes=(0, 0))

    def same_as(self, other: "RadialGrid") -> bool:
        return self is other or (
            self.n == other.n and np.array_equal(self.points, other.points)
        )

    def refined(self) -> "RadialGrid":
        return make_radial_grid(self.x_min, self.x_max, 2 * self.n)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n": self.n}


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Log-uniform nodes on [t_min, t_max] with weights for dt/t."""

    points: np.ndarray
    logweights: np.ndarray
    t_min: float
    t_max: float
    h: float = field(repr=False)

    @property
    def m(self) -> int:
        return self.points.size

    def same_as(self, other: "TimeGrid") -> bool:
        return self is other or (
            self.m == other.m and np.array_equal(self.points, other.points)
        )

    def refined(self) -> "TimeGrid":
        return make_time_grid(self.t_min, self.t_max, 2 * self.m)

    def to_dict(self) -> dict:
        return {"t_min": self.t_min, "t_max": self.t_max, "m": self.m}


def make_radial_grid(x_min: float = 1e-3, x_max: float = 50.0, n: int = 512) -> RadialGrid:
    _check_bounds(x_min, x_max, n, 8)
    u = np.linspace(np.log(x_min), np.log(x_max), int(n))
    h = float(u[1] - u[0])
    x = np.exp(u)
    x[0], x[-1] = x_min, x_max
    w = log_trapezoid_weights(int(n), h) * x
    for arr in (x, w):
        arr.setflags(write=False)
    return RadialGrid(x, w, float(x_min), float(x_max), h)


def make_time_grid(t_min: float = 1e-3, t_max: float = 50.0, m: int = 256) -> TimeGrid:
    _check_bounds(t_min, t_max, m, 2)
    u = np.linspace(np.log(t_min), np.log(t_max), int(m))
    h = float(u[1] - u[0])
    t = np.exp(u)
    t[0], t[-1] = t_min, t_max
    lw = log_trapezoid_weights(int(m), h)
    for arr in (t, lw):
        arr.setflags(write=False)
    return TimeGrid(t, lw, float(t_min), float(t_max), h)


@dataclass(frozen=True)
class DiscreteH:
    """Sample space of L^2((0, inf), dt/t) on a TimeGrid."""

    grid: TimeGrid

    @property
    def dim(self) -> int:
        return self.grid.m

    def inner(self, f, g) -> complex:
        return h_inner(f, g, self.grid)

    def norm(self, f) -> float:
        return float(np.sqrt(max(h_inner(f, f, self.grid).real, 0.0)))


def h_inner(f, g, grid: TimeGrid) -> complex:
    """sum_j f_j conj(g_j) u_j; extra trailing axes are summed as well."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape != g.shape or f.shape[0] != grid.m:
        raise GridMismatchError(
            f"h_inner expects equal shapes on a grid of {grid.m} nodes, got {f.shape} and {g.shape}"
        )
    w = grid.logweights.reshape((-1,) + (1,) * (f.ndim - 1))
    return complex(np.sum(f * np.conj(g) * w))


@dataclass(frozen=True, eq=False)
class ThetaRule:
    """Gauss-Legendre rule on (0, pi) for the Poisson theta-integrals."""

    nodes: np.ndarray
    weights: np.ndarray
    lam: float

    @property
    def q(self) -> int:
        return self.nodes.size

    def integrate(self, func) -> float:
        return float(np.dot(self.weights, func(self.nodes)))


def theta_rule(lam: float, q: int = 64) -> ThetaRule:
    if lam < 1:
        raise InvalidBoundsError("theta_rule requires lambda >= 1")
    if q < 16:
        raise InvalidBoundsError("theta_rule requires at least 16 nodes")
    z, w = np.polynomial.legendre.leggauss(int(q))
    nodes = 0.5 * np.pi * (z + 1.0)
    weights = 0.5 * np.pi * w
    return ThetaRule(nodes, weights, float(lam))


def padded_grid(grid: RadialGrid, decades: float = 1.0, right: float = 0.0) -> tuple[RadialGrid, slice]:
    """The grid extended by whole log steps: ``decades`` to the left, ``right`` to the right.

    Returns the padded grid and the slice selecting the original nodes.
    """
    nl = int(round(decades * np.log(10.0) / grid.h))
    nr = int(round(right * np.log(10.0) / grid.h))
    if nl == 0 and nr == 0:
        return grid, slice(0, grid.n)
    big = make_radial_grid(grid.x_min * np.exp(-nl * grid.h), grid.x_max * np.exp(nr * grid.h), grid.n + nl + nr)
    return big, slice(nl, nl + grid.n)
