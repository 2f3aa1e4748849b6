"""Sampled fields on radial and time-radial grids."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import GridMismatchError
from .grids import RadialGrid, TimeGrid


@dataclass(frozen=True, eq=False)
class RadialField:
    """Samples f(x_i) on a RadialGrid; values have shape (n,) or (n, d)."""

    grid: RadialGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim not in (1, 2) or v.shape[0] != self.grid.n:
            raise GridMismatchError(f"values of shape {v.shape} do not fit a grid of {self.grid.n} nodes")
        object.__setattr__(self, "values", v)

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 2

    @property
    def dim(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    def as_columns(self) -> np.ndarray:
        return self.values if self.is_vector else self.values[:, None]

    def with_values(self, values, **meta) -> "RadialField":
        return RadialField(self.grid, np.asarray(values), {**self.meta, **meta})

    def l2_norm(self) -> float:
        col = np.abs(self.as_columns()) ** 2
        return float(np.sqrt(max(self.grid.integrate(col.sum(axis=1)), 0.0)))


@dataclass(frozen=True, eq=False)
class TestFunction(RadialField):
    """A RadialField produced by :func:`besselsq.hankel.make_test_function`."""

    descriptor: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Samples F(t_j, x_i) with shape (m, n) or (m, n, d)."""

    tgrid: TimeGrid
    xgrid: RadialGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim not in (2, 3) or v.shape[:2] != (self.tgrid.m, self.xgrid.n):
            raise GridMismatchError(f"values of shape {v.shape} do not fit the ({self.tgrid.m}, {self.xgrid.n}) grid")
        object.__setattr__(self, "values", v)

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 3

    def profile(self, x_index: int) -> np.ndarray:
        return self.values[:, x_index]

    def l2_norm(self) -> float:
        """Norm in L^2(dx dt/t), summing squared moduli of components."""
        a = np.abs(self.values) ** 2
        if a.ndim == 3:
            a = a.sum(axis=2)
        return float(np.sqrt(self.tgrid.logweights @ a @ self.xgrid.weights))


class SquareFunctionField(SpaceTimeField):
    """t^beta d_t^beta P_t f(x) on TimeGrid x RadialGrid."""


class GCurlField(SpaceTimeField):
    """t D*_lam P_t^{lam+1} f(x) on TimeGrid x RadialGrid."""


def relative_deviation(a, b) -> float:
    """||a - b|| / ||b|| in the natural L^2 norm of the field type."""
    if isinstance(a, SpaceTimeField) and isinstance(b, SpaceTimeField):
        diff = SpaceTimeField(a.tgrid, a.xgrid, a.values - b.values)
        den = b.l2_norm()
        return diff.l2_norm() / den if den > 0 else diff.l2_norm()
    if isinstance(a, RadialField) and isinstance(b, RadialField):
        diff = RadialField(a.grid, a.values - b.values)
        den = b.l2_norm()
        return diff.l2_norm() / den if den > 0 else diff.l2_norm()
    raise TypeError("relative_deviation expects two fields of the same kind")


def as_field(f: Any, grid: RadialGrid | None = None) -> RadialField:
    if isinstance(f, RadialField):
        if grid is not None and not f.grid.same_as(grid):
            raise GridMismatchError("field lives on a different grid")
        return f
    if grid is None:
        raise GridMismatchError("raw samples need an explicit grid")
    return RadialField(grid, np.asarray(f))
