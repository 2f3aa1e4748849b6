"""Numerical verification of square-function characterizations of Banach-valued
Hardy and BMO spaces in the Bessel setting."""
from .fields import GCurlField, RadialField, SpaceTimeField, SquareFunctionField, TestFunction
from .gamma_norm import BanachDescriptor, gamma_field_norms, gamma_norm
from .grids import make_radial_grid, make_time_grid
from .report import Report

__all__ = [
    "BanachDescriptor", "GCurlField", "RadialField", "Report", "SpaceTimeField", "SquareFunctionField",
    "TestFunction", "gamma_field_norms", "gamma_norm", "make_radial_grid", "make_time_grid",
]
