"""Ambients, immersions and discrete hypersurfaces."""

from .ambient import Ambient, geodesic_distance
from .catalog import CATALOG, catalog_surface
from .immersion import FD_STEP, Immersion, PointGeometry, chart_jet, frame_hessian, varied
from .off import read_off, surface_from_mesh, write_off
from .surface import DiscreteHypersurface, F_r, ambient_curvature_term, discretize, r_area, rebuild

__all__ = [
    "Ambient",
    "CATALOG",
    "DiscreteHypersurface",
    "FD_STEP",
    "F_r",
    "Immersion",
    "PointGeometry",
    "ambient_curvature_term",
    "catalog_surface",
    "chart_jet",
    "discretize",
    "frame_hessian",
    "geodesic_distance",
    "r_area",
    "read_off",
    "rebuild",
    "surface_from_mesh",
    "varied",
    "write_off",
]
