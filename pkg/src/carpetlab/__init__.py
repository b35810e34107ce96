"""carpetlab: McMullen-map dynamics, Sierpinski-carpet constructions, and
fractal-dimension measurement, with a small tile service on top.

Hot pixel-grid loops run in a compiled Cython extension when available and
fall back to numpy kernels otherwise; carpetlab.kernel_implementation()
reports which one is active.
"""

from . import _kernels
from .dynamics import (Classification, InvalidParameterError, McMullen,
                       OrbitRecord, PoleError, Quadratic, SiegelQuadratic,
                       chordal_distance, classify_parameter, critical_points,
                       critical_values, escape_radius, eval_map,
                       iterate_orbit, trap_radius)
from .contfrac import ContinuedFractionExpansion, continued_fraction, high_type_test
from .carpet import (CarpetLevel, CoverBound, MaterializationCapError,
                     SquareSpec, carpet_counts, carpet_level,
                     carpet_level_json, carpet_membership, carpet_squares,
                     cover_bound, rasterize_carpet, standard_carpet)
from .metrics import (BoxCountSeries, ComponentProfile, DimensionFit,
                      EmptySetError, WhyburnReport, boundary_disjointness,
                      box_counts, complement_components, estimate_area,
                      fit_dimension, whyburn_profile)
from .raster import Raster, pgm_bytes, png_bytes, read_pgm, read_png, write_pgm

__version__ = "0.1.0"


def kernel_implementation() -> str:
    """Which grid-kernel backend is active: 'compiled' or 'fallback'."""
    return _kernels.IMPLEMENTATION
