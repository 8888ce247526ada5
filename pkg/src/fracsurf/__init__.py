"""Self-affine interpolation surfaces on rectangular grids.

Construction of the iterated function system from node data, evaluation of
its fixed-point surface, partial and mixed fractional integrals/derivatives
of that surface, and integral transforms over the compact domain, each with
numerical residual checks of the corresponding functional equations.
"""

from .errors import FracsurfError
from .fields import SampledField, field_from_function
from .fif import (
    FifSystem,
    PointCloud,
    attractor_distance,
    build_system,
    chaos_game,
    check_matching,
    check_selfref,
    evaluate,
    evaluate_many,
    fixed_point_raster,
    q_eval,
    rb_apply,
    sample,
)
from .grid import (
    AffineMap1D,
    NodeGrid,
    affine_coeffs,
    grid_from_function,
    locate_interval,
    make_grid,
    rho,
)

__version__ = "0.1.0"
