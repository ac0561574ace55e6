"""Exact diamond-kite adaptive quadrilateral meshes."""
from .adapt import AdaptReport, adapt, coarsen_to_size, is_coarsenable, refine_to_size
from .derived import (
    build_packing,
    check_centroid,
    check_coloring,
    check_duals,
    dual_meshes,
    stats,
    three_color,
    validate_packing,
)
from .errors import (
    BoundaryViolation,
    DiamondKiteError,
    FormatError,
    InconsistentRadius,
    NonTermination,
    PreconditionViolation,
)
from .io import parse, parse_size, render_svg, serialize
from .lattice import (
    ORIGIN,
    LatticeCoord,
    LowerSet,
    ReplacementKey,
    close_down,
    join,
    linearize,
    meet,
    normalize,
    prerequisites,
    to_cartesian,
)
from .mesh import Mesh, apply_replacement, coarsen_step, initial_patch, refine, replay
from .sizefield import CircleSize, ConstantSize, GridSize, PointSize, RampSize, SizeField
from .verify import verify_mesh

__version__ = "0.1.0"
