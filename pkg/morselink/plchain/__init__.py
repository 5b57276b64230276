"""
分片线性链：边界、交点数、有界链、链接数与定向符号规则
"""

from .bounding import bounding_chain, geodesic_path, winding_number
from .chain import Cell, PLChain, boundary_pl, canonical_key, sample_cell
from .intersection import (
    Crossing,
    fiber_product,
    intersection_number,
    locate_points,
    segment_crossings,
    transverse_points,
)
from .jitter import jitter_magnitude, jitter_moves, random_move, run_with_jitter
from .linking import carrier_gap, linking_number, linking_symmetry_residual
from .signs import (
    SIGN_RULES,
    sign_bdry,
    sign_commute,
    sign_diag,
    sign_dualm,
    sign_linksym,
    sign_m,
    sign_prod,
    sign_su,
    sign_tm,
)

__all__ = [
    "bounding_chain",
    "geodesic_path",
    "winding_number",
    "Cell",
    "PLChain",
    "boundary_pl",
    "canonical_key",
    "sample_cell",
    "Crossing",
    "fiber_product",
    "intersection_number",
    "locate_points",
    "segment_crossings",
    "transverse_points",
    "jitter_magnitude",
    "jitter_moves",
    "random_move",
    "run_with_jitter",
    "carrier_gap",
    "linking_number",
    "linking_symmetry_residual",
    "SIGN_RULES",
    "sign_bdry",
    "sign_commute",
    "sign_diag",
    "sign_dualm",
    "sign_linksym",
    "sign_m",
    "sign_prod",
    "sign_su",
    "sign_tm",
]
