"""
负梯度流、连接轨道计数、Morse 复形与链层面运算

使用示例：
    >>> from morselink.geometry import builtin_model
    >>> from morselink.flow import build_morse_data
    >>> md = build_morse_data(builtin_model("CIRCLE-A"))
    >>> md.signed_count("M1", "m1"), md.signed_count("M1", "m2")
    (1, -1)
"""

from .identities import (
    check_boundary_squared,
    check_cap_adjoint,
    check_cap_leibniz,
    check_dual_signs,
    check_point_count,
    check_two_point_boundary,
    two_point_boundary_terms,
)
from .integrate import FlowPath, integrate, offsets, velocities
from .morse_data import MorseData, build_morse_data, check_dual_entries, check_homology
from .operations import ChainMap, cap_map, check_clearance, crossings_along, flow_ends, two_point_map
from .trajectories import (
    Trajectory,
    count_flowlines,
    critical_points_for,
    ray_starts,
    shoot,
    trajectories_from,
    trajectory_csv,
    trajectory_sign,
)

__all__ = [
    "check_boundary_squared",
    "check_cap_adjoint",
    "check_cap_leibniz",
    "check_dual_signs",
    "check_point_count",
    "check_two_point_boundary",
    "two_point_boundary_terms",
    "FlowPath",
    "integrate",
    "offsets",
    "velocities",
    "MorseData",
    "build_morse_data",
    "check_dual_entries",
    "check_homology",
    "ChainMap",
    "cap_map",
    "check_clearance",
    "crossings_along",
    "flow_ends",
    "two_point_map",
    "Trajectory",
    "count_flowlines",
    "critical_points_for",
    "ray_starts",
    "shoot",
    "trajectories_from",
    "trajectory_csv",
    "trajectory_sign",
]
