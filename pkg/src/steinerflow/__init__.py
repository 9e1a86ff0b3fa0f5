"""Continuous Steiner symmetrization of polygons and the (eigenvalue, torsion) diagram."""

from .diagram import (
    J0,
    BallConstants,
    DiagramPoint,
    PointReport,
    bfnt_upper,
    diagram_point,
    diagram_scan,
    family_curve,
    family_values,
    h_lower,
    kj_lower,
    polya_coeff,
    verify_point,
)
from .geometry import (
    Direction,
    GeometryError,
    IntervalSet,
    Polygon,
    StripDomain,
    WallSegment,
    area,
    rotate,
    section,
    slice_polygon,
    steiner_symmetrize,
    symmetral,
)
from .pde import (
    GridMask,
    SolverError,
    eigen_solve,
    gamma_distance,
    rasterize,
    rasterize_polygon,
    torsion_gap_l1,
    torsion_solve,
)
from .runner import check_monotone, solve_flow, solve_snapshots
from .symflow import (
    FlowError,
    FlowSchedule,
    FlowSnapshot,
    detect_walls,
    evolve_intervals,
    merge_at,
    next_merge_time,
    plan_schedule,
    run_schedule,
    shrink_wall,
    strip_flow_to,
)

__version__ = "0.1.0"

__all__ = [
    "area",
    "BallConstants",
    "bfnt_upper",
    "check_monotone",
    "detect_walls",
    "diagram_point",
    "diagram_scan",
    "DiagramPoint",
    "Direction",
    "eigen_solve",
    "evolve_intervals",
    "family_curve",
    "family_values",
    "FlowError",
    "FlowSchedule",
    "FlowSnapshot",
    "gamma_distance",
    "GeometryError",
    "GridMask",
    "h_lower",
    "IntervalSet",
    "J0",
    "kj_lower",
    "merge_at",
    "next_merge_time",
    "plan_schedule",
    "PointReport",
    "polya_coeff",
    "Polygon",
    "rasterize",
    "rasterize_polygon",
    "rotate",
    "run_schedule",
    "section",
    "shrink_wall",
    "slice_polygon",
    "solve_flow",
    "solve_snapshots",
    "SolverError",
    "steiner_symmetrize",
    "strip_flow_to",
    "StripDomain",
    "symmetral",
    "torsion_gap_l1",
    "torsion_solve",
    "verify_point",
    "WallSegment",
]
