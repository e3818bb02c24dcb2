"""Grid visibility by upwind transport, a ray-casting baseline and a
visibility-guided any-angle planner."""

from .grid import (
    BUNDLED_MAZES,
    MAP_KINDS,
    DensityWarning,
    GridParseError,
    GridPoint,
    MapSpec,
    OccupancyGrid,
    complement,
    generate_map,
    load_bundled_maze,
    load_occupancy,
    parse_pgm,
    parse_text,
)
from .oracle import BinaryMask, compare_masks, line_of_sight, raycast_map, shadow_boundary
from .planner import EXPLORATION, TARGET_SEEKING, PlannerParams, PlanResult, heuristic_value, plan
from .visibility import (
    FlowFieldSpec,
    FlowSignWarning,
    VisibilityField,
    VisParams,
    binarize,
    compute_visibility,
    compute_visibility_curvilinear,
    intersect,
    union,
)

__all__ = [
    "BUNDLED_MAZES", "MAP_KINDS", "DensityWarning", "GridParseError", "GridPoint", "MapSpec",
    "OccupancyGrid", "complement", "generate_map", "load_bundled_maze", "load_occupancy",
    "parse_pgm", "parse_text", "BinaryMask", "compare_masks", "line_of_sight", "raycast_map",
    "shadow_boundary", "EXPLORATION", "TARGET_SEEKING", "PlannerParams", "PlanResult",
    "heuristic_value", "plan", "FlowFieldSpec", "FlowSignWarning", "VisibilityField",
    "VisParams", "binarize", "compute_visibility", "compute_visibility_curvilinear",
    "intersect", "union",
]
