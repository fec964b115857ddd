"""Multi-agent disk motion planning via inscribed-circle swap graphs."""

from .errors import (
    AssignmentFailure,
    AssignmentMismatch,
    CenterContained,
    EmptyFreeSpace,
    IllegalOp,
    InsufficientCapacity,
    InvalidGraph,
    NavigationFailure,
    NotInFreeSpace,
    PlannerError,
    PreconditionViolated,
    SwapMotionError,
    TooFewSlots,
    UnrealizableOp,
)
from .geometry import Capsule, Disk, Point2, Polygon, Rect, Workspace
from .swap_graph import Occupancy, SwapGraph, VACANT


def __getattr__(name):
    # late imports keep `import swapmotion` light; heavy deps load on demand
    from importlib import import_module

    lookup = {
        "greedy_convert": "conversion",
        "convert_circles": "conversion",
        "convert_single_circle": "conversion",
        "convert_two_circles": "conversion",
        "plan_permutation": "planner",
        "exchange": "planner",
        "move_vacancy": "planner",
        "apply_op": "planner",
        "realize_plan": "trajectory",
        "verify_trajectories": "trajectory",
        "optimal_assignment": "assignment",
        "navigate_to_vertices": "assignment",
        "extract_medial_axis": "medial_axis",
        "sample_circles": "medial_axis",
        "skeleton_path": "medial_axis",
        "run_pipeline": "pipeline",
        "bench": "pipeline",
        "Scenario": "fileio",
    }
    if name in lookup:
        return getattr(import_module(f".{lookup[name]}", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")

__all__ = [
    "AssignmentFailure",
    "AssignmentMismatch",
    "Capsule",
    "CenterContained",
    "Disk",
    "EmptyFreeSpace",
    "IllegalOp",
    "InsufficientCapacity",
    "InvalidGraph",
    "NavigationFailure",
    "NotInFreeSpace",
    "Occupancy",
    "PlannerError",
    "Point2",
    "Polygon",
    "PreconditionViolated",
    "Rect",
    "SwapGraph",
    "SwapMotionError",
    "TooFewSlots",
    "UnrealizableOp",
    "VACANT",
    "Workspace",
]

__version__ = "0.1.0"
