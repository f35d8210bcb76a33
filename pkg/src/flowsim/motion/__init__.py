"""Per-vehicle motion: bicycle kinematics, steering and local planners."""
from .planners import (
    NoPath, Path, field_plan, grid_plan, grid_plan_points, octile, potential_field_step,
    sample_plan, segment_cells, segment_free, shortcut_path,
)
from .trajectory import Trajectory, Violation, check_limits, poly_eval, quintic_coeffs, quintic_connect
from .vehicle import (
    ControlLimits, SteeringConfig, VehicleState, angle_to_steering, kinematic_step,
    pure_pursuit_steering, spline_steering,
)

__all__ = [
    "ControlLimits", "NoPath", "Path", "SteeringConfig", "Trajectory", "VehicleState", "Violation",
    "angle_to_steering", "check_limits", "field_plan", "grid_plan", "grid_plan_points",
    "kinematic_step", "octile", "poly_eval", "potential_field_step", "pure_pursuit_steering",
    "quintic_coeffs", "quintic_connect", "sample_plan", "segment_cells", "segment_free",
    "shortcut_path", "spline_steering",
]
