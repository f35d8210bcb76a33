"""Kinematic bicycle model and path-tracking steering laws.

Heading is measured counter-clockwise from +x; positive steering turns left.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

FULL_LOCK_DEG = 90.0


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    heading: float
    speed: float = 0.0
    steering: float = 0.0
    wheelbase: float = 2.7

    def __post_init__(self):
        if not -1.0 <= self.steering <= 1.0:
            raise ValueError("steering must lie in [-1, 1]")
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        if not self.wheelbase > 0:
            raise ValueError("wheelbase must be positive")

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def front_point(self, half_length: float) -> np.ndarray:
        return np.array([self.x + half_length * math.cos(self.heading),
                         self.y + half_length * math.sin(self.heading)])


@dataclass(frozen=True)
class ControlLimits:
    max_accel: float = 3.0
    max_decel: float = 6.0
    max_steer_angle: float = 70.0  # degrees at steering = +-1
    max_curvature: float = 0.25    # 1/m

    def __post_init__(self):
        for name in ("max_accel", "max_decel", "max_steer_angle", "max_curvature"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def curvature_bound(self, wheelbase: float) -> float:
        return min(math.tan(math.radians(self.max_steer_angle)) / wheelbase, self.max_curvature)


@dataclass(frozen=True)
class SteeringConfig:
    smoothing: float = 5.0  # meters of lookahead along the tangent
    full_lock_angle: float = FULL_LOCK_DEG

    def __post_init__(self):
        if not self.smoothing > 0:
            raise ValueError("smoothing must be positive")


def kinematic_step(s: VehicleState, throttle: float, steering: float, limits: ControlLimits,
                   dt: float) -> VehicleState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    throttle = min(max(throttle, -1.0), 1.0)
    steering = min(max(steering, -1.0), 1.0)
    delta = math.radians(steering * limits.max_steer_angle)
    kappa = math.tan(delta) / s.wheelbase
    bound = limits.curvature_bound(s.wheelbase)
    kappa = min(max(kappa, -bound), bound)
    heading = s.heading + s.speed * kappa * dt
    mean_heading = 0.5 * (s.heading + heading)
    x = s.x + s.speed * dt * math.cos(mean_heading)
    y = s.y + s.speed * dt * math.sin(mean_heading)
    accel = throttle * (limits.max_accel if throttle >= 0 else limits.max_decel)
    speed = max(s.speed + accel * dt, 0.0)
    return replace(s, x=x, y=y, heading=heading, speed=speed, steering=steering)


def angle_to_steering(angle_rad: float, full_lock_deg: float = FULL_LOCK_DEG) -> float:
    """Map a signed angle to steering via clamp(angle / full_lock, -1, 1)."""
    return min(max(math.degrees(angle_rad) / full_lock_deg, -1.0), 1.0)


def _wrap(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def spline_steering(s: VehicleState, spline, cfg: SteeringConfig = SteeringConfig(),
                    s_min=None, s_max=None) -> float:
    """Steer toward the curve point nearest to a tangent-offset lookahead.

    From the car's center, take the nearest curve point and its unit
    tangent, scale the tangent by ``cfg.smoothing`` and attach it to the car;
    the curve point nearest that vector's tip is the aim point.  The signed
    angle between heading and the aim direction maps linearly onto [-1, 1].
    ``s_min``/``s_max`` restrict the nearest-point queries to an arc-length
    window (progress tracking on self-approaching routes).
    """
    center = s.position
    s0, _, _ = spline.nearest(center, s_min, s_max)
    tip = center + spline.tangent(s0) * cfg.smoothing
    _, aim, _ = spline.nearest(tip, s0, s_max)
    dx, dy = aim[0] - center[0], aim[1] - center[1]
    if dx == 0.0 and dy == 0.0:
        return 0.0
    return angle_to_steering(_wrap(math.atan2(dy, dx) - s.heading), cfg.full_lock_angle)


def pure_pursuit_steering(s: VehicleState, path, lookahead: float, s_min=None, s_max=None,
                          full_lock_deg: float = FULL_LOCK_DEG) -> float:
    """Steer toward the path point ``lookahead`` meters past the car's projection."""
    center = s.position
    s0, _, _ = path.nearest(center, s_min, s_max)
    aim = path.point_at(s0 + lookahead)
    dx, dy = aim[0] - center[0], aim[1] - center[1]
    if dx == 0.0 and dy == 0.0:
        return 0.0
    return angle_to_steering(_wrap(math.atan2(dy, dx) - s.heading), full_lock_deg)
