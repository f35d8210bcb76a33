"""Timed trajectories: quintic boundary-value interpolation and limit checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray
    speeds: np.ndarray
    coeffs: np.ndarray = None  # (2, 6) ascending powers when polynomial

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.speeds = np.asarray(self.speeds, dtype=float)
        if not (len(self.times) == len(self.points) == len(self.speeds)):
            raise ValueError("times, points and speeds must have equal length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def to_dict(self):
        return {"t": self.times.tolist(), "points": self.points.tolist(),
                "speed": self.speeds.tolist()}


@dataclass
class Violation:
    index: int
    kind: str  # accel | decel | curvature
    value: float
    bound: float


def quintic_coeffs(b0, b1, T):
    """Per-axis coefficients (ascending powers) matching position, velocity
    and acceleration at t=0 and t=T.  Each ``b`` is ``(pos, vel, acc)``."""
    if not T > 0:
        raise ValueError("T must be positive")
    p0, v0, a0 = (np.asarray(x, dtype=float) for x in b0)
    p1, v1, a1 = (np.asarray(x, dtype=float) for x in b1)
    # with c0..c2 fixed by the start state, the end conditions leave a 3x3
    # system in c3..c5; its inverse has this closed form
    r0 = p1 - (p0 + v0 * T + 0.5 * a0 * T**2)
    r1 = v1 - (v0 + a0 * T)
    r2 = a1 - a0
    c3 = (20 * r0 - 8 * r1 * T + r2 * T**2) / (2 * T**3)
    c4 = (-30 * r0 + 14 * r1 * T - 2 * r2 * T**2) / (2 * T**4)
    c5 = (12 * r0 - 6 * r1 * T + r2 * T**2) / (2 * T**5)
    return np.stack([p0, v0, 0.5 * a0, c3, c4, c5], axis=-1)


def poly_eval(coeffs, t, deriv=0):
    """Evaluate ascending-power polynomials (last axis) or their derivatives at ``t``."""
    c = np.asarray(coeffs, dtype=float)
    for _ in range(deriv):
        c = c[..., 1:] * np.arange(1, c.shape[-1])
    t = np.asarray(t, dtype=float)
    out = np.zeros(c.shape[:-1] + t.shape)
    for k in range(c.shape[-1] - 1, -1, -1):
        out = out * t + c[..., k].reshape(c.shape[:-1] + (1,) * t.ndim)
    return out


def quintic_connect(b0, b1, T, dt=0.05) -> Trajectory:
    """Quintic per-axis trajectory between two 2D boundary states, sampled every ``dt``
    (the final sample lands exactly on ``T``)."""
    c = quintic_coeffs(b0, b1, T)
    n = max(int(np.ceil(T / dt - 1e-9)), 1)
    t = np.minimum(np.arange(n + 1) * dt, T)
    t[-1] = T
    pos = poly_eval(c, t).T
    vel = poly_eval(c, t, 1).T
    return Trajectory(t, pos, np.hypot(vel[:, 0], vel[:, 1]), c)


def check_limits(traj: Trajectory, limits, min_speed=1e-3) -> list:
    """Finite-difference longitudinal acceleration and curvature per sample."""
    if len(traj) < 3:
        raise ValueError("limit checks need at least three samples")
    t = traj.times
    vel = np.gradient(traj.points, t, axis=0)
    acc = np.gradient(vel, t, axis=0)
    speed = np.hypot(vel[:, 0], vel[:, 1])
    moving = speed > min_speed
    tangent = np.zeros_like(vel)
    tangent[moving] = vel[moving] / speed[moving, None]
    along = (acc * tangent).sum(axis=1)
    # speed cannot drop below zero, so at rest all acceleration pulls away
    along = np.where(moving, along, np.hypot(acc[:, 0], acc[:, 1]))
    cross = vel[:, 0] * acc[:, 1] - vel[:, 1] * acc[:, 0]
    kappa = np.zeros(len(t))
    kappa[moving] = np.abs(cross[moving]) / speed[moving] ** 3
    out = []
    for i in range(len(t)):
        if along[i] > limits.max_accel:
            out.append(Violation(i, "accel", float(along[i]), limits.max_accel))
        elif -along[i] > limits.max_decel:
            out.append(Violation(i, "decel", float(-along[i]), limits.max_decel))
        if kappa[i] > limits.max_curvature:
            out.append(Violation(i, "curvature", float(kappa[i]), limits.max_curvature))
    return out
