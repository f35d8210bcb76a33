"""Listener/stimulus perception: registered listeners test every stimulus
source each tick against range, field of view and line of sight, and receive
Gained/Lost events on changes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class PerceptionError(KeyError):
    pass


@dataclass(frozen=True)
class SightConfig:
    radius: float
    fov_half_angle: float = 180.0  # degrees
    requires_line_of_sight: bool = False

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("sight radius must be positive")
        if not 0.0 < self.fov_half_angle <= 180.0:
            raise ValueError("fov_half_angle must lie in (0, 180]")


@dataclass
class Listener:
    id: object
    position: tuple
    heading: float  # radians
    senses: list = field(default_factory=list)


@dataclass(frozen=True)
class Stimulus:
    source_id: object
    position: tuple
    kind: str = "vehicle"  # vehicle | obstacle | traffic_light
    data: dict = field(default=None, compare=False, hash=False)


class Change(str, Enum):
    GAINED = "Gained"
    LOST = "Lost"


@dataclass(frozen=True)
class PerceptionEvent:
    listener_id: object
    source_id: object
    change: Change
    tick: int


def normalize_angle_deg(a: float) -> float:
    """Wrap to (-180, 180]."""
    a = math.fmod(a, 360.0)
    if a <= -180.0:
        a += 360.0
    elif a > 180.0:
        a -= 360.0
    return a


def _orient(ax, ay, bx, by, cx, cy):
    v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return 0 if v == 0 else (1 if v > 0 else -1)


def _on_segment(ax, ay, bx, by, cx, cy):
    return min(ax, bx) <= cx <= max(ax, bx) and min(ay, by) <= cy <= max(ay, by)


def segments_intersect(p1, p2, q1, q2) -> bool:
    """Exact closed-segment intersection; touching counts."""
    o1 = _orient(*p1, *p2, *q1)
    o2 = _orient(*p1, *p2, *q2)
    o3 = _orient(*q1, *q2, *p1)
    o4 = _orient(*q1, *q2, *p2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(*p1, *p2, *q1):
        return True
    if o2 == 0 and _on_segment(*p1, *p2, *q2):
        return True
    if o3 == 0 and _on_segment(*q1, *q2, *p1):
        return True
    if o4 == 0 and _on_segment(*q1, *q2, *p2):
        return True
    return False


def senses(cfg: SightConfig, position, heading, target, occluders=()) -> bool:
    dx = target[0] - position[0]
    dy = target[1] - position[1]
    if math.hypot(dx, dy) > cfg.radius:
        return False
    if cfg.fov_half_angle < 180.0 and (dx or dy):
        bearing = math.degrees(math.atan2(dy, dx) - heading)
        if abs(normalize_angle_deg(bearing)) > cfg.fov_half_angle:
            return False
    if cfg.requires_line_of_sight:
        for a, b in occluders:
            if segments_intersect(position, target, a, b):
                return False
    return True


class PerceptionSystem:
    def __init__(self):
        self.listeners = {}
        self._perceived = {}
        self.stimuli = {}  # latest stimulus per source, for reading attributes

    def register_listener(self, listener: Listener):
        if listener.id in self.listeners:
            raise ValueError(f"listener {listener.id!r} already registered")
        self.listeners[listener.id] = listener
        self._perceived[listener.id] = set()
        return listener.id

    def unregister_listener(self, listener_id):
        self.listeners.pop(listener_id, None)
        self._perceived.pop(listener_id, None)

    def update_pose(self, listener_id, position, heading):
        lst = self.listeners[listener_id]
        lst.position = (float(position[0]), float(position[1]))
        lst.heading = float(heading)

    def perceived_set(self, listener_id) -> set:
        if listener_id not in self._perceived:
            raise PerceptionError(f"unknown listener {listener_id!r}")
        return set(self._perceived[listener_id])

    def tick(self, stimuli, occluders=(), tick=0) -> list:
        self.stimuli = {s.source_id: s for s in stimuli}
        occluders = [((float(a[0]), float(a[1])), (float(b[0]), float(b[1]))) for a, b in occluders]
        events = []
        for lid in sorted(self.listeners, key=_sort_key):
            lst = self.listeners[lid]
            now = set()
            for stim in stimuli:
                if stim.source_id == lid:
                    continue
                if any(senses(cfg, lst.position, lst.heading, stim.position, occluders)
                       for cfg in lst.senses):
                    now.add(stim.source_id)
            before = self._perceived[lid]
            for sid in now - before:
                events.append(PerceptionEvent(lid, sid, Change.GAINED, tick))
            for sid in before - now:
                events.append(PerceptionEvent(lid, sid, Change.LOST, tick))
            self._perceived[lid] = now
        events.sort(key=lambda e: (_sort_key(e.listener_id), _sort_key(e.source_id)))
        return events


def _sort_key(x):
    return (type(x).__name__, x)


def register_listener(sys: PerceptionSystem, listener: Listener):
    return sys.register_listener(listener)


def perception_tick(sys: PerceptionSystem, stimuli, occluders=(), tick=0):
    return sys.tick(stimuli, occluders, tick)


def perceived_set(sys: PerceptionSystem, listener_id) -> set:
    return sys.perceived_set(listener_id)
