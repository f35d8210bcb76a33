"""Static world: lane graph, lane splines, occupancy grid and traffic lights.

Network files are JSON::

    {
      "nodes":  [{"id": "A", "x": 0.0, "y": 0.0}, ...],
      "edges":  [{"from": "A", "to": "B", "length": 10.0, "speed_limit": 10.0,
                  "spline": [[0, 0], [10, 0]]}, ...],
      "lights": [{"position": [8, 0], "edge": 0,
                  "schedule": [["Red", 10], ["Green", 20]]}, ...],
      "grid":   {"origin": [x0, y0], "cell_size": 1.0, "width": W, "height": H,
                 "passable": ["0110...", ...]},
      "lane_width": 3.5
    }

Lights reference edges by their index in ``edges``.  Grid rows are listed
from the lowest y (row 0) upward; each row string holds one character per
column, ``1`` meaning passable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

LENGTH_TOLERANCE = 0.10
DEFAULT_LANE_WIDTH = 3.5


class NetworkError(ValueError):
    """Raised when a network file is malformed or violates an invariant."""


class Spline:
    """Piecewise-linear curve parameterized by arc length."""

    def __init__(self, control_points):
        pts = np.asarray(control_points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise NetworkError("spline needs at least two 2D control points")
        seg = np.diff(pts, axis=0)
        seglen = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(seglen <= 0.0):
            raise NetworkError("spline has repeated consecutive control points")
        self.control_points = pts
        self.seg_vec = seg
        self.seg_len = seglen
        self.seg_dir = seg / seglen[:, None]
        self.cumulative_arc_length = np.concatenate([[0.0], np.cumsum(seglen)])

    @property
    def length(self) -> float:
        return float(self.cumulative_arc_length[-1])

    def __len__(self):
        return len(self.control_points)

    def __eq__(self, other):
        return isinstance(other, Spline) and np.array_equal(
            self.control_points, other.control_points
        )

    def __repr__(self):
        return f"Spline({len(self)} points, length={self.length:.3f})"

    def segment_index(self, s: float) -> int:
        i = int(np.searchsorted(self.cumulative_arc_length, s, side="right")) - 1
        return min(max(i, 0), len(self.seg_len) - 1)

    def point_at(self, s: float) -> np.ndarray:
        s = min(max(s, 0.0), self.length)
        i = self.segment_index(s)
        return self.control_points[i] + self.seg_dir[i] * (s - self.cumulative_arc_length[i])

    def nearest(self, p, s_min=None, s_max=None):
        """Closest point on the curve to ``p``, optionally restricted to an
        arc-length window.  Returns ``(s, q, dist)``; ties go to smaller s."""
        p = np.asarray(p, dtype=float)
        cum = self.cumulative_arc_length
        a = self.control_points[:-1]
        lo = np.zeros(len(a))
        hi = np.ones(len(a))
        idx = np.arange(len(a))
        if s_min is not None or s_max is not None:
            s_lo = 0.0 if s_min is None else max(0.0, s_min)
            s_hi = self.length if s_max is None else min(self.length, s_max)
            if s_hi < s_lo:
                s_hi = s_lo
            keep = (cum[1:] >= s_lo) & (cum[:-1] <= s_hi)
            idx = idx[keep]
            a = a[keep]
            lo = np.clip((s_lo - cum[:-1][keep]) / self.seg_len[keep], 0.0, 1.0)
            hi = np.clip((s_hi - cum[:-1][keep]) / self.seg_len[keep], 0.0, 1.0)
        d = self.seg_vec[idx]
        t = np.einsum("ij,ij->i", p - a, d) / (self.seg_len[idx] ** 2)
        t = np.clip(t, lo, hi)
        q = a + d * t[:, None]
        dist = np.hypot(p[0] - q[:, 0], p[1] - q[:, 1])
        k = int(np.argmin(dist))
        s = float(cum[idx[k]] + t[k] * self.seg_len[idx[k]])
        return s, q[k].copy(), float(dist[k])

    def tangent(self, s: float) -> np.ndarray:
        if s < -1e-9 or s > self.length + 1e-9:
            raise ValueError(f"arc length {s} outside [0, {self.length}]")
        cum = self.cumulative_arc_length
        i = self.segment_index(s)
        # interior vertex: average the adjacent directions
        for v in (i, i + 1):
            if 0 < v < len(cum) - 1 and abs(s - cum[v]) <= 1e-9:
                avg = self.seg_dir[v - 1] + self.seg_dir[v]
                norm = math.hypot(avg[0], avg[1])
                if norm > 1e-12:
                    return avg / norm
                return self.seg_dir[v].copy()
        return self.seg_dir[i].copy()

    def concat(self, other: "Spline") -> "Spline":
        pts = other.control_points
        if np.allclose(self.control_points[-1], pts[0]):
            pts = pts[1:]
        return Spline(np.vstack([self.control_points, pts]))


def spline_nearest(spline: Spline, p):
    """Return ``(s, q, dist)`` for the point of ``spline`` closest to ``p``."""
    return spline.nearest(p)


def spline_tangent(spline: Spline, s: float) -> np.ndarray:
    return spline.tangent(s)


class Color(str, Enum):
    RED = "Red"
    GREEN = "Green"


@dataclass
class TrafficLight:
    position: tuple
    controlled_edge: int
    phase_schedule: list  # [(Color, seconds), ...]

    def __post_init__(self):
        if not self.phase_schedule:
            raise NetworkError("traffic light schedule is empty")
        sched = []
        for color, duration in self.phase_schedule:
            if duration <= 0:
                raise NetworkError("traffic light phase durations must be positive")
            sched.append((Color(color), float(duration)))
        self.phase_schedule = sched
        self.position = (float(self.position[0]), float(self.position[1]))

    @property
    def cycle_length(self) -> float:
        return sum(d for _, d in self.phase_schedule)

    def phase_at(self, t: float):
        """Return ``(color, seconds_remaining)``; boundaries belong to the later phase."""
        tm = math.fmod(t, self.cycle_length)
        if tm < 0:
            tm += self.cycle_length
        end = 0.0
        for color, duration in self.phase_schedule:
            end += duration
            if tm < end:
                return color, end - tm
        color, duration = self.phase_schedule[0]
        return color, duration


def light_phase(light: TrafficLight, t: float) -> Color:
    return light.phase_at(t)[0]


@dataclass
class OccupancyGrid:
    origin: tuple
    cell_size: float
    width: int
    height: int
    passable: np.ndarray  # bool, shape (height, width); [iy, ix]

    def __post_init__(self):
        if self.cell_size <= 0:
            raise NetworkError("grid cell_size must be positive")
        arr = np.asarray(self.passable, dtype=bool)
        if arr.size != self.width * self.height:
            raise NetworkError(
                f"grid has {arr.size} cells, expected {self.width}x{self.height}"
            )
        self.passable = arr.reshape(self.height, self.width)
        self.origin = (float(self.origin[0]), float(self.origin[1]))

    def __eq__(self, other):
        return (
            isinstance(other, OccupancyGrid)
            and self.origin == other.origin
            and self.cell_size == other.cell_size
            and self.passable.shape == other.passable.shape
            and np.array_equal(self.passable, other.passable)
        )

    def in_bounds(self, cell) -> bool:
        ix, iy = cell
        return 0 <= ix < self.width and 0 <= iy < self.height

    def is_passable(self, cell) -> bool:
        return self.in_bounds(cell) and bool(self.passable[cell[1], cell[0]])

    def cell_of(self, p):
        ix = math.floor((p[0] - self.origin[0]) / self.cell_size)
        iy = math.floor((p[1] - self.origin[1]) / self.cell_size)
        return ix, iy

    def cell_center(self, cell) -> np.ndarray:
        return np.array(
            [
                self.origin[0] + (cell[0] + 0.5) * self.cell_size,
                self.origin[1] + (cell[1] + 0.5) * self.cell_size,
            ]
        )

    def with_blocked_discs(self, discs) -> "OccupancyGrid":
        """Copy of the grid with every cell whose center lies inside one of the
        ``(center, radius)`` discs marked impassable."""
        passable = self.passable.copy()
        xs = self.origin[0] + (np.arange(self.width) + 0.5) * self.cell_size
        ys = self.origin[1] + (np.arange(self.height) + 0.5) * self.cell_size
        gx, gy = np.meshgrid(xs, ys)
        for (cx, cy), r in discs:
            passable &= np.hypot(gx - cx, gy - cy) > r
        return OccupancyGrid(self.origin, self.cell_size, self.width, self.height, passable)

    def to_dict(self):
        rows = ["".join("1" if v else "0" for v in row) for row in self.passable]
        return {
            "origin": list(self.origin),
            "cell_size": self.cell_size,
            "width": self.width,
            "height": self.height,
            "passable": rows,
        }

    @classmethod
    def from_dict(cls, d):
        rows = d["passable"]
        if isinstance(rows, list) and rows and isinstance(rows[0], str):
            flat = [c == "1" for row in rows for c in row.strip()]
        else:
            flat = np.asarray(rows, dtype=bool).ravel()
        return cls(tuple(d["origin"]), float(d["cell_size"]), int(d["width"]), int(d["height"]),
                   np.asarray(flat, dtype=bool))


@dataclass
class Edge:
    source: str
    target: str
    length: float
    speed_limit: float
    spline: Spline


@dataclass(eq=False)
class RoadNetwork:
    nodes: dict  # id -> (x, y)
    edges: list
    lights: list = field(default_factory=list)
    grid: OccupancyGrid | None = None
    lane_width: float = DEFAULT_LANE_WIDTH

    def __post_init__(self):
        self._graphs = {}
        self.validate()

    def validate(self):
        for i, e in enumerate(self.edges):
            for end in (e.source, e.target):
                if end not in self.nodes:
                    raise NetworkError(f"edge {i} references unknown node {end!r}")
            if not e.length > 0:
                raise NetworkError(f"edge {i} has non-positive length {e.length}")
            if not e.speed_limit > 0:
                raise NetworkError(f"edge {i} has non-positive speed limit {e.speed_limit}")
            arc = e.spline.length
            if abs(e.length - arc) > LENGTH_TOLERANCE * arc:
                raise NetworkError(
                    f"edge {i} length {e.length} differs from its spline arc length "
                    f"{arc:.3f} by more than {LENGTH_TOLERANCE:.0%}"
                )
        for j, light in enumerate(self.lights):
            if not 0 <= light.controlled_edge < len(self.edges):
                raise NetworkError(f"light {j} controls unknown edge {light.controlled_edge}")
        if self.lane_width <= 0:
            raise NetworkError("lane_width must be positive")

    def __eq__(self, other):
        return isinstance(other, RoadNetwork) and network_to_dict(self) == network_to_dict(other)

    def position(self, node_id) -> np.ndarray:
        return np.asarray(self.nodes[node_id], dtype=float)

    def graph(self, weight: str = "length"):
        """Routing graph over this network (cached per weighting)."""
        if weight not in self._graphs:
            from .routing.graph import Graph

            self._graphs[weight] = Graph.from_network(self, weight=weight)
        return self._graphs[weight]

    def edge_between(self, u, v) -> int:
        """Index of the cheapest edge u -> v."""
        best = None
        for i, e in enumerate(self.edges):
            if e.source == u and e.target == v:
                if best is None or e.length < self.edges[best].length:
                    best = i
        if best is None:
            raise KeyError(f"no edge {u!r} -> {v!r}")
        return best


def network_from_dict(d) -> RoadNetwork:
    try:
        nodes = {}
        for n in d["nodes"]:
            if n["id"] in nodes:
                raise NetworkError(f"duplicate node id {n['id']!r}")
            nodes[n["id"]] = (float(n["x"]), float(n["y"]))
        edges = []
        for e in d["edges"]:
            pts = e.get("spline")
            if pts is None:
                pts = [nodes[e["from"]], nodes[e["to"]]] if e["from"] in nodes and e["to"] in nodes else None
                if pts is None:
                    missing = e["from"] if e["from"] not in nodes else e["to"]
                    raise NetworkError(f"edge references unknown node {missing!r}")
            edges.append(
                Edge(e["from"], e["to"], float(e["length"]), float(e.get("speed_limit", 13.9)),
                     Spline(pts))
            )
        lights = [
            TrafficLight(tuple(l["position"]), int(l["edge"]), [tuple(p) for p in l["schedule"]])
            for l in d.get("lights", [])
        ]
        grid = OccupancyGrid.from_dict(d["grid"]) if d.get("grid") else None
        lane_width = float(d.get("lane_width", DEFAULT_LANE_WIDTH))
    except NetworkError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkError(f"malformed network: {exc!r}") from exc
    return RoadNetwork(nodes, edges, lights, grid, lane_width)


def network_to_dict(net: RoadNetwork) -> dict:
    d = {
        "nodes": [{"id": k, "x": x, "y": y} for k, (x, y) in net.nodes.items()],
        "edges": [
            {
                "from": e.source,
                "to": e.target,
                "length": e.length,
                "speed_limit": e.speed_limit,
                "spline": e.spline.control_points.tolist(),
            }
            for e in net.edges
        ],
        "lights": [
            {
                "position": list(l.position),
                "edge": l.controlled_edge,
                "schedule": [[c.value, dur] for c, dur in l.phase_schedule],
            }
            for l in net.lights
        ],
        "lane_width": net.lane_width,
    }
    if net.grid is not None:
        d["grid"] = net.grid.to_dict()
    return d


def load_network(path) -> RoadNetwork:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise NetworkError(f"{path}: not valid JSON ({exc})") from exc
    return network_from_dict(data)


def save_network(net: RoadNetwork, path):
    Path(path).write_text(json.dumps(network_to_dict(net), indent=1))
