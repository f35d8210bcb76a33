"""Builders for the bundled scenarios: a four-light town loop, an
obstacle-on-the-road strip and a head-on collision lane."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .road_network import (
    Edge, OccupancyGrid, RoadNetwork, Spline, TrafficLight, network_to_dict,
)

CORNER_RADIUS = 10.0
SPEED_LIMIT = 10.0


def arc(start, heading_deg, radius, turn_deg, n=9):
    """Polyline arc leaving ``start`` at ``heading_deg``; positive turns left."""
    h = math.radians(heading_deg)
    side = 1.0 if turn_deg > 0 else -1.0
    cx = start[0] - side * radius * math.sin(h)
    cy = start[1] + side * radius * math.cos(h)
    a0 = math.atan2(start[1] - cy, start[0] - cx)
    sweep = math.radians(turn_deg)
    pts = [(cx + radius * math.cos(a0 + sweep * k / n), cy + radius * math.sin(a0 + sweep * k / n))
           for k in range(n + 1)]
    pts[0] = tuple(start)
    return [tuple(round(c, 9) for c in p) for p in pts]


def _edge(a, b, pts, speed=SPEED_LIMIT):
    sp = Spline(pts)
    return Edge(a, b, round(sp.length, 6), speed, sp)


def rasterize(edges, origin, width, height, cell_size=1.0, band=1.0):
    """Occupancy grid whose passable cells have centers within ``band`` of a lane centerline."""
    xs = origin[0] + (np.arange(width) + 0.5) * cell_size
    ys = origin[1] + (np.arange(height) + 0.5) * cell_size
    gx, gy = np.meshgrid(xs, ys)
    best = np.full(gx.shape, np.inf)
    for e in edges:
        cp = e.spline.control_points
        for a, b in zip(cp[:-1], cp[1:]):
            d = b - a
            t = ((gx - a[0]) * d[0] + (gy - a[1]) * d[1]) / (d @ d)
            t = np.clip(t, 0.0, 1.0)
            dist = np.hypot(gx - (a[0] + t * d[0]), gy - (a[1] + t * d[1]))
            np.minimum(best, dist, out=best)
    return OccupancyGrid(origin, cell_size, width, height, best <= band + 1e-9)


def town_network(lane_width=4.0) -> RoadNetwork:
    """One-way counter-clockwise 200 m square block with rounded corners, a
    signal before each corner, straight exits at the corners and two
    right-turn side spurs."""
    R = CORNER_RADIUS
    nodes = {
        "M1": (100.0, 0.0), "S1": (150.0, 0.0), "K2": (200.0 - R, 0.0),
        "M2": (200.0, 100.0), "K3": (200.0, 200.0 - R),
        "M3": (100.0, 200.0), "S3": (50.0, 200.0), "K4": (R, 200.0),
        "M4": (0.0, 100.0), "K1": (0.0, R),
        "E1": (0.0, -40.0), "E2": (240.0, 0.0), "E3": (200.0, 240.0), "E4": (-40.0, 200.0),
        "P1": (150.0 + R, -30.0), "P3": (50.0 - R, 230.0),
    }
    n = nodes
    e = [
        _edge("M1", "S1", [n["M1"], n["S1"]]),
        _edge("S1", "K2", [n["S1"], n["K2"]]),
        _edge("K2", "M2", arc(n["K2"], 0, R, 90) + [n["M2"]]),
        _edge("M2", "K3", [n["M2"], n["K3"]]),
        _edge("K3", "M3", arc(n["K3"], 90, R, 90) + [n["M3"]]),
        _edge("M3", "S3", [n["M3"], n["S3"]]),
        _edge("S3", "K4", [n["S3"], n["K4"]]),
        _edge("K4", "M4", arc(n["K4"], 180, R, 90) + [n["M4"]]),
        _edge("M4", "K1", [n["M4"], n["K1"]]),
        _edge("K1", "M1", arc(n["K1"], 270, R, 90) + [n["M1"]]),
        _edge("K1", "E1", [n["K1"], n["E1"]]),
        _edge("K2", "E2", [n["K2"], n["E2"]]),
        _edge("K3", "E3", [n["K3"], n["E3"]]),
        _edge("K4", "E4", [n["K4"], n["E4"]]),
        _edge("S1", "P1", arc(n["S1"], 0, R, -90) + [n["P1"]]),
        _edge("S3", "P3", arc(n["S3"], 180, R, -90) + [n["P3"]]),
    ]
    lights = [
        TrafficLight((185.0, 0.0), 1, [("Green", 10), ("Red", 12), ("Green", 8)]),
        TrafficLight((200.0, 185.0), 3, [("Red", 6), ("Green", 18), ("Red", 6)]),
        TrafficLight((15.0, 200.0), 6, [("Green", 4), ("Red", 12), ("Green", 14)]),
        TrafficLight((0.0, 15.0), 8, [("Red", 12), ("Green", 18)]),
    ]
    grid = rasterize(e, (-50.5, -50.5), 301, 301)
    return RoadNetwork(nodes, e, lights, grid, lane_width)


def town_scenario(network="town_network.json"):
    return {
        "schema": "flowsim/1",
        "network": network,
        "dt": 0.05,
        "duration": 120.0,
        "seed": 42,
        "mode": "spline",
        "router": "ch",
        "agents": [
            {"id": "a1", "spawn": "M1", "goal": "E3", "spawn_time": 0.0},
            {"id": "a2", "spawn": "M2", "goal": "E4", "spawn_time": 0.0},
            {"id": "a3", "spawn": "M3", "goal": "E1", "spawn_time": 0.0},
            {"id": "a4", "spawn": "M4", "goal": "E2", "spawn_time": 0.0},
            {"id": "a5", "spawn": "M1", "goal": "P1", "spawn_time": 10.0},
            {"id": "a6", "spawn": "M3", "goal": "P3", "spawn_time": 10.0},
        ],
    }


def strip_network(length=150.0, half_width=7.0) -> RoadNetwork:
    """Wide straight road; the grid covers the whole carriageway."""
    nodes = {"A": (0.0, 0.0), "B": (length, 0.0)}
    edges = [_edge("A", "B", [nodes["A"], nodes["B"]])]
    width = int(length) + 21
    height = 2 * int(half_width) + 1
    grid = OccupancyGrid((-10.5, -half_width - 0.5), 1.0, width, height,
                         np.ones(width * height, dtype=bool))
    return RoadNetwork(nodes, edges, [], grid, 2.0 * half_width)


def obstacle_scenario(network="strip_network.json"):
    return {
        "schema": "flowsim/1",
        "network": network,
        "dt": 0.05,
        "duration": 60.0,
        "seed": 42,
        "mode": "spline",
        "agents": [{"id": "a1", "spawn": "A", "goal": "B", "spawn_time": 0.0}],
        "obstacles": [{"position": [75.0, 0.0], "radius": 1.0}],
    }


def lane_network(length=100.0) -> RoadNetwork:
    """One lane drivable in both directions."""
    nodes = {"A": (0.0, 0.0), "B": (length, 0.0)}
    edges = [_edge("A", "B", [nodes["A"], nodes["B"]]),
             _edge("B", "A", [nodes["B"], nodes["A"]])]
    grid = rasterize(edges, (-10.5, -5.5), int(length) + 21, 11)
    return RoadNetwork(nodes, edges, [], grid, 4.0)


def headon_scenario(network="lane_network.json"):
    return {
        "schema": "flowsim/1",
        "network": network,
        "dt": 0.05,
        "duration": 40.0,
        "seed": 42,
        "mode": "spline",
        "agents": [
            {"id": "a1", "spawn": "A", "goal": "B", "spawn_time": 0.0},
            {"id": "a2", "spawn": "B", "goal": "A", "spawn_time": 0.0},
        ],
        "params": {"avoidance": False},
    }


def grid_network(rows, cols, spacing=10.0, speed=SPEED_LIMIT) -> RoadNetwork:
    """Manhattan lattice with two-way streets between neighbouring nodes;
    node ids are ``r{row}c{col}``."""
    nodes = {f"r{r}c{c}": (c * spacing, r * spacing) for r in range(rows) for c in range(cols)}
    edges = []
    for r in range(rows):
        for c in range(cols):
            for dr, dc in ((0, 1), (1, 0)):
                r2, c2 = r + dr, c + dc
                if r2 < rows and c2 < cols:
                    a, b = f"r{r}c{c}", f"r{r2}c{c2}"
                    edges.append(Edge(a, b, spacing, speed, Spline([nodes[a], nodes[b]])))
                    edges.append(Edge(b, a, spacing, speed, Spline([nodes[b], nodes[a]])))
    return RoadNetwork(nodes, edges)


def write_bundled(directory):
    """Write every bundled network and scenario file into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, net in (("town_network.json", town_network()),
                      ("strip_network.json", strip_network()),
                      ("lane_network.json", lane_network())):
        (d / name).write_text(json.dumps(network_to_dict(net), indent=1) + "\n")
    for name, sc in (("town.json", town_scenario()),
                     ("obstacle.json", obstacle_scenario()),
                     ("headon.json", headon_scenario())):
        (d / name).write_text(json.dumps(sc, indent=2) + "\n")
