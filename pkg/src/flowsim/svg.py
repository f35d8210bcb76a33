"""Minimal SVG writers for road maps, trajectories and scatter plots."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


class Canvas:
    def __init__(self, xmin, ymin, xmax, ymax, width=800, pad=20):
        span = max(xmax - xmin, ymax - ymin, 1e-9)
        self.scale = (width - 2 * pad) / span
        self.xmin, self.ymax, self.pad = xmin, ymax, pad
        self.w = int(round((xmax - xmin) * self.scale + 2 * pad))
        self.h = int(round((ymax - ymin) * self.scale + 2 * pad))
        self.body = []

    def xy(self, x, y):
        # flip y so north is up
        return (self.pad + (x - self.xmin) * self.scale, self.pad + (self.ymax - y) * self.scale)

    def _pts(self, pts):
        return " ".join("%.2f,%.2f" % self.xy(x, y) for x, y in pts)

    def path(self, polylines, stroke="#bbbbbb", width=3.0, cls="road"):
        d = " ".join("M " + " L ".join("%.2f %.2f" % self.xy(x, y) for x, y in pl) for pl in polylines)
        self.body.append(f'<path class="{cls}" d="{d}" fill="none" stroke="{stroke}" '
                         f'stroke-width="{width}"/>')

    def polyline(self, pts, stroke, width=1.5, cls=None):
        c = f' class="{escape(cls)}"' if cls else ""
        self.body.append(f'<polyline{c} points="{self._pts(pts)}" fill="none" stroke="{stroke}" '
                         f'stroke-width="{width}"/>')

    def circle(self, x, y, r, fill):
        cx, cy = self.xy(x, y)
        self.body.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r}" fill="{fill}"/>')

    def text(self, x, y, s, size=12):
        px, py = self.xy(x, y)
        self.body.append(f'<text x="{px:.2f}" y="{py:.2f}" font-size="{size}" '
                         f'font-family="sans-serif">{escape(str(s))}</text>')

    def open_group(self, gid):
        self.body.append(f'<g id="{escape(gid)}">')

    def close_group(self):
        self.body.append("</g>")

    def render(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">')
        return "\n".join([head, f'<rect width="{self.w}" height="{self.h}" fill="white"/>',
                          *self.body, "</svg>"]) + "\n"


def _bounds(point_sets):
    pts = np.vstack([np.asarray(p, dtype=float).reshape(-1, 2) for p in point_sets if len(p)])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    return lo[0], lo[1], hi[0], hi[1]


def trajectories_svg(network, layers) -> str:
    """Road centerlines plus one group per layer; ``layers`` maps a layer
    name to ``{agent_id: [(x, y), ...]}`` and each agent becomes a polyline."""
    roads = [e.spline.control_points for e in network.edges]
    sets = roads + [p for paths in layers.values() for p in paths.values()]
    c = Canvas(*_bounds(sets))
    c.path(roads, width=max(network.lane_width * c.scale, 1.0))
    for k, (name, paths) in enumerate(layers.items()):
        c.open_group(f"mode-{name}")
        for aid in sorted(paths):
            c.polyline(paths[aid], PALETTE[k % len(PALETTE)], cls=f"{name}:{aid}")
        c.close_group()
    for k, name in enumerate(layers):
        px, py = c.pad + 4, c.pad + 14 * (k + 1)
        c.body.append(f'<text x="{px}" y="{py}" font-size="12" font-family="sans-serif" '
                      f'fill="{PALETTE[k % len(PALETTE)]}">{escape(name)}</text>')
    return c.render()


def path_svg(grid, points) -> str:
    """Occupancy grid (blocked cells shaded) with a planned path on top."""
    x0, y0 = grid.origin
    cs = grid.cell_size
    c = Canvas(x0, y0, x0 + grid.width * cs, y0 + grid.height * cs)
    s = cs * c.scale
    for iy, row in enumerate(~grid.passable):
        # one rectangle per run of blocked cells
        edges = np.flatnonzero(np.diff(np.r_[0, row.astype(np.int8), 0]))
        for start, stop in zip(edges[::2], edges[1::2]):
            px, py = c.xy(x0 + start * cs, y0 + (iy + 1) * cs)
            c.body.append(f'<rect x="{px:.2f}" y="{py:.2f}" width="{(stop - start) * s:.2f}" '
                          f'height="{s:.2f}" fill="#444"/>')
    if len(points) > 1:
        c.polyline(points, PALETTE[1], width=2.0, cls="path")
    return c.render()


def scatter_svg(xs, ys, xlabel="x", ylabel="y") -> str:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    ymax = float(ys.max()) if len(ys) and ys.max() > 0 else 1.0
    xmax = float(xs.max()) if len(xs) and xs.max() > 0 else 1.0
    # stretch y to the x range so the plot is square-ish
    k = xmax / ymax
    c = Canvas(0.0, 0.0, xmax, xmax, width=500, pad=40)
    c.path([[(0, 0), (xmax, 0)], [(0, 0), (0, xmax)]], stroke="#000000", width=1.0, cls="axes")
    for x, y in zip(xs, ys):
        c.circle(x, y * k, 3, PALETTE[0])
    c.text(xmax * 0.45, -0.06 * xmax, xlabel)
    c.text(-0.07 * xmax, xmax * 1.03, f"{ylabel} (max {ymax:.3f})")
    return c.render()
