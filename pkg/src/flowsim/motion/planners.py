"""Local planners: potential field, grid A*, RRT sampling and the line-of-sight
helpers they share."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)


class NoPath(LookupError):
    pass


@dataclass
class Path:
    """Ordered world points with no timing attached."""

    points: np.ndarray
    cost: float = 0.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(self.points) < 1:
            raise ValueError("a path needs at least one point")

    def __len__(self):
        return len(self.points)

    @property
    def length(self) -> float:
        return float(np.hypot(*np.diff(self.points, axis=0).T).sum()) if len(self.points) > 1 else 0.0

    def to_dict(self):
        return {"points": self.points.tolist(), "cost": self.cost}


# potential field

def potential_field_step(pos, goal, obstacles, gains) -> np.ndarray:
    """Resultant of a linear pull toward ``goal`` and inverse-square pushes.

    ``gains`` is ``(k_att, k_rep, influence_radius)``; clearance is measured to
    each obstacle's surface and obstacles at or beyond the influence radius
    contribute nothing.
    """
    k_att, k_rep, rho0 = gains
    pos = np.asarray(pos, dtype=float)
    force = k_att * (np.asarray(goal, dtype=float) - pos)
    for center, radius in obstacles:
        off = pos - np.asarray(center, dtype=float)
        dc = math.hypot(off[0], off[1])
        d = dc - radius
        if d <= 0:
            raise ValueError("position lies inside an obstacle")
        if d >= rho0:
            continue
        force = force + k_rep * (1.0 / d - 1.0 / rho0) / (d * d) * (off / dc)
    return force


def field_plan(start, goal, obstacles, gains, step=0.5, tol=0.5, max_iter=5000) -> Path:
    """Follow the normalized field force in fixed steps until within ``tol``.

    ``obstacles`` is a list of ``(center, radius)`` or a callable giving the
    relevant list for a position.  Raises NoPath when the walk stalls (a
    local minimum) or runs out of iterations.
    """
    obs_at = obstacles if callable(obstacles) else (lambda _p: obstacles)
    p = np.asarray(start, dtype=float)
    g = np.asarray(goal, dtype=float)
    pts = [p.copy()]
    for _ in range(max_iter):
        if np.hypot(*(g - p)) <= tol:
            pts.append(g.copy())
            path = Path(pts)
            path.cost = path.length
            return path
        f = potential_field_step(p, g, obs_at(p), gains)
        mag = math.hypot(f[0], f[1])
        if mag < 1e-9:
            raise NoPath("potential field stalled in a local minimum")
        p = p + f / mag * min(step, np.hypot(*(g - p)))
        if len(pts) > 20 and np.hypot(*(p - pts[-20])) < step:
            raise NoPath("potential field stalled in a local minimum")
        pts.append(p.copy())
    raise NoPath("potential field did not reach the goal")


# grid search

_MOVES = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]


def octile(a, b) -> float:
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    return max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy)


def grid_neighbors(passable, x, y):
    """8-connected moves; a diagonal needs both side cells free (no corner cutting)."""
    h, w = passable.shape
    for dx, dy in _MOVES:
        nx, ny = x + dx, y + dy
        if not (0 <= nx < w and 0 <= ny < h) or not passable[ny, nx]:
            continue
        if dx and dy and not (passable[y, nx] and passable[ny, x]):
            continue
        yield nx, ny, (SQRT2 if dx and dy else 1.0)


def grid_plan(grid, start, goal, stats=None) -> Path:
    """Octile A* between cells; ``cost`` is in meters.  ``stats["expanded"]``
    accumulates settled cells when a dict is passed."""
    start = (int(start[0]), int(start[1]))
    goal = (int(goal[0]), int(goal[1]))
    for c, name in ((start, "start"), (goal, "goal")):
        if not grid.is_passable(c):
            raise ValueError(f"{name} cell {c} is not passable")
    passable = grid.passable
    g = {start: 0.0}
    parent = {start: None}
    heap = [(octile(start, goal), 0.0, start)]
    closed = set()
    while heap:
        _, d, u = heapq.heappop(heap)
        if u in closed:
            continue
        closed.add(u)
        if stats is not None:
            stats["expanded"] = stats.get("expanded", 0) + 1
        if u == goal:
            cells = []
            while u is not None:
                cells.append(u)
                u = parent[u]
            cells.reverse()
            pts = np.array([grid.cell_center(c) for c in cells])
            return Path(pts, d * grid.cell_size)
        for nx, ny, c in grid_neighbors(passable, *u):
            v = (nx, ny)
            nd = d + c
            if nd < g.get(v, math.inf) - 1e-12:
                g[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd + octile(v, goal), nd, v))
    raise NoPath(f"no grid path from {start} to {goal}")


def grid_plan_points(grid, p0, p1, stats=None) -> Path:
    """Grid plan between world points, with the exact endpoints attached."""
    path = grid_plan(grid, grid.cell_of(p0), grid.cell_of(p1), stats)
    pts = np.vstack([np.asarray(p0, float), path.points, np.asarray(p1, float)])
    return Path(pts, path.cost)


# line of sight

def segment_cells(grid, a, b):
    """Every cell a segment touches (grid traversal; a corner crossing touches
    all cells meeting there)."""
    return list(_walk(grid, a, b))


def _walk(grid, a, b):
    cs = grid.cell_size
    ax, ay = (a[0] - grid.origin[0]) / cs, (a[1] - grid.origin[1]) / cs
    bx, by = (b[0] - grid.origin[0]) / cs, (b[1] - grid.origin[1]) / cs
    x, y = math.floor(ax), math.floor(ay)
    ex, ey = math.floor(bx), math.floor(by)
    dx, dy = bx - ax, by - ay
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    tdx = abs(1.0 / dx) if dx else math.inf
    tdy = abs(1.0 / dy) if dy else math.inf
    tx = ((x + 1 - ax) if dx > 0 else (ax - x)) * tdx if dx else math.inf
    ty = ((y + 1 - ay) if dy > 0 else (ay - y)) * tdy if dy else math.inf
    yield x, y
    budget = 2 * (abs(ex - x) + abs(ey - y)) + 2
    while budget > 0 and (x, y) != (ex, ey):
        budget -= 1
        if abs(tx - ty) < 1e-12:
            yield x + sx, y
            yield x, y + sy
            x += sx
            y += sy
            tx += tdx
            ty += tdy
        elif tx < ty:
            x += sx
            tx += tdx
        else:
            y += sy
            ty += tdy
        yield x, y


def segment_free(grid, a, b) -> bool:
    return all(grid.is_passable(c) for c in _walk(grid, a, b))


def shortcut_path(grid, points) -> np.ndarray:
    """Greedy string pulling: from each anchor, advance while the next point
    stays visible."""
    pts = np.asarray(points, dtype=float)
    if len(pts) <= 2:
        return pts
    out = [pts[0]]
    i = 0
    while i < len(pts) - 1:
        j = i + 1
        while j + 1 < len(pts) and segment_free(grid, pts[i], pts[j + 1]):
            j += 1
        out.append(pts[j])
        i = j
    return np.array(out)


# sampling

def sample_plan(grid, start, goal, n_samples, seed, step=None) -> Path:
    """Seeded RRT over passable space with straight, collision-checked edges."""
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    for p, name in ((start, "start"), (goal, "goal")):
        if not grid.is_passable(grid.cell_of(p)):
            raise ValueError(f"{name} {tuple(p)} is not in passable space")
    if np.array_equal(start, goal):
        return Path([start], 0.0)
    step = grid.cell_size if step is None else float(step)
    rng = np.random.default_rng(seed)
    free = np.argwhere(grid.passable)  # rows of (iy, ix)
    nodes = [start]
    parent = [-1]
    arr = np.empty((n_samples + 2, 2))
    arr[0] = start

    def finish(k):
        pts = [goal]
        while k >= 0:
            pts.append(nodes[k])
            k = parent[k]
        path = Path(pts[::-1])
        path.cost = path.length
        return path

    if np.hypot(*(goal - start)) <= step and segment_free(grid, start, goal):
        return finish(0)
    for _ in range(n_samples):
        iy, ix = free[rng.integers(len(free))]
        q = grid.cell_center((ix, iy)) + (rng.random(2) - 0.5) * grid.cell_size
        k = int(np.argmin(np.hypot(*(arr[: len(nodes)] - q).T)))
        near = nodes[k]
        off = q - near
        dist = math.hypot(off[0], off[1])
        if dist == 0.0:
            continue
        new = q if dist <= step else near + off * (step / dist)
        if not segment_free(grid, near, new):
            continue
        nodes.append(new)
        parent.append(k)
        arr[len(nodes) - 1] = new
        if np.hypot(*(goal - new)) <= step and segment_free(grid, new, goal):
            return finish(len(nodes) - 1)
    raise NoPath(f"no path found after {n_samples} samples")
