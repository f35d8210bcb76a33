"""Four local planners between the same two points of the town.

Grid A* gives the shortest 8-connected path, RRT a random but collision-free
one, the potential field follows forces, and the quintic trajectory ignores
the map and adds timing.
"""
from pathlib import Path

from flowsim.motion import ControlLimits, NoPath, check_limits, field_plan, grid_plan_points
from flowsim.motion import quintic_connect, sample_plan
from flowsim.road_network import load_network

net = load_network(Path(__file__).resolve().parent.parent / "scenarios" / "town_network.json")
grid = net.grid
a, b = (0.0, -40.0), (0.0, 60.0)

path = grid_plan_points(grid, a, b)
print(f"grid A*   {len(path):4d} points, length {path.length:6.1f} m")
path = sample_plan(grid, a, b, 20000, seed=3)
print(f"RRT       {len(path):4d} points, length {path.length:6.1f} m")
try:
    path = field_plan(a, b, [((0.8, 10.0), 1.0)], (1.0, 5.0, 4.0), step=0.5)
    print(f"field     {len(path):4d} points, length {path.length:6.1f} m (one post at (0.8, 10))")
except NoPath as exc:
    print(f"field     {exc}")

z = (0.0, 0.0)
for T in (5.0, 15.0):
    traj = quintic_connect((a, z, z), (b, z, z), T, dt=0.05)
    v = check_limits(traj, ControlLimits())
    print(f"quintic   T={T:4.1f} s peak speed {traj.speeds.max():5.1f} m/s, {len(v)} limit violations")
