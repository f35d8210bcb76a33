"""An obstacle sits on the lane curve but not in the road graph.

A car that only follows the lane curve has nothing telling it to swerve, so
it brakes and waits behind the obstacle.  A car planning on the occupancy
grid sees the blocked cells and drives around.
"""
from pathlib import Path

from flowsim.sim_engine import load_scenario, run

cfg = load_scenario(Path(__file__).resolve().parent.parent / "scenarios" / "obstacle.json")
(center, radius), = cfg.obstacles
print(f"obstacle at {center}, radius {radius} m\n")
for mode in ("spline", "grid"):
    records, m = run(cfg.with_mode(mode))
    a = m["agents"]["a1"]
    last = records[-1]["agents"][0]
    print(f"{m['mode']:13} ends {a['status']:8} at x = {last['x']:6.1f}, "
          f"collisions {a['collision_count']}, offroad {a['offroad_distance_integral']:.1f} m*s")
