"""The bundled town in both guidance modes.

Six cars leave the town's edges, obey four signalled intersections and park
at their goals.  SplineFollow steers along the lane curve; GridFollow plans
on the occupancy grid.  Writes town.svg with both sets of paths overlaid.
"""
from pathlib import Path

from flowsim.sim_engine import evaluate_modes, load_scenario
from flowsim.svg import trajectories_svg

here = Path(__file__).resolve().parent
cfg = load_scenario(here.parent / "scenarios" / "town.json")
report, paths = evaluate_modes(cfg)

for mode, m in report["modes"].items():
    agg = m["aggregate"]
    print(f"{mode}: {agg['parked']}/{agg['agents']} parked, {agg['collision_count']} collisions, "
          f"mean travel {agg['mean_travel_time']:.1f} s, mean parking error {agg['mean_parking_error']:.2f} m")
    for aid, a in m["agents"].items():
        print(f"  {aid} {' > '.join(a['route']):28} {a['status']:8} {a['travel_time']:6.1f} s "
              f"jerk {a['mean_abs_jerk']:.2f}")

out = Path("town.svg")
out.write_text(trajectories_svg(cfg.network, paths))
print(f"\nwrote {out}")
