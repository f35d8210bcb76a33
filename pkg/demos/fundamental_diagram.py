"""Flow against density on a ring road of cells.

Sparse traffic moves at full speed, so flow rises with density; past the
critical density jams appear and flow falls to zero at a full ring.
"""
import numpy as np

from flowsim.ca_traffic import fundamental_diagram

v_max = 5
rows = fundamental_diagram(1000, np.linspace(0.0, 1.0, 21), v_max=v_max, p_slow=0.3, steps=2000, seed=0)
peak = max(rows, key=lambda r: r.flow)
for r in rows:
    bar = "#" * int(round(r.flow * 100))
    print(f"{r.density:4.2f}  {r.flow:5.3f}  {r.mean_speed:4.2f}  {bar}")
print(f"\npeak flow {peak.flow:.3f} at density {peak.density:.2f}; "
      f"the deterministic limit is 1/(v_max+1) = {1 / (v_max + 1):.3f}")
