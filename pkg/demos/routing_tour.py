"""Six routing techniques on one city grid.

Every technique returns the same route cost; what differs is how much of
the graph each one has to look at.  Run:  python3 demos/routing_tour.py
"""
import time

import numpy as np

from flowsim.routing import ALGORITHMS, Router, Unreachable
from flowsim.scenarios import grid_network

net = grid_network(30, 30)
ids = sorted(net.nodes)
rng = np.random.default_rng(1)
pairs = [(ids[a], ids[b]) for a, b in rng.integers(len(ids), size=(50, 2))]

print(f"{len(net.nodes)} intersections, {len(net.edges)} lane edges, {len(pairs)} queries\n")
print(f"{'technique':10} {'prep ms':>9} {'scanned':>9} {'cost sum':>12}")
for algo in ALGORITHMS:
    t0 = time.perf_counter()
    router = Router(net, algo, seed=0)
    prep = (time.perf_counter() - t0) * 1e3
    costs, scanned = [], []
    for s, t in pairs:
        try:
            r = router.query(s, t)
        except Unreachable:
            continue
        costs.append(r.total_cost)
        scanned.append(r.scanned_vertices)
    print(f"{algo:10} {prep:9.1f} {np.mean(scanned):9.1f} {sum(costs):12.1f}")

# the hierarchy answers a cross-town query touching only a handful of vertices
a, b = "r0c0", "r29c29"
r = Router(net, "ch").query(a, b)
print(f"\n{a} -> {b}: cost {r.total_cost:.0f} m over {len(r.node_sequence)} nodes, "
      f"{r.scanned_vertices} vertices scanned")
