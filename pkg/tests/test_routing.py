import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import oracle_costs, path_is_valid, random_digraph
from flowsim.routing import (
    ALGORITHMS, Graph, RouteQuery, Router, Unreachable, alt_preprocess, arcflags_preprocess,
    arcflags_query, astar, ch_preprocess, ch_query, dijkstra, reach_preprocess,
)
from flowsim.routing.reach import MAX_EXACT_VERTICES, reach_values
from flowsim.scenarios import grid_network


def triangle():
    return Graph("ABC", [("A", "B", 1), ("B", "C", 1), ("A", "C", 3)])


def all_simple_paths(g, s, t):
    """Enumerate simple paths by brute force (tiny graphs only)."""
    out = []

    def walk(path):
        u = path[-1]
        if u == t:
            out.append(list(path))
            return
        for v, _, _ in g.out_adj[g.index[u]]:
            vid = g.ids[v]
            if vid not in path:
                walk(path + [vid])

    walk([s])
    return out


def test_triangle_matches_enumeration():
    g = triangle()
    r = dijkstra(g, RouteQuery("A", "C"))
    costs = {tuple(p): g.path_cost([g.index[v] for v in p]) for p in all_simple_paths(g, "A", "C")}
    assert r.total_cost == min(costs.values()) == 2
    assert r.node_sequence == ["A", "B", "C"]


def test_identity_query():
    r = dijkstra(triangle(), ("A", "A"))
    assert r.total_cost == 0 and r.node_sequence == ["A"]


def test_isolated_target():
    g = Graph("ABZ", [("A", "B", 1)])
    for algo in ALGORITHMS:
        with pytest.raises(Unreachable):
            Router(g, algo).query("A", "Z")


def test_unknown_node():
    with pytest.raises(KeyError):
        dijkstra(triangle(), ("A", "Q"))


def test_tie_break_smaller_id():
    # two equal paths A-B-D and A-C-D: the smaller predecessor id wins
    g = Graph("ABCD", [("A", "C", 1), ("A", "B", 1), ("C", "D", 1), ("B", "D", 1)])
    assert dijkstra(g, ("A", "D")).node_sequence == ["A", "B", "D"]


def test_astar_zero_heuristic_is_dijkstra():
    for seed in range(200):
        g = random_digraph(seed, n_max=60, m_max=240)
        rng = np.random.default_rng(seed)
        s, t = (int(x) for x in rng.integers(0, g.n, size=2))
        try:
            ref = dijkstra(g, (s, t))
        except Unreachable:
            with pytest.raises(Unreachable):
                astar(g, (s, t), heuristic=lambda v: 0.0)
            continue
        got = astar(g, (s, t), heuristic=lambda v: 0.0)
        assert got.total_cost == ref.total_cost
        assert got.node_sequence == ref.node_sequence


def test_astar_euclidean_on_grid_scans_less():
    g = grid_network(20, 20).graph()
    rng = np.random.default_rng(0)
    for a, b in rng.integers(0, g.n, size=(20, 2)):
        q = (g.ids[a], g.ids[b])
        ref, got = dijkstra(g, q), astar(g, q)
        assert got.total_cost == ref.total_cost
        assert got.scanned_vertices <= ref.scanned_vertices


def test_astar_corridor_scans_only_corridor():
    # a 10-vertex straight corridor with side branches; Euclidean A* never
    # settles a branch vertex because each one is farther from the target
    nodes = {f"c{i}": (10.0 * i, 0.0) for i in range(10)}
    edges = []
    for i in range(9):
        edges += [(f"c{i}", f"c{i+1}", 10.0), (f"c{i+1}", f"c{i}", 10.0)]
        nodes[f"b{i}"] = (10.0 * i, 10.0)
        edges += [(f"c{i}", f"b{i}", 10.0), (f"b{i}", f"c{i}", 10.0)]
    g = Graph(nodes, edges, positions=nodes)
    r = astar(g, ("c0", "c9"))
    assert r.scanned_vertices == 10
    assert r.node_sequence == [f"c{i}" for i in range(10)]


def single_landmark(g, name):
    from scipy.sparse.csgraph import dijkstra as spd
    from flowsim.routing.alt import AltIndex
    li = g.index[name]
    return AltIndex([name], np.array([li]), spd(g.csr(), indices=[li]),
                    spd(g.csr(transpose=True), indices=[li]))


def test_alt_bound_arithmetic():
    # two-way road L - t - s: dist(L,s)=5, dist(L,t)=2 gives a bound of 3
    g = Graph(["L", "s", "t"], [("L", "t", 2), ("t", "L", 2), ("t", "s", 3), ("s", "t", 3)])
    h = single_landmark(g, "L").lower_bounds(g.index["t"])
    assert h[g.index["s"]] == 3.0


def test_alt_bound_one_way_stays_admissible():
    # one-way L -> t -> s plus a cheap s -> t: |2 - 5| = 3 would overestimate dist(s,t)=1
    g = Graph(["L", "s", "t"], [("L", "t", 2), ("t", "s", 3), ("s", "t", 1)])
    h = single_landmark(g, "L").lower_bounds(g.index["t"])
    assert h[g.index["s"]] <= 1.0


def test_alt_bound_tight_at_landmark():
    g = random_digraph(7, n_max=80, m_max=320)
    idx = alt_preprocess(g, 3, seed=1)
    D = oracle_costs(g, np.arange(g.n))
    for li in idx.landmark_idx:
        for t in range(g.n):
            if np.isfinite(D[li, t]):
                assert idx.lower_bounds(t)[li] == D[li, t]


def test_alt_admissible():
    for seed in range(20):
        g = random_digraph(seed, n_max=200, m_max=800)
        idx = alt_preprocess(g, min(4, g.n), seed=seed)
        D = oracle_costs(g, np.arange(g.n))
        for t in range(0, g.n, max(1, g.n // 10)):
            h = idx.lower_bounds(t)
            assert np.all(h <= D[:, t] + 1e-9)


@pytest.mark.parametrize("algo", ["alt", "arcflags", "ch", "reach"])
def test_oracle_equivalence(algo):
    for seed in range(100, 200):
        g = random_digraph(seed, n_max=200, m_max=800)
        rng = np.random.default_rng(seed)
        qs = rng.integers(0, g.n, size=(5, 2))
        D = oracle_costs(g, qs[:, 0])
        r = Router(g, algo, seed=seed)
        for k, (s, t) in enumerate(qs):
            try:
                route = r.query(int(s), int(t))
            except Unreachable:
                assert math.isinf(D[k, t])
                continue
            assert route.total_cost == D[k, t]
            assert route.node_sequence[0] == s and route.node_sequence[-1] == t
            assert path_is_valid(g, route.node_sequence, route.total_cost)


def test_arcflags_single_cell_matches_dijkstra_scan():
    g = random_digraph(11, n_max=120, m_max=480)
    idx = arcflags_preprocess(g, 1)
    assert idx.flags.all()
    rng = np.random.default_rng(2)
    for s, t in rng.integers(0, g.n, size=(20, 2)):
        try:
            ref = dijkstra(g, (int(s), int(t)))
        except Unreachable:
            continue
        got = arcflags_query(g, idx, (int(s), int(t)))
        assert got.scanned_vertices == ref.scanned_vertices
        assert got.node_sequence == ref.node_sequence


def test_arcflags_line_graph_prunes_backward_edges():
    n = 20
    edges = [(i, i + 1, 1.0) for i in range(n - 1)] + [(i + 1, i, 1.0) for i in range(n - 1)]
    g = Graph(range(n), edges)
    idx = arcflags_preprocess(g, 2, seed=0)
    cells = idx.cell_of
    t = n - 1
    s = next(v for v in range(1, n) if cells[v] != cells[t])
    log = []
    r = arcflags_query(g, idx, (s, t), log=log)
    assert r.total_cost == t - s
    # nothing relaxed in the direction away from the target cell
    assert all(v > u for u, v in log)


def test_ch_path_example():
    g = Graph("abc", [("a", "b", 2), ("b", "c", 3)])
    idx = ch_preprocess(g, order=["b", "a", "c"])
    assert [(g.ids[u], g.ids[x], c, g.ids[m]) for u, x, c, m in idx.shortcuts] == [("a", "c", 5.0, "b")]
    r = ch_query(g, idx, ("a", "c"))
    assert r.total_cost == 5
    assert r.node_sequence == ["a", "b", "c"]
    assert dijkstra(g, ("a", "c")).total_cost == 5


def test_ch_forced_order_must_be_permutation():
    with pytest.raises(ValueError):
        ch_preprocess(triangle(), order=["A", "B"])


def test_ch_shortcuts_unpack_to_original_edges():
    for seed in range(30):
        g = random_digraph(seed, n_max=150, m_max=600)
        idx = ch_preprocess(g)
        orig = {(int(u), int(v)): w for u, v, w in zip(g.src, g.dst, g.w)}
        for u, x, c, _ in idx.shortcuts:
            path = idx.unpack(u, x)
            total = sum(orig[(a, b)] for a, b in zip(path, path[1:]))
            assert abs(total - c) <= 1e-9


def test_ch_order_is_permutation():
    g = random_digraph(5)
    idx = ch_preprocess(g)
    assert sorted(idx.order) == list(range(g.n))


def test_ch_fewer_scans_on_grid():
    g = grid_network(30, 30).graph()
    idx = ch_preprocess(g)
    rng = np.random.default_rng(4)
    ch_scan, dj_scan = [], []
    for a, b in rng.integers(0, g.n, size=(30, 2)):
        q = (g.ids[a], g.ids[b])
        ref, got = dijkstra(g, q), ch_query(g, idx, q)
        assert got.total_cost == ref.total_cost
        ch_scan.append(got.scanned_vertices)
        dj_scan.append(ref.scanned_vertices)
    assert np.mean(ch_scan) < np.mean(dj_scan)


def test_reach_path_example():
    g = Graph("stv", [("s", "v", 4), ("v", "t", 7)])
    idx = reach_preprocess(g)
    assert idx.reach[g.index["v"]] == 4


def brute_reach(g):
    """Definition by enumeration: every pair, every vertex on a shortest path."""
    D = oracle_costs(g, np.arange(g.n))
    r = np.zeros(g.n)
    for s, t, v in itertools.product(range(g.n), repeat=3):
        if np.isfinite(D[s, t]) and D[s, v] + D[v, t] == D[s, t]:
            r[v] = max(r[v], min(D[s, v], D[v, t]))
    return r


def test_reach_star_center():
    leaves = {"a": 3, "b": 5, "c": 8, "d": 2}
    edges = [("o", k, w) for k, w in leaves.items()] + [(k, "o", w) for k, w in leaves.items()]
    g = Graph(["o", *leaves], edges)
    idx = reach_preprocess(g)
    expected = max(min(leaves[a], leaves[b]) for a in leaves for b in leaves if a != b)
    assert idx.reach[g.index["o"]] == expected == 5
    assert np.array_equal(idx.reach, brute_reach(g))


def test_reach_matches_brute_force():
    for seed in range(25):
        g = random_digraph(seed, n_max=25, m_max=80)
        assert np.array_equal(reach_preprocess(g).reach, brute_reach(g))


def test_reach_values_empty_and_limit():
    assert reach_values(np.zeros((0, 0)), [], [], []).shape == (0,)
    big = Graph(range(MAX_EXACT_VERTICES + 1), [])
    with pytest.raises(ValueError):
        reach_preprocess(big)


def test_routes_deterministic():
    g = random_digraph(9)
    out = []
    for _ in range(2):
        rows = []
        for algo in ALGORITHMS:
            r = Router(g, algo, seed=3)
            for s, t in np.random.default_rng(0).integers(0, g.n, size=(10, 2)):
                try:
                    route = r.query(int(s), int(t))
                    rows.append([algo, route.node_sequence, route.total_cost, route.scanned_vertices])
                except Unreachable:
                    rows.append([algo, None])
        out.append(json.dumps(rows, default=int))
    assert out[0] == out[1]


def test_router_rejects_unknown_algo():
    with pytest.raises(ValueError, match="dijkstra"):
        Router(triangle(), "bogus")


def test_time_weighting():
    from flowsim.road_network import Edge, RoadNetwork, Spline
    nodes = {"A": (0.0, 0.0), "B": (100.0, 0.0), "C": (50.0, 50.0)}
    edges = [Edge("A", "B", 100.0, 5.0, Spline([nodes["A"], nodes["B"]])),
             Edge("A", "C", 71.0, 30.0, Spline([nodes["A"], nodes["C"]])),
             Edge("C", "B", 71.0, 30.0, Spline([nodes["C"], nodes["B"]]))]
    net = RoadNetwork(nodes, edges)
    assert dijkstra(net, ("A", "B")).node_sequence == ["A", "B"]
    assert dijkstra(net, ("A", "B"), weight="time").node_sequence == ["A", "C", "B"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_ch_and_reach_property(seed):
    g = random_digraph(seed, n_max=40, m_max=160)
    rng = np.random.default_rng(seed)
    s, t = (int(x) for x in rng.integers(0, g.n, size=2))
    D = oracle_costs(g, [s])
    for algo in ("ch", "reach", "alt", "arcflags"):
        try:
            c = Router(g, algo, seed=seed).query(s, t).total_cost
        except Unreachable:
            c = math.inf
        assert c == D[0, t]
