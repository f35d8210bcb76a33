import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowsim.road_network import (
    Color, NetworkError, OccupancyGrid, Spline, TrafficLight, light_phase, load_network,
    network_from_dict, network_to_dict, save_network, spline_nearest, spline_tangent,
)
from flowsim.scenarios import town_network


def two_node(length=10.0, spline=None):
    return {
        "nodes": [{"id": "A", "x": 0, "y": 0}, {"id": "B", "x": 10, "y": 0}],
        "edges": [{"from": "A", "to": "B", "length": length, "speed_limit": 10,
                   "spline": spline or [[0, 0], [10, 0]]}],
    }


def dense_nearest(points, p, n=100_000):
    """Brute force: sample the polyline uniformly by arc length."""
    pts = np.asarray(points, dtype=float)
    seg = np.hypot(*np.diff(pts, axis=0).T)
    cum = np.r_[0.0, np.cumsum(seg)]
    s = np.linspace(0.0, cum[-1], n)
    xs = np.interp(s, cum, pts[:, 0])
    ys = np.interp(s, cum, pts[:, 1])
    d = np.hypot(xs - p[0], ys - p[1])
    k = int(np.argmin(d))
    return s[k], d[k]


def test_load_minimal(tmp_path):
    f = tmp_path / "net.json"
    f.write_text(json.dumps(two_node()))
    net = load_network(f)
    assert len(net.edges) == 1
    assert net.graph().w.tolist() == [10.0]


def test_dangling_node_named():
    d = two_node()
    d["edges"][0]["to"] = "Z"
    d["edges"][0]["spline"] = [[0, 0], [10, 0]]
    with pytest.raises(NetworkError, match="Z"):
        network_from_dict(d)


def test_length_must_match_arc_length():
    # declared 10 m, spline arc 10 + 10 = 20 m
    with pytest.raises(NetworkError, match="arc length"):
        network_from_dict(two_node(10.0, [[0, 0], [10, 0], [10, 10]]))
    # within 10% is accepted
    network_from_dict(two_node(10.9))


def test_non_positive_length():
    with pytest.raises(NetworkError):
        network_from_dict(two_node(0.0))


def test_malformed_file(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{nodes: ")
    with pytest.raises(NetworkError):
        load_network(f)


def test_nearest_projection():
    sp = Spline([(0, 0), (10, 0)])
    s, q, d = spline_nearest(sp, (1, 5))
    assert s == pytest.approx(1.0)
    assert q == pytest.approx([1.0, 0.0])
    assert d == pytest.approx(5.0)


def test_nearest_on_curve():
    sp = Spline([(0, 0), (5, 0), (5, 5)])
    s, q, d = spline_nearest(sp, (5, 2))
    assert d == pytest.approx(0.0, abs=1e-12)
    assert q == pytest.approx([5.0, 2.0])
    assert s == pytest.approx(7.0)


def test_nearest_v_shape_dense_oracle():
    pts = [(0, 0), (5, 0), (5, 5)]
    s, _, d = spline_nearest(Spline(pts), (6, -1))
    s_ref, d_ref = dense_nearest(pts, (6, -1))
    assert abs(d - d_ref) <= 1e-3
    assert abs(s - s_ref) <= 1e-3


def test_nearest_ties_toward_smaller_s():
    # equidistant from both arms of a U
    sp = Spline([(0, 10), (0, 0), (10, 0), (10, 10)])
    # (0,10) at s=0 and (10,10) at s=30 are both 5 m away
    s, _, d = spline_nearest(sp, (5, 10))
    assert d == pytest.approx(5.0)
    assert s == pytest.approx(0.0)


def test_tangent_examples():
    assert spline_tangent(Spline([(0, 0), (10, 0)]), 3.3) == pytest.approx([1.0, 0.0])
    corner = Spline([(0, 0), (1, 0), (1, 1)])
    h = math.sqrt(2) / 2
    assert spline_tangent(corner, 1.0) == pytest.approx([h, h])
    with pytest.raises(ValueError):
        spline_tangent(corner, 5.0)


def test_tangent_unit_norm():
    rng = np.random.default_rng(3)
    sp = Spline(rng.uniform(-50, 50, size=(12, 2)))
    for s in rng.uniform(0, sp.length, size=1000):
        assert np.linalg.norm(spline_tangent(sp, s)) == pytest.approx(1.0, abs=1e-9)


def test_light_phase_examples():
    light = TrafficLight((0, 0), 0, [("Red", 10), ("Green", 10)])
    assert light_phase(light, 5) is Color.RED
    assert light_phase(light, 10) is Color.GREEN
    assert light_phase(light, 25) is Color.RED


def test_light_validation():
    with pytest.raises(NetworkError):
        TrafficLight((0, 0), 0, [])
    with pytest.raises(NetworkError):
        TrafficLight((0, 0), 0, [("Red", 0)])


def test_grid_cell_boundaries():
    g = OccupancyGrid((0.0, 0.0), 1.0, 4, 3, np.ones(12, dtype=bool))
    assert g.cell_of((0.999, 0.0)) == (0, 0)
    # a boundary belongs to the higher-index cell
    assert g.cell_of((1.0, 2.0)) == (1, 2)
    with pytest.raises(ValueError):
        OccupancyGrid((0.0, 0.0), 1.0, 4, 3, np.ones(11, dtype=bool))


def test_round_trip(tmp_path):
    net = town_network()
    f = tmp_path / "town.json"
    save_network(net, f)
    again = load_network(f)
    assert again == net
    assert network_to_dict(again) == network_to_dict(net)


points = st.tuples(st.floats(-100, 100), st.floats(-100, 100))


@st.composite
def polylines(draw, coord=100.0, max_size=8):
    xy = st.tuples(st.floats(-coord, coord), st.floats(-coord, coord))
    pts = draw(st.lists(xy, min_size=2, max_size=max_size))
    out = [pts[0]]
    for p in pts[1:]:
        if math.dist(p, out[-1]) > 1e-3:
            out.append(p)
    if len(out) < 2:
        out.append((out[0][0] + 1.0, out[0][1]))
    return out


@settings(max_examples=200, deadline=None)
@given(polylines(), points)
def test_nearest_never_beaten_by_control_point(pts, p):
    _, _, d = spline_nearest(Spline(pts), p)
    for c in pts:
        assert d <= math.dist(p, c) + 1e-9


# short polylines keep the 1e5-sample oracle's spacing under 2 mm
@settings(max_examples=100, deadline=None)
@given(polylines(coord=10.0, max_size=5), st.tuples(st.floats(-15, 15), st.floats(-15, 15)))
def test_nearest_matches_dense_sampling(pts, p):
    sp = Spline(pts)
    s, q, d = spline_nearest(sp, p)
    _, d_ref = dense_nearest(pts, p)
    assert d <= d_ref + 1e-9
    assert d_ref - d <= 1e-3
    assert np.allclose(sp.point_at(s), q, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["Red", "Green"]), st.floats(0.1, 60)), min_size=1, max_size=5),
       st.floats(0, 1e4))
def test_light_phase_periodic(schedule, t):
    light = TrafficLight((0, 0), 0, schedule)
    c = light.cycle_length
    # stay clear of phase boundaries where float rounding could flip the answer
    edges = np.cumsum([d for _, d in light.phase_schedule])
    tm = math.fmod(t, c)
    if np.min(np.abs(np.r_[0.0, edges] - tm)) < 1e-6:
        return
    assert light_phase(light, t) == light_phase(light, t + c)
