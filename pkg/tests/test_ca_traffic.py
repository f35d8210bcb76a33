import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowsim.ca_traffic import CellLattice, ca_inject, ca_step, fundamental_diagram, measure


def reference_step(cells, v_max):
    """Deterministic NaSch on a ring, written cell by cell: ``cells`` holds a
    speed or -1.  Returns the new cells and how many cars passed cell 0."""
    n = len(cells)
    out = [-1] * n
    passed = 0
    for i, v in enumerate(cells):
        if v < 0:
            continue
        gap = 0
        while gap < n - 1 and cells[(i + gap + 1) % n] < 0:
            gap += 1
        v = min(v + 1, v_max, gap)
        j = i + v
        if i < n <= j:
            passed += 1
        out[j % n] = v
    return out, passed


def test_acceleration_sequence():
    lat = CellLattice(10, v_max=3, p_slow=0.0, positions=[0])
    speeds = [int(ca_step(lat).speed[0]) for _ in range(3)]
    assert speeds == [1, 2, 3]


def test_adjacent_vehicles_block():
    lat = CellLattice(10, v_max=3, p_slow=0.0, positions=[4, 5])
    ca_step(lat)
    # rear car at 4 had gap 0 and stayed put
    assert lat.pos.tolist()[0] == 4
    assert lat.speed.tolist()[0] == 0


def test_conservation_long_run():
    lat = CellLattice.random(200, 0.3, seed=5, p_slow=0.3)
    n = lat.n_vehicles
    for _ in range(10_000):
        lat.step()
    assert lat.n_vehicles == n


def test_inject_rate():
    lat = CellLattice(1, closed=False, v_max=5, p_slow=0.0)
    rng = np.random.default_rng(17)
    hits = 0
    for _ in range(10_000):
        before = lat.n_vehicles
        ca_inject(lat, 0.5, rng)
        hits += lat.n_vehicles - before
        lat.step()
        assert lat.n_vehicles == 0  # the one-cell buffer drains every step
    assert abs(hits / 10_000 - 0.5) <= 0.02


def test_inject_edges():
    lat = CellLattice(5, closed=False)
    ca_inject(lat, 0.0, 1)
    assert lat.n_vehicles == 0
    ca_inject(lat, 1.0, 1)
    assert lat.pos.tolist() == [0]
    with pytest.raises(ValueError):
        ca_inject(CellLattice(5), 0.5, 1)


def test_measure_empty():
    s = measure(CellLattice(50), 10)
    assert (s.density, s.flow, s.mean_speed) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        measure(CellLattice(50), 0)


def test_free_flow_single_vehicle():
    lat = CellLattice(100, v_max=5, p_slow=0.0, positions=[0])
    for _ in range(5):
        lat.step()
    assert measure(lat, 50).mean_speed == 5


@pytest.mark.parametrize("length", [7, 9, 12])
def test_matches_cellwise_reference(length):
    rng = np.random.default_rng(length)
    for n in range(length + 1):
        pos = np.sort(rng.choice(length, size=n, replace=False))
        lat = CellLattice(length, v_max=3, p_slow=0.0, positions=pos)
        cells = [-1] * length
        for p in pos:
            cells[p] = 0
        for _ in range(30):
            lat.step(detector=0)
            cells, passed = reference_step(cells, 3)
            assert lat.occupancy().tolist() == cells
            assert lat.last_crossings == passed


def test_flow_density_curve_small_ring():
    v_max = 3
    rows = fundamental_diagram(100, np.round(np.arange(0.05, 1.0, 0.05), 2), v_max=v_max,
                               p_slow=0.0, steps=600, seed=1)
    flows = [r.flow for r in rows]
    assert min(flows) >= 0
    peak = rows[int(np.argmax(flows))].density
    assert abs(peak - 1 / (v_max + 1)) <= 0.1
    full = fundamental_diagram(100, [1.0], v_max=v_max, steps=50)[0]
    assert full.flow == 0


def test_bad_construction():
    with pytest.raises(ValueError):
        CellLattice(10, positions=[1, 1])
    with pytest.raises(ValueError):
        CellLattice(10, positions=[3], speeds=[9], v_max=5)
    with pytest.raises(ValueError):
        CellLattice(10, p_slow=1.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(5, 60), st.floats(0, 1), st.floats(0, 1), st.integers(0, 2**31 - 1))
def test_ring_invariants(length, density, p, seed):
    lat = CellLattice.random(length, density, seed=seed, p_slow=p)
    n = lat.n_vehicles
    order = lat.ids.tolist()
    for _ in range(50):
        lat.step()
        assert lat.n_vehicles == n
        assert len(set(lat.pos.tolist())) == n
        assert np.all((lat.speed >= 0) & (lat.speed <= lat.v_max))
        # no passing: the cyclic order of ids is unchanged
        ids = lat.ids.tolist()
        if n:
            k = ids.index(order[0])
            assert ids[k:] + ids[:k] == order


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0, 1))
def test_same_seed_same_run(seed, p):
    a = CellLattice.random(80, 0.3, seed=seed, p_slow=p)
    b = CellLattice.random(80, 0.3, seed=seed, p_slow=p)
    for _ in range(100):
        a.step()
        b.step()
    assert a.occupancy().tolist() == b.occupancy().tolist()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(20, 200), st.data())
def test_free_flow_reaches_vmax(v_max, length, data):
    n_max = length // (v_max + 1)
    n = data.draw(st.integers(1, max(n_max, 1)))
    lat = CellLattice.uniform(length, n, v_max=v_max, p_slow=0.0)
    for _ in range(v_max):
        lat.step()
    for _ in range(20):
        assert np.all(lat.speed == v_max)
        lat.step()
