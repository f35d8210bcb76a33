"""Single-lane cellular-automaton traffic (Nagel-Schreckenberg rules) and
macroscopic flow / density / speed measurement."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MacroSample:
    density: float     # vehicles per cell
    flow: float        # vehicles per step through the detector
    mean_speed: float  # cells per step


class CellLattice:
    """Ring (``closed=True``) or open lane of ``length`` cells.

    Vehicles are kept sorted by cell index.  The lattice owns one seeded
    generator; randomization draws one number per vehicle per step in
    ascending cell order.
    """

    def __init__(self, length, closed=True, v_max=5, p_slow=0.3, cell_length=7.5, rng_seed=0,
                 positions=(), speeds=None, ids=None):
        if length < 1:
            raise ValueError("lattice needs at least one cell")
        if not 0.0 <= p_slow <= 1.0:
            raise ValueError("p_slow must be a probability")
        self.length = int(length)
        self.closed = bool(closed)
        self.v_max = int(v_max)
        self.p_slow = float(p_slow)
        self.cell_length = float(cell_length)
        self.rng = np.random.default_rng(rng_seed)
        pos = np.asarray(positions, dtype=np.int64)
        if len(np.unique(pos)) != len(pos):
            raise ValueError("at most one vehicle per cell")
        if len(pos) and (pos.min() < 0 or pos.max() >= self.length):
            raise ValueError("vehicle outside the lattice")
        spd = np.zeros(len(pos), dtype=np.int64) if speeds is None else np.asarray(speeds, dtype=np.int64)
        if len(spd) != len(pos) or (len(spd) and (spd.min() < 0 or spd.max() > self.v_max)):
            raise ValueError("speeds must lie in [0, v_max], one per vehicle")
        vid = np.arange(len(pos)) if ids is None else np.asarray(ids, dtype=np.int64)
        order = np.argsort(pos, kind="stable")
        self.pos, self.speed, self.ids = pos[order], spd[order], vid[order]
        self._next_id = int(vid.max()) + 1 if len(vid) else 0
        self.steps = 0
        self.last_crossings = 0

    @classmethod
    def random(cls, length, density, seed=0, **kw):
        """Ring with ``round(density * length)`` vehicles at random cells, speed 0."""
        rng = np.random.default_rng(seed)
        n = int(round(density * length))
        pos = np.sort(rng.choice(length, size=n, replace=False)) if n else []
        return cls(length, rng_seed=seed, positions=pos, **kw)

    @classmethod
    def uniform(cls, length, n, **kw):
        """Ring with ``n`` equally spaced vehicles."""
        pos = (np.arange(n) * length) // n if n else []
        return cls(length, positions=pos, **kw)

    @property
    def n_vehicles(self) -> int:
        return len(self.pos)

    def occupancy(self) -> np.ndarray:
        """Per-cell speed, -1 where empty."""
        occ = np.full(self.length, -1, dtype=np.int64)
        occ[self.pos] = self.speed
        return occ

    def gaps(self) -> np.ndarray:
        n = len(self.pos)
        if n == 0:
            return np.zeros(0, dtype=np.int64)
        ahead = np.roll(self.pos, -1)
        if self.closed:
            return (ahead - self.pos - 1) % self.length
        gaps = ahead - self.pos - 1
        # the leading vehicle of an open lane sees free road beyond the exit
        gaps[-1] = self.v_max
        return gaps

    def step(self, detector=0) -> "CellLattice":
        """One synchronous update; returns self.  Counts vehicles crossing
        into ``detector`` in ``last_crossings``."""
        v = np.minimum(self.speed + 1, self.v_max)
        v = np.minimum(v, self.gaps())
        if len(v):
            slow = self.rng.random(len(v)) < self.p_slow
            v = np.where(slow, np.maximum(v - 1, 0), v)
        new = self.pos + v
        # crossing: the detector cell lies in (x, x + v]
        ahead = detector - self.pos - 1
        if self.closed:
            ahead %= self.length
        self.last_crossings = int(np.count_nonzero((ahead >= 0) & (ahead < v)))
        if self.closed:
            new %= self.length
            order = np.argsort(new, kind="stable")
            self.pos, self.speed, self.ids = new[order], v[order], self.ids[order]
        else:
            keep = new < self.length
            self.pos, self.speed, self.ids = new[keep], v[keep], self.ids[keep]
        self.steps += 1
        return self

    def inject(self, entry_rate, rng) -> bool:
        if self.closed:
            raise ValueError("vehicles can only be injected into an open lane")
        if not 0.0 <= entry_rate <= 1.0:
            raise ValueError("entry_rate must be a probability")
        hit = rng.random() < entry_rate
        if hit and (len(self.pos) == 0 or self.pos[0] != 0):
            self.pos = np.concatenate([[0], self.pos])
            self.speed = np.concatenate([[0], self.speed])
            self.ids = np.concatenate([[self._next_id], self.ids])
            self._next_id += 1
            return True
        return False


def ca_step(lat: CellLattice) -> CellLattice:
    return lat.step()


def ca_inject(lat: CellLattice, entry_rate: float, seed) -> CellLattice:
    """Maybe place a stopped vehicle in cell 0.  ``seed`` is an int or a
    ``numpy.random.Generator`` (pass the same generator across steps)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    lat.inject(entry_rate, rng)
    return lat


def measure(lat: CellLattice, window: int, detector=0) -> MacroSample:
    """Advance ``window`` steps and report density at the end, detector flow
    and vehicle-averaged speed over the window."""
    if window < 1:
        raise ValueError("window must be at least one step")
    crossings = 0
    speed_sum = 0
    vehicle_steps = 0
    for _ in range(window):
        lat.step(detector)
        crossings += lat.last_crossings
        speed_sum += int(lat.speed.sum())
        vehicle_steps += lat.n_vehicles
    mean_speed = speed_sum / vehicle_steps if vehicle_steps else 0.0
    return MacroSample(lat.n_vehicles / lat.length, crossings / window, mean_speed)


def fundamental_diagram(length=1000, densities=None, v_max=5, p_slow=0.0, steps=2000, seed=0):
    """Sweep densities on a ring: warm up for half of ``steps``, measure over the rest."""
    if densities is None:
        densities = np.linspace(0.0, 1.0, 21)
    warm = steps // 2
    rows = []
    for i, rho in enumerate(densities):
        if not 0.0 <= rho <= 1.0:
            raise ValueError("density must lie in [0, 1]")
        lat = CellLattice.random(length, rho, seed=seed + i, v_max=v_max, p_slow=p_slow)
        for _ in range(warm):
            lat.step()
        s = measure(lat, max(steps - warm, 1))
        rows.append(s)
    return rows
