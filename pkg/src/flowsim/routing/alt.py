"""ALT: A* with landmarks and the triangle inequality."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .graph import as_graph, search


@dataclass
class AltIndex:
    landmarks: list       # NodeIds
    landmark_idx: np.ndarray
    dist_from: np.ndarray  # [k, n]: dist(L, v)
    dist_to: np.ndarray    # [k, n]: dist(v, L)

    def lower_bounds(self, t: int) -> np.ndarray:
        """Lower bound on dist(v, t) for every vertex index v."""
        with np.errstate(invalid="ignore"):
            fwd = self.dist_from[:, t][:, None] - self.dist_from
            bwd = self.dist_to - self.dist_to[:, t][:, None]
        # inf - inf is nan: that landmark says nothing about v
        h = np.fmax(np.nanmax(np.where(np.isnan(fwd), -np.inf, fwd), axis=0),
                    np.nanmax(np.where(np.isnan(bwd), -np.inf, bwd), axis=0))
        return np.maximum(h, 0.0)


def alt_preprocess(net, k: int, seed=0, weight="length") -> AltIndex:
    g = as_graph(net, weight)
    if not 1 <= k <= g.n:
        raise ValueError(f"landmark count {k} must be in [1, {g.n}]")
    rng = np.random.default_rng(seed)
    fwd_csr, bwd_csr = g.csr(), g.csr(transpose=True)

    def both(v):
        return (_sp_dijkstra(fwd_csr, indices=v), _sp_dijkstra(bwd_csr, indices=v))

    start = int(rng.integers(g.n))
    df, db = both(start)
    score = np.where(np.isfinite(df + db), df + db, -1.0)
    chosen, rows_from, rows_to = [], [], []
    best = np.full(g.n, np.inf)
    while len(chosen) < k:
        cand = np.where(np.isin(np.arange(g.n), chosen), -np.inf, score if not chosen else best)
        lm = int(np.argmax(cand))  # first max: smallest index on ties
        chosen.append(lm)
        df, db = both(lm)
        rows_from.append(df)
        rows_to.append(db)
        s = np.where(np.isfinite(df + db), df + db, -1.0)
        best = np.minimum(best, s)
    return AltIndex(
        landmarks=[g.ids[i] for i in chosen],
        landmark_idx=np.array(chosen),
        dist_from=np.vstack(rows_from),
        dist_to=np.vstack(rows_to),
    )


def alt_query(net, idx: AltIndex, q, weight="length", log=None):
    g = as_graph(net, weight)
    s, t = g.resolve(q)
    h = idx.lower_bounds(t).tolist()
    path, scanned = search(g, s, t, h=h, log=log)
    return g.make_route(path, scanned)
