"""Arc Flags: per-edge bitsets of target cells reachable along shortest paths."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .graph import as_graph, search


@dataclass
class ArcFlagIndex:
    cell_of: np.ndarray  # vertex index -> cell id
    flags: np.ndarray    # bool [m, k], aligned with Graph edge indices
    k: int


def partition(g, k: int, seed=0) -> np.ndarray:
    """Balanced k-way partition by round-robin BFS growth from random centers."""
    k = min(k, g.n)
    rng = np.random.default_rng(seed)
    cell = np.full(g.n, -1, dtype=np.int64)
    centers = sorted(rng.choice(g.n, size=k, replace=False).tolist())
    nbrs = [sorted({v for v, _, _ in g.out_adj[u]} | {v for v, _, _ in g.in_adj[u]})
            for u in range(g.n)]
    frontiers = []
    for c, v in enumerate(centers):
        cell[v] = c
        frontiers.append(deque([v]))
    sizes = [1] * k
    active = True
    while active:
        active = False
        for c in range(k):
            fr = frontiers[c]
            while fr:
                u = fr.popleft()
                grown = False
                for v in nbrs[u]:
                    if cell[v] < 0:
                        cell[v] = c
                        sizes[c] += 1
                        fr.append(v)
                        grown = True
                        break
                if grown:
                    fr.appendleft(u)
                    active = True
                    break
    for v in np.flatnonzero(cell < 0):
        c = int(np.argmin(sizes))
        cell[v] = c
        sizes[c] += 1
    return cell


def arcflags_preprocess(net, k: int, seed=0, weight="length") -> ArcFlagIndex:
    if k < 1:
        raise ValueError("cell count must be >= 1")
    g = as_graph(net, weight)
    cell = partition(g, k, seed) if g.n else np.zeros(0, dtype=np.int64)
    k_eff = int(cell.max()) + 1 if g.n else 1
    flags = np.zeros((g.m, k), dtype=bool)
    src, dst, w = g.src, g.dst, g.w
    same = cell[src] == cell[dst]
    flags[np.flatnonzero(same), cell[src][same]] = True
    boundary = np.zeros(g.n, dtype=bool)
    cross = ~same
    boundary[dst[cross]] = True
    rev = g.csr(transpose=True)
    for c in range(k_eff):
        bverts = np.flatnonzero(boundary & (cell == c))
        if len(bverts) == 0:
            continue
        # backward trees: D[b, u] = dist(u, b)
        D = _sp_dijkstra(rev, indices=bverts)
        du, dv = D[:, src], D[:, dst]
        tol = 1e-12 * np.where(np.isfinite(du), np.abs(du), 0.0)
        with np.errstate(invalid="ignore"):
            on_tree = np.isfinite(du) & (dv + w[None, :] <= du + tol)
        flags[on_tree.any(axis=0), c] = True
    return ArcFlagIndex(cell_of=cell, flags=flags, k=k)


def arcflags_query(net, idx: ArcFlagIndex, q, weight="length", log=None):
    g = as_graph(net, weight)
    s, t = g.resolve(q)
    col = idx.flags[:, int(idx.cell_of[t])].tolist()
    path, scanned = search(g, s, t, edge_ok=col.__getitem__, log=log)
    return g.make_route(path, scanned)
