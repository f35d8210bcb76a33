"""REACH: exact vertex reach values and reach-pruned bidirectional Dijkstra."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .graph import Unreachable, as_graph

MAX_EXACT_VERTICES = 2000


@dataclass
class ReachIndex:
    reach: np.ndarray  # vertex index -> meters


def reach_values(D: np.ndarray, src, dst, w) -> np.ndarray:
    """Exact reach from all-pairs distances ``D[s, t]`` and the edge arrays.

    reach(v) = max over (s, t) with v on a shortest s-t path of
    min(dist(s, v), dist(v, t)).  For each source s, the longest shortest-path
    extension below v, H[s, v] = max dist(v, t) over those t, satisfies
    H[s, v] = max(0, max over tight edges v->c of w + H[s, c]); all sources
    are iterated together until H stops changing.  Near-ties count as tight,
    which can only raise the result.
    """
    n = len(D)
    if n == 0:
        return np.zeros(0)
    finite = np.isfinite(D)
    scale = np.abs(D[finite]).max() if finite.any() else 0.0
    tol = 1e-12 * max(scale, 1.0)
    DT = np.ascontiguousarray(D.T)  # [v, s]
    H = np.zeros(n * n)             # flat [v, s]
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    w = np.asarray(w, dtype=float)
    if len(src):
        with np.errstate(invalid="ignore"):
            tight = np.isfinite(DT[src]) & (DT[src] + w[:, None] <= DT[dst] + tol)
        e, s = np.nonzero(tight)
        # (edge, source) pairs grouped by the flat index of (tail, source)
        key = src[e] * n + s
        order = np.argsort(key, kind="stable")
        key, e, s = key[order], e[order], s[order]
        if len(key):
            starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
            heads = key[starts]
            we = w[e]
            below = dst[e] * n + s
            while True:
                grown = np.maximum.reduceat(we + H[below], starts)
                cur = H[heads]
                if not (grown > cur).any():
                    break
                H[heads] = np.maximum(cur, grown)
    HT = H.reshape(n, n)
    return np.where(finite.T, np.minimum(DT, HT), 0.0).max(axis=1)


def reach_preprocess(net, weight="length") -> ReachIndex:
    g = as_graph(net, weight)
    if g.n > MAX_EXACT_VERTICES:
        raise ValueError(
            f"exact reach needs all-pairs distances; {g.n} vertices exceeds {MAX_EXACT_VERTICES}"
        )
    if g.n == 0:
        return ReachIndex(np.zeros(0))
    D = _sp_dijkstra(g.csr())
    return ReachIndex(reach_values(D, g.src, g.dst, g.w))


def reach_query(net, idx: ReachIndex, q, weight="length"):
    g = as_graph(net, weight)
    s, t = g.resolve(q)
    if s == t:
        return g.make_route([s], 1)
    reach = idx.reach.tolist()
    dist = ({s: 0.0}, {t: 0.0})
    parent = ({s: -1}, {t: -1})
    heaps = ([(0.0, s)], [(0.0, t)])
    done = (dict(), dict())  # settled vertex -> exact distance
    adj = g.pairs()
    best, meet = math.inf, -1
    scanned = 0
    while heaps[0] and heaps[1]:
        if heaps[0][0][0] + heaps[1][0][0] >= best:
            break
        side = 0 if heaps[0][0] <= heaps[1][0] else 1
        other = 1 - side
        d, u = heapq.heappop(heaps[side])
        if u in done[side]:
            continue
        done[side][u] = d
        scanned += 1
        od = dist[other].get(u)
        if od is not None and d + od < best:
            best, meet = d + od, u
        # lower bound on the remaining distance: exact if the other side
        # settled u, otherwise that side's current radius
        if u in done[other]:
            lb = done[other][u]
        else:
            lb = heaps[other][0][0] if heaps[other] else math.inf
        if reach[u] < d and reach[u] < lb:
            continue
        for v, w in adj[side][u]:
            nd = d + w
            if nd < dist[side].get(v, math.inf):
                dist[side][v] = nd
                parent[side][v] = u
                heapq.heappush(heaps[side], (nd, v))
                od = dist[other].get(v)
                if od is not None and nd + od < best:
                    best, meet = nd + od, v
    if meet < 0:
        raise Unreachable(f"{g.ids[t]!r} unreachable from {g.ids[s]!r}")
    fwd = [meet]
    while parent[0][fwd[-1]] >= 0:
        fwd.append(parent[0][fwd[-1]])
    fwd.reverse()
    bwd = [meet]
    while parent[1][bwd[-1]] >= 0:
        bwd.append(parent[1][bwd[-1]])
    return g.make_route(fwd + bwd[1:], scanned)
