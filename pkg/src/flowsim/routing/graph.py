"""Weighted digraph used by every routing technique, plus Dijkstra and A*."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix


class Unreachable(LookupError):
    """No path exists between the query endpoints."""


@dataclass(frozen=True)
class RouteQuery:
    source: object
    target: object


@dataclass
class Route:
    node_sequence: list
    total_cost: float
    scanned_vertices: int


class Graph:
    """Directed graph on vertex indices ``0..n-1``.

    Vertex ids are sorted at construction, so index order equals id order and
    every tie-break "by smaller index" is a tie-break by smaller NodeId.
    Parallel edges collapse to the cheapest one; self-loops are dropped.
    """

    def __init__(self, ids, edges, positions=None):
        self.ids = sorted(ids)
        self.index = {v: i for i, v in enumerate(self.ids)}
        if len(self.index) != len(self.ids):
            raise ValueError("duplicate vertex ids")
        n = len(self.ids)
        best = {}
        for u, v, w in edges:
            iu, iv = self.index[u], self.index[v]
            if iu == iv:
                continue
            w = float(w)
            if w < 0:
                raise ValueError("negative edge weight")
            if (iu, iv) not in best or w < best[(iu, iv)]:
                best[(iu, iv)] = w
        keys = sorted(best)
        self.src = np.array([k[0] for k in keys], dtype=np.int64)
        self.dst = np.array([k[1] for k in keys], dtype=np.int64)
        self.w = np.array([best[k] for k in keys], dtype=float)
        self.n = n
        self.m = len(keys)
        # adjacency: (neighbor, weight, edge index), neighbors ascending
        self.out_adj = [[] for _ in range(n)]
        self.in_adj = [[] for _ in range(n)]
        for e, (iu, iv) in enumerate(keys):
            self.out_adj[iu].append((iv, best[(iu, iv)], e))
            self.in_adj[iv].append((iu, best[(iu, iv)], e))
        for lst in self.in_adj:
            lst.sort()
        self.positions = None if positions is None else np.asarray(
            [positions[v] for v in self.ids], dtype=float
        )
        self._csr = None
        self._pairs = None

    @classmethod
    def from_network(cls, net, weight="length"):
        if weight not in ("length", "time"):
            raise ValueError(f"unknown weighting {weight!r}")
        edges = [
            (e.source, e.target, e.length if weight == "length" else e.length / e.speed_limit)
            for e in net.edges
        ]
        return cls(list(net.nodes), edges, positions=net.nodes)

    @classmethod
    def from_arrays(cls, n, src, dst, w, positions=None):
        pos = None if positions is None else {i: positions[i] for i in range(n)}
        return cls(range(n), zip(map(int, src), map(int, dst), w), positions=pos)

    def csr(self, transpose=False):
        if self._csr is None:
            self._csr = csr_matrix((self.w, (self.src, self.dst)), shape=(self.n, self.n))
        return self._csr.T.tocsr() if transpose else self._csr

    def pairs(self):
        """Adjacency as ``(successors, predecessors)`` lists of (vertex, weight)."""
        if self._pairs is None:
            self._pairs = (
                [[(v, w) for v, w, _ in lst] for lst in self.out_adj],
                [[(v, w) for v, w, _ in lst] for lst in self.in_adj],
            )
        return self._pairs

    def resolve(self, q):
        if isinstance(q, RouteQuery):
            s, t = q.source, q.target
        else:
            s, t = q
        for v in (s, t):
            if v not in self.index:
                raise KeyError(f"unknown node {v!r}")
        return self.index[s], self.index[t]

    def path_cost(self, idx_path) -> float:
        cost = 0.0
        for a, b in zip(idx_path, idx_path[1:]):
            cost += self._weight(a, b)
        return cost

    def _weight(self, a, b):
        for v, w, _ in self.out_adj[a]:
            if v == b:
                return w
        raise KeyError(f"no edge {self.ids[a]!r} -> {self.ids[b]!r}")

    def make_route(self, idx_path, scanned) -> Route:
        return Route([self.ids[i] for i in idx_path], self.path_cost(idx_path), scanned)


def as_graph(net, weight="length") -> Graph:
    if isinstance(net, Graph):
        return net
    return net.graph(weight)


def _unwind(parent, s, t):
    path = [t]
    while path[-1] != s:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def search(g: Graph, s: int, t: int, h=None, edge_ok=None, log=None):
    """Best-first search from ``s`` to ``t`` over index space.

    ``h`` is an optional per-vertex lower bound (array or callable); ``inf``
    marks vertices that cannot reach ``t``.  ``edge_ok(e)`` filters edges by
    index.  Returns ``(index_path, scanned)`` or raises Unreachable.
    """
    if s == t:
        return [s], 1
    if callable(h):
        hv = h
    elif h is None:
        hv = None
    else:
        harr = h
        hv = harr.__getitem__
    n = g.n
    dist = [math.inf] * n
    parent = [-1] * n
    dist[s] = 0.0
    h0 = 0.0 if hv is None else hv(s)
    heap = [(h0, 0.0, s)]
    scanned = 0
    out_adj = g.out_adj
    while heap:
        f, d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        scanned += 1
        if u == t:
            return _unwind(parent, s, t), scanned
        for v, w, e in out_adj[u]:
            if edge_ok is not None and not edge_ok(e):
                continue
            nd = d + w
            dv = dist[v]
            if nd < dv:
                hvv = 0.0 if hv is None else hv(v)
                if hvv == math.inf:
                    continue
                if log is not None:
                    log.append((u, v))
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd + hvv, nd, v))
            elif nd == dv and u < parent[v]:
                parent[v] = u
    raise Unreachable(f"{g.ids[t]!r} unreachable from {g.ids[s]!r}")


def dijkstra(net, q, weight="length", log=None) -> Route:
    g = as_graph(net, weight)
    s, t = g.resolve(q)
    path, scanned = search(g, s, t, log=log)
    return g.make_route(path, scanned)


def euclidean_heuristic(net, target, weight="length"):
    g = as_graph(net, weight)
    if g.positions is None:
        raise ValueError("graph has no vertex positions")
    tp = g.positions[g.index[target]]
    h = np.hypot(g.positions[:, 0] - tp[0], g.positions[:, 1] - tp[1])
    return {g.ids[i]: float(h[i]) for i in range(g.n)}


def astar(net, q, heuristic=None, weight="length", log=None) -> Route:
    """A* with a caller-supplied admissible heuristic.

    ``heuristic`` maps NodeId -> lower bound on distance to the target (a
    callable or a dict); ``None`` means Euclidean distance when the graph has
    positions.
    """
    g = as_graph(net, weight)
    s, t = g.resolve(q)
    if heuristic is None:
        heuristic = euclidean_heuristic(g, g.ids[t])
    if callable(heuristic):
        harr = [float(heuristic(v)) for v in g.ids]
    else:
        harr = [float(heuristic[v]) for v in g.ids]
    path, scanned = search(g, s, t, h=harr, log=log)
    return g.make_route(path, scanned)
