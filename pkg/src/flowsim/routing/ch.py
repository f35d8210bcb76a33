"""Contraction Hierarchies: witness-checked shortcuts and bidirectional upward search."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .graph import Unreachable, as_graph

WITNESS_SETTLE_LIMIT = 30
# graphs up to this size get an all-pairs table that settles most pairs
DIST_TABLE_MAX = 2000


@dataclass
class ChIndex:
    order: list        # vertex indices, contracted first -> last
    rank: list         # vertex index -> position in order
    up_out: list       # u -> [(v, w)] with rank[v] > rank[u]
    up_in: list        # u -> [(x, w)] for edges x -> u with rank[x] > rank[u]
    mid: dict          # (u, v) -> skipped vertex index, or -1 for an original edge
    shortcuts: list = field(default_factory=list)  # (u, v, weight, skipped)

    def unpack(self, u, v):
        stack, out = [(u, v)], [u]
        while stack:
            a, b = stack.pop()
            m = self.mid[(a, b)]
            if m < 0:
                out.append(b)
            else:
                stack.append((m, b))
                stack.append((a, m))
        return out


def _witness(outw, src, skip, cost, budget):
    """Search from ``src`` avoiding ``skip``, settling at most ``budget``
    vertices, and drop from ``cost`` (target -> cost through ``skip``) every
    target reached at no greater cost."""
    limit = max(cost.values())
    dist = {src: 0.0}
    heap = [(0.0, src)]
    pop, push, get = heapq.heappop, heapq.heappush, dist.get
    inf = math.inf
    while heap:
        d, u = pop(heap)
        if d > limit:
            break
        if d > dist[u]:
            continue
        budget -= 1
        if not budget:
            break
        for v, w in outw[u].items():
            nd = d + w
            if nd <= limit and nd < get(v, inf) and v != skip:
                dist[v] = nd
                push(heap, (nd, v))
                # any path found is a witness, settled or not
                c = cost.get(v)
                if c is not None and nd <= c:
                    del cost[v]
                    if not cost:
                        return
                    limit = max(cost.values())


def _shortcuts_for(outw, inw, v, dist=None):
    """Shortcuts needed to contract ``v``: (u, x, weight).

    ``dist`` is an optional exact distance table of the input graph.
    Contraction preserves distances between the vertices left, so a pair
    with ``dist[u, x]`` below the cost through ``v`` needs no shortcut: the
    pairs on its true shortest path are shortcut or witnessed themselves.
    """
    res = []
    ins, outs = inw[v], outw[v]
    if not ins or not outs:
        return res
    for u in sorted(ins):
        w_uv = ins[u]
        direct = outw[u]
        # an equally short path avoiding v means the path via v is not unique
        cost = {x: w_uv + w for x, w in outs.items()
                if x != u and direct.get(x, math.inf) > w_uv + w}
        if cost and dist is not None:
            row = dist[u]
            eps = 1e-9 * max(max(cost.values()), 1.0)
            # what is left ties the shortest distance; an equal path avoiding
            # v must leave u through another neighbour on a shortest path
            alt = [(w, dist[y]) for y, w in direct.items() if y != v]
            sure, tied = {}, {}
            for x, c in cost.items():
                if row[x] >= c - eps:
                    tie = any(w + drow[x] <= c + eps for w, drow in alt)
                    (tied if tie else sure)[x] = c
            if tied:
                _witness(outw, u, v, tied, WITNESS_SETTLE_LIMIT)
            cost = {**sure, **tied}
        elif cost:
            _witness(outw, u, v, cost, WITNESS_SETTLE_LIMIT)
        res.extend((u, x, cost[x]) for x in sorted(cost))
    return res


def ch_preprocess(net, weight="length", order=None) -> ChIndex:
    """Contract every vertex; ``order`` (NodeIds) forces the contraction sequence."""
    g = as_graph(net, weight)
    n = g.n
    # remaining graph: weights and the vertex each edge skips (-1: original)
    outw = [dict() for _ in range(n)]
    inw = [dict() for _ in range(n)]
    mid_of = {}
    for e in range(g.m):
        u, v, w = int(g.src[e]), int(g.dst[e]), float(g.w[e])
        outw[u][v] = w
        inw[v][u] = w
        mid_of[(u, v)] = -1
    deleted_nbrs = [0] * n
    contracted = [False] * n
    table = _sp_dijkstra(g.csr()).tolist() if 0 < n <= DIST_TABLE_MAX else None

    def evaluate(v):
        new = _shortcuts_for(outw, inw, v, table)
        return len(new) - len(outw[v]) - len(inw[v]) + deleted_nbrs[v], new

    forced = None if order is None else [g.index[x] for x in order]
    if forced is not None and sorted(forced) != list(range(n)):
        raise ValueError("forced order must be a permutation of the vertices")
    heap = [] if forced else [(evaluate(v)[0], v) for v in range(n)]
    heapq.heapify(heap)
    order_, rank = [], [0] * n
    up_out = [[] for _ in range(n)]
    up_in = [[] for _ in range(n)]
    mid = {}
    shortcuts = []
    while len(order_) < n:
        if forced:
            v = forced[len(order_)]
            new = evaluate(v)[1]
        else:
            _, v = heapq.heappop(heap)
            if contracted[v]:
                continue
            p, new = evaluate(v)
            # lazy update: a stale key that got worse goes back in the queue
            if heap and p > heap[0][0]:
                heapq.heappush(heap, (p, v))
                continue
        rank[v] = len(order_)
        order_.append(v)
        contracted[v] = True
        for x, w in outw[v].items():
            up_out[v].append((x, w))
            mid[(v, x)] = mid_of.pop((v, x))
            del inw[x][v]
            deleted_nbrs[x] += 1
        for x, w in inw[v].items():
            up_in[v].append((x, w))
            mid[(x, v)] = mid_of.pop((x, v))
            del outw[x][v]
            deleted_nbrs[x] += 1
        outw[v].clear()
        inw[v].clear()
        for a, b, c in new:
            cur = outw[a].get(b)
            if cur is None or c < cur:
                outw[a][b] = c
                inw[b][a] = c
                mid_of[(a, b)] = v
                shortcuts.append((a, b, c, v))
    for lst in up_out:
        lst.sort()
    for lst in up_in:
        lst.sort()
    return ChIndex(order_, rank, up_out, up_in, mid, shortcuts)


def ch_query(net, idx: ChIndex, q, weight="length"):
    g = as_graph(net, weight)
    s, t = g.resolve(q)
    if s == t:
        return g.make_route([s], 1)
    dist = ({s: 0.0}, {t: 0.0})
    parent = ({s: -1}, {t: -1})
    heaps = ([(0.0, s)], [(0.0, t)])
    done = (set(), set())
    adj = (idx.up_out, idx.up_in)
    best, meet = math.inf, -1
    scanned = 0
    while heaps[0] or heaps[1]:
        # expand the side with the smaller key; stop a side once it reaches best
        sides = [i for i in (0, 1) if heaps[i] and heaps[i][0][0] < best]
        if not sides:
            break
        side = min(sides, key=lambda i: heaps[i][0])
        d, u = heapq.heappop(heaps[side])
        if u in done[side]:
            continue
        done[side].add(u)
        scanned += 1
        other = dist[1 - side].get(u)
        if other is not None and d + other < best:
            best, meet = d + other, u
        for v, w in adj[side][u]:
            nd = d + w
            if nd < dist[side].get(v, math.inf):
                dist[side][v] = nd
                parent[side][v] = u
                heapq.heappush(heaps[side], (nd, v))
    if meet < 0:
        raise Unreachable(f"{g.ids[t]!r} unreachable from {g.ids[s]!r}")
    fwd = [meet]
    while parent[0][fwd[-1]] >= 0:
        fwd.append(parent[0][fwd[-1]])
    fwd.reverse()
    bwd = [meet]
    while parent[1][bwd[-1]] >= 0:
        bwd.append(parent[1][bwd[-1]])
    hops = fwd + bwd[1:]
    path = [hops[0]]
    for a, b in zip(hops, hops[1:]):
        path.extend(idx.unpack(a, b)[1:])
    return g.make_route(path, scanned)
