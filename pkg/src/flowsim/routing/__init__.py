"""Global route planning: Dijkstra baseline plus goal-directed and hierarchical speedups."""
from .alt import AltIndex, alt_preprocess, alt_query
from .arcflags import ArcFlagIndex, arcflags_preprocess, arcflags_query
from .ch import ChIndex, ch_preprocess, ch_query
from .graph import Graph, Route, RouteQuery, Unreachable, astar, dijkstra, euclidean_heuristic
from .reach import ReachIndex, reach_preprocess, reach_query

ALGORITHMS = ("dijkstra", "astar", "alt", "arcflags", "ch", "reach")


class Router:
    """One routing technique bound to a network, with its index built once."""

    def __init__(self, net, algo="ch", seed=0, weight="length", landmarks=4, cells=4):
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
        self.net = net
        self.algo = algo
        self.weight = weight
        g = net if isinstance(net, Graph) else net.graph(weight)
        self.graph = g
        self.index = None
        if algo == "alt":
            self.index = alt_preprocess(g, min(landmarks, g.n), seed=seed)
        elif algo == "arcflags":
            self.index = arcflags_preprocess(g, cells, seed=seed)
        elif algo == "ch":
            self.index = ch_preprocess(g)
        elif algo == "reach":
            self.index = reach_preprocess(g)

    def query(self, source, target) -> Route:
        q = RouteQuery(source, target)
        g = self.graph
        if self.algo == "dijkstra":
            return dijkstra(g, q)
        if self.algo == "astar":
            if g.positions is None:
                return astar(g, q, heuristic=lambda v: 0.0)
            return astar(g, q)
        if self.algo == "alt":
            return alt_query(g, self.index, q)
        if self.algo == "arcflags":
            return arcflags_query(g, self.index, q)
        if self.algo == "ch":
            return ch_query(g, self.index, q)
        return reach_query(g, self.index, q)


__all__ = [
    "ALGORITHMS", "AltIndex", "ArcFlagIndex", "ChIndex", "Graph", "ReachIndex", "Route",
    "RouteQuery", "Router", "Unreachable", "alt_preprocess", "alt_query", "arcflags_preprocess",
    "arcflags_query", "astar", "ch_preprocess", "ch_query", "dijkstra", "euclidean_heuristic",
    "reach_preprocess", "reach_query",
]
