"""Weighted-graph core: representation, exact distances, fractional balls.

All distance arithmetic that feeds algorithm control flow is exact: integer
edge weights, `fractions.Fraction` radii.  Canonical shortest paths are the
lexicographically smallest node sequence among minimum-weight paths; they are
prefix-consistent per destination, which makes next-hop routing well defined.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

# Exact non-negative rational used for radii, growth amounts and reduced
# distances.  Alg-1 quantities are half-integral; rounded-growth thresholds
# introduce larger denominators, so a general rational is used throughout.
HalfWeight = Fraction

Edge = Tuple[int, int]  # always stored as (min, max)


class DisconnectedGraph(Exception):
    pass


def canon_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class WeightedGraph:
    """Undirected connected graph with positive integer weights."""

    def __init__(self, n: int, edges: Iterable[Tuple[int, int, int]]):
        self.n = n
        self.weight: Dict[Edge, int] = {}
        self.adj: List[List[int]] = [[] for _ in range(n)]
        for u, v, w in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge endpoint out of range: {(u, v)}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if w < 1 or w != int(w):
                raise ValueError(f"weight must be a positive integer: {w}")
            e = canon_edge(u, v)
            if e in self.weight:
                raise ValueError(f"parallel edge {e}")
            self.weight[e] = int(w)
            self.adj[u].append(v)
            self.adj[v].append(u)
        for nbrs in self.adj:
            nbrs.sort()

    @property
    def m(self) -> int:
        return len(self.weight)

    def edges(self) -> List[Edge]:
        return sorted(self.weight)

    def w(self, u: int, v: int) -> int:
        return self.weight[canon_edge(u, v)]

    def neighbors(self, u: int) -> List[int]:
        return self.adj[u]

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in self.adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n

    # --- file format: line 1 "n m", then m lines "u v w" ---

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        for (u, v) in self.edges():
            lines.append(f"{u} {v} {self.weight[(u, v)]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "WeightedGraph":
        tokens = text.split()
        n, m = int(tokens[0]), int(tokens[1])
        flat = tokens[2 : 2 + 3 * m]
        edges = [
            (int(flat[3 * i]), int(flat[3 * i + 1]), int(flat[3 * i + 2]))
            for i in range(m)
        ]
        return cls(n, edges)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, WeightedGraph)
            and self.n == other.n
            and self.weight == other.weight
        )

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m})"


@dataclass
class BallView:
    """Fractional ball B(v, r): interior nodes plus partially covered edges.

    ``fractions`` maps every edge with coverage strictly between 0 and 1 to
    the covered fraction; fully covered edges appear in ``full_edges``.  The
    fraction of a boundary edge {w,u} with w interior and u not equals
    (r - Wd(v,w)) / W(w,u) -- division by the edge weight (the printed
    formula dividing by the distance is a suspected typo in the source
    definition; the worked 2/3-of-a-weight-3-edge example forces this form).
    """

    center: int
    radius: HalfWeight
    interior: Set[int]
    fractions: Dict[Edge, Fraction]
    full_edges: Set[Edge]

    def edge_fraction(self, e: Edge) -> Fraction:
        if e in self.full_edges:
            return Fraction(1)
        return self.fractions.get(e, Fraction(0))


class GraphMetrics:
    """Exact all-pairs distances plus D (hops), WD, s and canonical routing.

    ``next_hop[root][u]`` is u's parent in the canonical shortest-path tree
    rooted at ``root`` (lex-smallest min-weight paths), so the canonical path
    from u to root is u, next_hop[root][u], ... , root.
    """

    def __init__(self, g: WeightedGraph):
        if not g.is_connected():
            raise DisconnectedGraph(f"graph with n={g.n} is not connected")
        self.g = g
        n = g.n
        self.dist: List[List[int]] = []
        self.hops: List[List[int]] = []  # hop count of the canonical path
        self.next_hop: List[List[Optional[int]]] = []
        for root in range(n):
            d, par, hop = self._canonical_sssp(root)
            self.dist.append(d)
            self.next_hop.append(par)
            self.hops.append(hop)
        self.D = 0
        self.s = 0
        self.WD = 0
        for root in range(n):
            bfs = self._bfs_hops(root)
            self.D = max(self.D, max(bfs))
            self.s = max(self.s, max(self.hops[root]))
            self.WD = max(self.WD, max(self.dist[root]))

    def _canonical_sssp(self, root: int):
        """Dijkstra materializing lex-smallest shortest paths toward root."""
        g = self.g
        n = g.n
        INF = None
        d: List[Optional[int]] = [INF] * n
        d[root] = 0
        done = [False] * n
        parent: List[Optional[int]] = [None] * n
        path: List[Optional[tuple]] = [None] * n
        path[root] = (root,)
        heap = [(0, root)]
        order: List[int] = []
        while heap:
            du, u = heapq.heappop(heap)
            if done[u] or du != d[u]:
                continue
            done[u] = True
            order.append(u)
            for v in g.adj[u]:
                nd = du + g.w(u, v)
                if d[v] is None or nd < d[v]:
                    d[v] = nd
                    heapq.heappush(heap, (nd, v))
        # materialize canonical paths in increasing-distance order; every
        # optimal predecessor has strictly smaller distance (weights >= 1)
        hop = [0] * n
        for u in order:
            if u == root:
                continue
            best = None
            for p in g.adj[u]:
                if d[p] is not None and d[p] + g.w(u, p) == d[u]:
                    cand = path[p] + (u,)
                    if best is None or cand < best:
                        best = cand
                        parent[u] = p
            path[u] = best
            hop[u] = len(path[u]) - 1
        return [int(x) for x in d], parent, hop

    def _bfs_hops(self, root: int) -> List[int]:
        g = self.g
        depth = [-1] * g.n
        depth[root] = 0
        frontier = [root]
        while frontier:
            nxt = []
            for u in frontier:
                for v in g.adj[u]:
                    if depth[v] < 0:
                        depth[v] = depth[u] + 1
                        nxt.append(v)
            frontier = nxt
        return depth

    def wd(self, u: int, v: int) -> int:
        return self.dist[u][v]

    def canonical_path(self, u: int, dest: int) -> List[int]:
        """Canonical (lex-min per destination tree) shortest path u -> dest."""
        out = [u]
        while out[-1] != dest:
            out.append(self.next_hop[dest][out[-1]])
        return out


def all_pairs_shortest_paths(g: WeightedGraph) -> GraphMetrics:
    return GraphMetrics(g)


def ball(g: WeightedGraph, m: GraphMetrics, v: int, r: HalfWeight) -> BallView:
    r = Fraction(r)
    if r < 0:
        raise ValueError("radius must be non-negative")
    interior = {u for u in range(g.n) if m.dist[v][u] <= r}
    fractions: Dict[Edge, Fraction] = {}
    full: Set[Edge] = set()
    for (a, b), w in g.weight.items():
        cov_a = max(Fraction(0), r - m.dist[v][a])
        cov_b = max(Fraction(0), r - m.dist[v][b])
        f = min(Fraction(1), (cov_a + cov_b) / w)
        if f >= 1:
            full.add((a, b))
        elif f > 0:
            fractions[(a, b)] = f
    return BallView(center=v, radius=r, interior=interior,
                    fractions=fractions, full_edges=full)


def mst_weight(g: WeightedGraph) -> int:
    """Exact MST weight via Kruskal."""
    parent = list(range(g.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    total = 0
    picked = 0
    for w, u, v in sorted((w, u, v) for (u, v), w in g.weight.items()):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            total += w
            picked += 1
    if picked != g.n - 1:
        raise DisconnectedGraph("MST does not span the graph")
    return total
