"""Steiner-forest instances (connection requests or labels) and solutions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .graphs import Edge, WeightedGraph, canon_edge

NO_LABEL = -1


class Infeasible(Exception):
    pass


class NotMinimalInstance(Exception):
    pass


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


class SteinerInstance:
    """A graph plus connectivity demands.

    kind "IC": ``labels[v]`` is the label of v (NO_LABEL for non-terminals).
    kind "CR": ``requests[v]`` is the set of nodes v must be connected to.
    """

    def __init__(self, graph: WeightedGraph, kind: str,
                 labels: Optional[Dict[int, int]] = None,
                 requests: Optional[Dict[int, Set[int]]] = None):
        if kind not in ("IC", "CR"):
            raise ValueError(f"unknown instance kind {kind!r}")
        self.graph = graph
        self.kind = kind
        if kind == "IC":
            self.labels = {v: l for v, l in (labels or {}).items()
                           if l != NO_LABEL}
            for v in self.labels:
                if not 0 <= v < graph.n:
                    raise ValueError(f"labelled node {v} out of range")
            self.requests = None
        else:
            self.requests = {v: set(ws) for v, ws in (requests or {}).items()
                             if ws}
            closed: Dict[int, Set[int]] = {}
            for v, ws in self.requests.items():
                for w in ws:
                    closed.setdefault(v, set()).add(w)
                    closed.setdefault(w, set()).add(v)
            self.requests = closed
            self.labels = None

    # --- derived views ---

    @property
    def terminals(self) -> List[int]:
        if self.kind == "IC":
            return sorted(self.labels)
        return sorted(self.requests)

    @property
    def t(self) -> int:
        return len(self.terminals)

    def label_classes(self) -> Dict[int, List[int]]:
        """label -> sorted terminals.  For CR: components of the request graph,
        keyed by their smallest terminal ID (the transform's labelling)."""
        if self.kind == "IC":
            out: Dict[int, List[int]] = {}
            for v, l in self.labels.items():
                out.setdefault(l, []).append(v)
            return {l: sorted(vs) for l, vs in out.items()}
        uf = _UnionFind(self.requests)
        for v, ws in self.requests.items():
            for w in ws:
                uf.union(v, w)
        out = {}
        for v in self.requests:
            out.setdefault(uf.find(v), []).append(v)
        return {min(vs): sorted(vs) for vs in out.values()}

    @property
    def k(self) -> int:
        return len(self.label_classes())

    def is_minimal(self) -> bool:
        return all(len(vs) != 1 for vs in self.label_classes().values())

    def as_minimal_ic(self) -> "SteinerInstance":
        """Equivalent minimal IC instance (labels = min terminal ID per class,
        singleton classes dropped)."""
        labels = {}
        for l, vs in self.label_classes().items():
            if len(vs) >= 2:
                for v in vs:
                    labels[v] = min(vs)
        return SteinerInstance(self.graph, "IC", labels=labels)

    # --- file format: graph block, then "IC v l" / "CR v w" lines ---

    def to_text(self) -> str:
        out = self.graph.to_text()
        if self.kind == "IC":
            for v in sorted(self.labels):
                out += f"IC {v} {self.labels[v]}\n"
        else:
            for v in sorted(self.requests):
                for w in sorted(self.requests[v]):
                    if v < w:
                        out += f"CR {v} {w}\n"
        return out

    @classmethod
    def from_text(cls, text: str) -> "SteinerInstance":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        n, m = (int(x) for x in lines[0].split())
        edges = []
        for ln in lines[1 : 1 + m]:
            u, v, w = (int(x) for x in ln.split())
            edges.append((u, v, w))
        g = WeightedGraph(n, edges)
        labels: Dict[int, int] = {}
        requests: Dict[int, Set[int]] = {}
        kind = None
        for ln in lines[1 + m :]:
            parts = ln.split()
            if parts[0] == "IC":
                kind = "IC"
                labels[int(parts[1])] = int(parts[2])
            elif parts[0] == "CR":
                kind = "CR"
                requests.setdefault(int(parts[1]), set()).add(int(parts[2]))
            else:
                raise ValueError(f"bad demand line: {ln!r}")
        if kind is None:
            kind = "IC"
        return cls(g, kind, labels=labels, requests=requests)


@dataclass
class ForestSolution:
    edges: FrozenSet[Edge]
    weight: int
    feasible: bool

    @classmethod
    def from_edges(cls, edges, inst: SteinerInstance) -> "ForestSolution":
        es = frozenset(canon_edge(u, v) for (u, v) in edges)
        w = sum(inst.graph.weight[e] for e in es)
        return cls(edges=es, weight=w, feasible=check_feasible(es, inst))


def required_pairs(inst: SteinerInstance) -> List[Tuple[int, int]]:
    pairs = []
    for vs in inst.label_classes().values():
        for i in range(len(vs) - 1):
            pairs.append((vs[i], vs[i + 1]))
    return pairs


def check_feasible(edges, inst: SteinerInstance) -> bool:
    uf = _UnionFind(range(inst.graph.n))
    for (u, v) in edges:
        uf.union(u, v)
    return all(uf.find(a) == uf.find(b) for a, b in required_pairs(inst))


def is_forest(edges, n: int) -> bool:
    uf = _UnionFind(range(n))
    return all(uf.union(u, v) for (u, v) in edges)


def minimal_subforest(edges, inst: SteinerInstance) -> ForestSolution:
    """The unique inclusion-minimal feasible subset of a feasible forest:
    the union over labels of the tree paths between same-label terminals."""
    es = {canon_edge(u, v) for (u, v) in edges}
    if not is_forest(es, inst.graph.n):
        raise Infeasible("input edge set contains a cycle")
    if not check_feasible(es, inst):
        raise Infeasible("input forest does not solve the instance")
    adj: Dict[int, List[int]] = {}
    for (u, v) in es:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    kept: Set[Edge] = set()
    for vs in inst.label_classes().values():
        anchor = vs[0]
        for other in vs[1:]:
            # walk the unique tree path anchor -> other
            prev = {anchor: anchor}
            stack = [anchor]
            while stack and other not in prev:
                u = stack.pop()
                for x in adj.get(u, []):
                    if x not in prev:
                        prev[x] = u
                        stack.append(x)
            node = other
            while node != anchor:
                kept.add(canon_edge(node, prev[node]))
                node = prev[node]
    return ForestSolution.from_edges(kept, inst)


def approx_ratio(edges, inst: SteinerInstance) -> Fraction:
    from .oracle import exact_optimum

    opt = exact_optimum(inst)
    w = sum(inst.graph.weight[canon_edge(u, v)] for (u, v) in set(
        canon_edge(a, b) for (a, b) in edges))
    if opt.weight == 0:
        return Fraction(0) if w == 0 else Fraction(w, 1)
    return Fraction(w, opt.weight)
