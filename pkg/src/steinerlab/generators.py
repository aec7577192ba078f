"""Instance families for experiments, plus the communication-complexity
gadget graphs used for sanity checks.

``gen_family`` produces streams of connected labelled instances from a
serializable spec dict; the gadget builders construct the two
set-disjointness reduction graphs exactly.
"""

from __future__ import annotations

import math
import random
from typing import Dict, Iterator, List, Set

from .graphs import WeightedGraph, canon_edge
from .instances import SteinerInstance, _UnionFind


class InvalidSpec(Exception):
    pass


def _attach_labels(rng: random.Random, n: int, classes: int,
                   class_size) -> Dict[int, int]:
    lo, hi = class_size
    nodes = list(range(n))
    rng.shuffle(nodes)
    labels: Dict[int, int] = {}
    pos = 0
    for c in range(classes):
        size = rng.randint(lo, hi)
        if pos + size > n:
            break
        for v in nodes[pos:pos + size]:
            labels[v] = c
        pos += size
    return labels


def _connected_gnm(rng: random.Random, n: int, extra_edges: int,
                   wlo: int, whi: int) -> WeightedGraph:
    nodes = list(range(n))
    rng.shuffle(nodes)
    edges = []
    seen = set()
    for a, b in zip(nodes, nodes[1:]):
        e = canon_edge(a, b)
        seen.add(e)
        edges.append((*e, rng.randint(wlo, whi)))
    for _ in range(extra_edges):
        a, b = rng.randrange(n), rng.randrange(n)
        if a == b:
            continue
        e = canon_edge(a, b)
        if e in seen:
            continue
        seen.add(e)
        edges.append((*e, rng.randint(wlo, whi)))
    return WeightedGraph(n, edges)


def _geometric(rng: random.Random, n: int, radius: float,
               scale: int) -> WeightedGraph:
    pts = [(rng.random(), rng.random()) for _ in range(n)]

    def d(a, b):
        return math.dist(pts[a], pts[b])

    edges = {}
    for a in range(n):
        for b in range(a + 1, n):
            if d(a, b) <= radius:
                edges[(a, b)] = max(1, round(d(a, b) * scale))
    # stitch disconnected pieces with their closest cross pair
    uf = _UnionFind(range(n))
    for a, b in edges:
        uf.union(a, b)
    while len({uf.find(v) for v in range(n)}) > 1:
        best = None
        for a in range(n):
            for b in range(a + 1, n):
                if uf.find(a) != uf.find(b):
                    cand = (d(a, b), a, b)
                    if best is None or cand < best:
                        best = cand
        _, a, b = best
        edges[(a, b)] = max(1, round(d(a, b) * scale))
        uf.union(a, b)
    return WeightedGraph(n, [(a, b, w) for (a, b), w in edges.items()])


def _grid(rows: int, cols: int, rng: random.Random,
          wlo: int, whi: int) -> WeightedGraph:
    def node(r, c):
        return r * cols + c

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((node(r, c), node(r, c + 1),
                              rng.randint(wlo, whi)))
            if r + 1 < rows:
                edges.append((node(r, c), node(r + 1, c),
                              rng.randint(wlo, whi)))
    return WeightedGraph(rows * cols, edges)


def _heavy_path(rng: random.Random, n: int, heavy: int) -> WeightedGraph:
    # a heavy middle edge forces long shortest paths in hops
    edges = []
    for v in range(n - 1):
        w = heavy if v == (n - 1) // 2 else 1
        edges.append((v, v + 1, w))
    return WeightedGraph(n, edges)


def _star_clique(rng: random.Random, hubs: int, leaves: int,
                 wlo: int, whi: int) -> WeightedGraph:
    n = hubs * (leaves + 1)
    edges = []
    centers = [h * (leaves + 1) for h in range(hubs)]
    for h, c in enumerate(centers):
        for i in range(1, leaves + 1):
            edges.append((c, c + i, rng.randint(wlo, whi)))
    for i in range(hubs):
        for j in range(i + 1, hubs):
            edges.append((centers[i], centers[j], rng.randint(wlo, whi)))
    return WeightedGraph(n, edges)


FAMILIES = ("gnm", "geometric", "grid", "path", "stars")


def gen_family(spec: dict) -> Iterator[SteinerInstance]:
    """Yield ``count`` connected labelled instances drawn from one family.

    Spec keys: family, count, seed, classes, class_size [lo, hi],
    weights [lo, hi], and per-family size knobs (n; rows/cols; radius;
    hubs/leaves; heavy).
    """
    fam = spec.get("family")
    if fam not in FAMILIES:
        raise InvalidSpec(f"unknown family {fam!r}")
    count = int(spec.get("count", 1))
    classes = int(spec.get("classes", 2))
    class_size = tuple(spec.get("class_size", (2, 3)))
    wlo, whi = spec.get("weights", (1, 9))
    if count < 1 or classes < 1 or wlo < 1 or whi < wlo:
        raise InvalidSpec("count/classes/weights out of range")
    rng = random.Random(f"fam:{spec.get('seed', 0)}:{fam}")
    for _ in range(count):
        if fam == "gnm":
            n = int(spec.get("n", 16))
            g = _connected_gnm(rng, n, int(spec.get("extra_edges", n)),
                               wlo, whi)
        elif fam == "geometric":
            n = int(spec.get("n", 16))
            g = _geometric(rng, n, float(spec.get("radius", 0.4)),
                           int(spec.get("scale", 10)))
        elif fam == "grid":
            g = _grid(int(spec.get("rows", 4)), int(spec.get("cols", 4)),
                      rng, wlo, whi)
        elif fam == "path":
            g = _heavy_path(rng, int(spec.get("n", 16)),
                            int(spec.get("heavy", 50)))
        else:
            g = _star_clique(rng, int(spec.get("hubs", 4)),
                             int(spec.get("leaves", 3)), wlo, whi)
        labels = _attach_labels(rng, g.n, classes, class_size)
        yield SteinerInstance(g, "IC", labels=labels)


def gen_sd_gadget_cr(A: Set[int], B: Set[int], rho: int,
                     n: int) -> SteinerInstance:
    """Two hub pairs over element nodes; membership picks the hub each
    element attaches to, two of the four hub-hub bridges carry weight
    rho*(2n+2)+1, and every shared index demands a cross connection."""
    A, B = set(A), set(B)
    if not (A <= set(range(1, n + 1)) and B <= set(range(1, n + 1))):
        raise InvalidSpec("element sets must be subsets of 1..n")
    heavy = rho * (2 * n + 2) + 1

    def a(i):                       # a_{-1} .. a_n
        return i + 1

    def b(i):
        return (n + 2) + i + 1

    edges: List[tuple] = []
    for i in range(1, n + 1):
        edges.append((a(0) if i in A else a(-1), a(i), 1))
        edges.append((b(0) if i in B else b(-1), b(i), 1))
    edges.append((a(0), b(0), heavy))
    edges.append((a(-1), b(-1), heavy))
    edges.append((a(0), b(-1), 1))
    edges.append((a(-1), b(0), 1))
    requests: Dict[int, Set[int]] = {}
    for i in sorted(A):
        requests.setdefault(a(i), set()).add(b(i))
    for i in sorted(B):
        requests.setdefault(b(i), set()).add(a(i))
    return SteinerInstance(WeightedGraph(2 * n + 4, edges), "CR",
                           requests=requests)


def gen_sd_gadget_ic(A: Set[int], B: Set[int], n: int) -> SteinerInstance:
    """Twin unit-weight stars joined by one bridge; element i is labelled i
    on a leaf exactly when the corresponding set contains it."""
    A, B = set(A), set(B)
    if not (A <= set(range(1, n + 1)) and B <= set(range(1, n + 1))):
        raise InvalidSpec("element sets must be subsets of 1..n")
    a0, b0 = 0, n + 1
    edges = [(a0, a0 + i, 1) for i in range(1, n + 1)]
    edges += [(b0, b0 + i, 1) for i in range(1, n + 1)]
    edges.append((a0, b0, 1))
    labels = {a0 + i: i for i in A}
    labels.update({b0 + i: i for i in B})
    return SteinerInstance(WeightedGraph(2 * n + 2, edges), "IC",
                           labels=labels)
