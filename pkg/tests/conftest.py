import random

import pytest

from steinerlab.graphs import WeightedGraph
from steinerlab.instances import SteinerInstance


def random_connected_graph(rng: random.Random, n: int, extra_edges: int,
                           max_w: int = 9) -> WeightedGraph:
    """Random spanning tree plus extra edges; guaranteed connected."""
    edges = {}
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        u, v = order[i], order[rng.randrange(i)]
        edges[(min(u, v), max(u, v))] = rng.randint(1, max_w)
    attempts = 0
    while len(edges) < n - 1 + extra_edges and attempts < 20 * extra_edges + 20:
        attempts += 1
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v and (min(u, v), max(u, v)) not in edges:
            edges[(min(u, v), max(u, v))] = rng.randint(1, max_w)
    return WeightedGraph(n, [(u, v, w) for (u, v), w in edges.items()])


def random_ic_instance(rng: random.Random, n: int, extra_edges: int,
                       classes: int, class_size=(2, 3),
                       max_w: int = 9) -> SteinerInstance:
    g = random_connected_graph(rng, n, extra_edges, max_w)
    nodes = list(range(n))
    rng.shuffle(nodes)
    labels = {}
    pos = 0
    for c in range(classes):
        size = rng.randint(*class_size)
        if pos + size > n:
            break
        for v in nodes[pos : pos + size]:
            labels[v] = c
        pos += size
    return SteinerInstance(g, "IC", labels=labels)
