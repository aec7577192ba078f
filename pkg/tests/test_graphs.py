import random
from fractions import Fraction
from itertools import permutations

import pytest

from steinerlab.graphs import (DisconnectedGraph, WeightedGraph,
                               all_pairs_shortest_paths, ball, mst_weight)

from conftest import random_connected_graph


def path_graph(n, w=1):
    return WeightedGraph(n, [(i, i + 1, w) for i in range(n - 1)])


def test_unit_path_metrics():
    m = all_pairs_shortest_paths(path_graph(4))
    assert m.s == 3 and m.D == 3 and m.WD == 3


def triangle():
    # ab=2, bc=1, ca=1 with a=0, b=1, c=2
    return WeightedGraph(3, [(0, 1, 2), (1, 2, 1), (0, 2, 1)])


def exhaustive_paths(g, a, b):
    """All simple a-b paths as (weight, node sequence)."""
    out = []
    for k in range(g.n):
        for mid in permutations([x for x in range(g.n) if x not in (a, b)], k):
            seq = (a,) + mid + (b,)
            if all((min(u, v), max(u, v)) in g.weight
                   for u, v in zip(seq, seq[1:])):
                out.append((sum(g.w(u, v) for u, v in zip(seq, seq[1:])), seq))
    return sorted(out)


def test_triangle_metrics_against_path_enumeration():
    g = triangle()
    m = all_pairs_shortest_paths(g)
    assert m.wd(0, 1) == 2
    # oracle: for every ordered pair, the canonical path is the lex-smallest
    # minimum-weight node sequence; s is the max canonical hop count
    s_oracle = 0
    for a in range(3):
        for b in range(3):
            if a == b:
                continue
            paths = exhaustive_paths(g, a, b)
            best_w = paths[0][0]
            canonical = min(seq for w, seq in paths if w == best_w)
            assert m.wd(a, b) == best_w
            got = tuple(reversed(m.canonical_path(b, a)))
            assert got == canonical
            s_oracle = max(s_oracle, len(canonical) - 1)
    assert m.s == s_oracle  # = 1 here; see decisions ledger


def test_wd_self_zero_and_symmetry_and_triangle_inequality():
    rng = random.Random(7)
    for _ in range(10):
        g = random_connected_graph(rng, rng.randint(4, 12), 4)
        m = all_pairs_shortest_paths(g)
        for v in range(g.n):
            assert m.wd(v, v) == 0
        for u in range(g.n):
            for v in range(g.n):
                assert m.wd(u, v) == m.wd(v, u)
                for w in range(g.n):
                    assert m.wd(u, v) <= m.wd(u, w) + m.wd(w, v)
        assert m.D <= m.s


def test_disconnected_graph_raises():
    g = WeightedGraph(4, [(0, 1, 1), (2, 3, 1)])
    with pytest.raises(DisconnectedGraph):
        all_pairs_shortest_paths(g)


def test_ball_examples():
    # single incident edge weight 3, r=2 -> 2/3 of the edge
    g = WeightedGraph(2, [(0, 1, 3)])
    m = all_pairs_shortest_paths(g)
    b = ball(g, m, 0, Fraction(2))
    assert b.interior == {0}
    assert b.edge_fraction((0, 1)) == Fraction(2, 3)
    # r=0 -> just the center
    b0 = ball(g, m, 0, Fraction(0))
    assert b0.interior == {0} and not b0.fractions
    # unit path a-b-c, ball(a, 3/2) -> interior {a,b}, half of b-c
    g2 = path_graph(3)
    m2 = all_pairs_shortest_paths(g2)
    b2 = ball(g2, m2, 0, Fraction(3, 2))
    assert b2.interior == {0, 1}
    assert b2.edge_fraction((1, 2)) == Fraction(1, 2)
    assert b2.edge_fraction((0, 1)) == 1


def test_ball_monotone_and_full_cover():
    rng = random.Random(3)
    for _ in range(5):
        g = random_connected_graph(rng, 8, 4)
        m = all_pairs_shortest_paths(g)
        v = rng.randrange(g.n)
        radii = sorted(Fraction(rng.randint(0, 2 * m.WD), 2) for _ in range(4))
        views = [ball(g, m, v, r) for r in radii]
        for b1, b2 in zip(views, views[1:]):
            assert b1.interior <= b2.interior
            for e in g.weight:
                assert b1.edge_fraction(e) <= b2.edge_fraction(e)
        full = ball(g, m, v, Fraction(m.WD))
        assert full.interior == set(range(g.n))
        assert all(full.edge_fraction(e) == 1 for e in g.weight)


def spanning_tree_enumeration_weight(g):
    best = None
    edges = g.edges()
    from itertools import combinations
    for sub in combinations(edges, g.n - 1):
        seen = {0}
        grow = True
        picked = set(sub)
        while grow:
            grow = False
            for (u, v) in picked:
                if (u in seen) != (v in seen):
                    seen.update((u, v))
                    grow = True
        if len(seen) == g.n:
            w = sum(g.weight[e] for e in sub)
            best = w if best is None else min(best, w)
    return best


def test_mst_weight():
    assert mst_weight(triangle()) == 2
    assert mst_weight(path_graph(4)) == 3
    rng = random.Random(11)
    g = random_connected_graph(rng, 8, 5)
    assert mst_weight(g) == spanning_tree_enumeration_weight(g)


def test_graph_file_roundtrip():
    rng = random.Random(5)
    g = random_connected_graph(rng, 9, 6)
    assert WeightedGraph.from_text(g.to_text()) == g
    # canonical ordering: serialization is stable
    assert g.to_text() == WeightedGraph.from_text(g.to_text()).to_text()


def test_s_equals_independent_recomputation():
    """s via canonical Dijkstra equals s via layered Bellman-Ford."""
    rng = random.Random(23)
    for _ in range(50):
        g = random_connected_graph(rng, rng.randint(3, 12), 3)
        m = all_pairs_shortest_paths(g)
        s2 = 0
        for root in range(g.n):
            # Bellman-Ford tracking (dist, lex-min path) per node
            best = {root: (0, (root,))}
            for _ in range(g.n):
                for (u, v), w in g.weight.items():
                    for a, b in ((u, v), (v, u)):
                        if a in best:
                            cand = (best[a][0] + w, best[a][1] + (b,))
                            if b not in best or (cand[0], cand[1]) < best[b]:
                                best[b] = cand
            s2 = max(s2, max(len(p) - 1 for _, p in best.values()))
        assert m.s == s2
