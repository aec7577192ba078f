import random
from fractions import Fraction

import pytest

from steinerlab.graphs import WeightedGraph, mst_weight
from steinerlab.instances import (ForestSolution, Infeasible, SteinerInstance,
                                  approx_ratio, check_feasible, is_forest,
                                  minimal_subforest)
from steinerlab.oracle import TooLarge, exact_optimum

from conftest import random_connected_graph, random_ic_instance


def triangle_instance():
    g = WeightedGraph(3, [(0, 1, 2), (1, 2, 1), (0, 2, 1)])
    return SteinerInstance(g, "IC", labels={0: 0, 1: 0})


def test_triangle_optimum():
    sol = exact_optimum(triangle_instance(), backend="enum")
    assert sol.weight == 2
    sol2 = exact_optimum(triangle_instance(), backend="dp")
    assert sol2.weight == 2


def test_single_edge_optimum():
    g = WeightedGraph(2, [(0, 1, 4)])
    inst = SteinerInstance(g, "IC", labels={0: 0, 1: 0})
    sol = exact_optimum(inst)
    assert sol.edges == frozenset({(0, 1)}) and sol.weight == 4


def test_all_terminal_single_label_equals_mst():
    rng = random.Random(2)
    for _ in range(5):
        g = random_connected_graph(rng, 8, 5)
        inst = SteinerInstance(g, "IC", labels={v: 0 for v in range(g.n)})
        assert exact_optimum(inst, backend="dp").weight == mst_weight(g)


def test_backends_cross_check():
    rng = random.Random(31)
    for _ in range(25):
        inst = random_ic_instance(rng, rng.randint(4, 8), rng.randint(0, 4),
                                  rng.randint(1, 3), class_size=(2, 2))
        a = exact_optimum(inst, backend="enum")
        b = exact_optimum(inst, backend="dp")
        assert a.weight == b.weight, inst.to_text()
        assert a.feasible and b.feasible
        assert is_forest(a.edges, inst.graph.n)
        assert is_forest(b.edges, inst.graph.n)


def test_too_large_guard():
    rng = random.Random(1)
    g = random_connected_graph(rng, 30, 30)
    labels = {v: v % 11 for v in range(26)}
    inst = SteinerInstance(g, "IC", labels=labels)
    assert inst.t > 10 and g.m > 24
    with pytest.raises(TooLarge):
        exact_optimum(inst)


def test_check_feasible_and_ratio():
    inst = triangle_instance()
    assert not check_feasible(set(), inst)
    opt = exact_optimum(inst)
    assert check_feasible(opt.edges, inst)
    assert approx_ratio(opt.edges, inst) == 1


def greedy_deletion_oracle(edges, inst):
    es = set(edges)
    changed = True
    while changed:
        changed = False
        for e in sorted(es):
            if check_feasible(es - {e}, inst):
                es.remove(e)
                changed = True
    return es


def test_minimal_subforest_examples():
    # path a-b-c terminals {a,c}, plus pendant edge c-d
    g = WeightedGraph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
    inst = SteinerInstance(g, "IC", labels={0: 0, 2: 0})
    sol = minimal_subforest({(0, 1), (1, 2), (2, 3)}, inst)
    assert sol.edges == frozenset({(0, 1), (1, 2)})
    # idempotence
    again = minimal_subforest(sol.edges, inst)
    assert again.edges == sol.edges


def test_minimal_subforest_matches_greedy_deletion():
    rng = random.Random(13)
    done = 0
    while done < 30:
        inst = random_ic_instance(rng, rng.randint(5, 10), rng.randint(0, 4),
                                  rng.randint(1, 3))
        if not inst.terminals:
            continue
        # build a feasible forest: spanning tree of the graph
        from steinerlab.graphs import canon_edge

        parent = list(range(inst.graph.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        tree = set()
        for (u, v) in inst.graph.edges():
            if find(u) != find(v):
                parent[find(u)] = find(v)
                tree.add((u, v))
        sol = minimal_subforest(tree, inst)
        assert sol.edges == frozenset(greedy_deletion_oracle(tree, inst))
        assert sol.weight <= sum(inst.graph.weight[e] for e in tree)
        done += 1


def test_minimal_subforest_infeasible_raises():
    inst = triangle_instance()
    with pytest.raises(Infeasible):
        minimal_subforest(set(), inst)


def test_optimum_is_forest_and_canonical():
    rng = random.Random(77)
    for _ in range(10):
        inst = random_ic_instance(rng, 7, 3, 2, class_size=(2, 2))
        sol = exact_optimum(inst, backend="enum")
        assert is_forest(sol.edges, inst.graph.n)
        # canonical: enumeration returns lex-min optimum among equal weights
        again = exact_optimum(inst, backend="enum")
        assert sol.edges == again.edges


def test_cr_ic_equivalence_of_transform():
    rng = random.Random(19)
    for _ in range(10):
        g = random_connected_graph(rng, 7, 3)
        terms = rng.sample(range(g.n), 4)
        requests = {terms[0]: {terms[1]}, terms[2]: {terms[3]}}
        cr = SteinerInstance(g, "CR", requests=requests)
        ic = cr.as_minimal_ic()
        for _ in range(200):
            sub = {e for e in g.edges() if rng.random() < 0.5}
            assert check_feasible(sub, cr) == check_feasible(sub, ic)


def test_instance_file_roundtrip():
    rng = random.Random(3)
    inst = random_ic_instance(rng, 8, 4, 2)
    back = SteinerInstance.from_text(inst.to_text())
    assert back.labels == inst.labels and back.graph == inst.graph
    g = random_connected_graph(rng, 6, 2)
    cr = SteinerInstance(g, "CR", requests={0: {3}, 1: {2}})
    back2 = SteinerInstance.from_text(cr.to_text())
    assert back2.requests == cr.requests
