import random
from fractions import Fraction

from steinerlab.graphs import WeightedGraph, all_pairs_shortest_paths, mst_weight
from steinerlab.instances import SteinerInstance, check_feasible, minimal_subforest
from steinerlab.moat_central import moat_grow_exact, moat_grow_rounded
from steinerlab.moat_dist import (fast_prune, full_deterministic,
                                  moat_grow_distributed, moat_grow_sublinear,
                                  needed_merges, transform_cr_to_ic,
                                  transform_to_minimal)
from steinerlab.oracle import TooLarge, exact_optimum

from conftest import random_connected_graph, random_ic_instance


def _random_cr(rng, n, extra):
    g = random_connected_graph(rng, n, extra)
    nodes = rng.sample(range(n), rng.randint(2, min(6, n)))
    requests = {}
    for v, w in zip(nodes, nodes[1:]):
        if rng.random() < 0.8:
            requests.setdefault(v, set()).add(w)
    if not requests:
        requests = {nodes[0]: {nodes[1]}}
    return SteinerInstance(g, "CR", requests=requests)


def _corpus(seed, count, n_lo=5, n_hi=14):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(n_lo, n_hi)
        out.append(random_ic_instance(rng, n, rng.randint(1, 4),
                                      rng.randint(2, 3)))
    return out


def test_cr_to_ic_matches_component_labels():
    rng = random.Random(11)
    for _ in range(10):
        cr = _random_cr(rng, rng.randint(4, 12), 3)
        ic, stats = transform_cr_to_ic(cr)
        assert sorted(map(sorted, ic.label_classes().values())) == \
            sorted(map(sorted, cr.label_classes().values()))
        assert stats.rounds > 0
        # identical feasible sets on random edge subsets
        edges = cr.graph.edges()
        for _ in range(40):
            sub = [e for e in edges if rng.random() < 0.6]
            assert check_feasible(sub, cr) == check_feasible(sub, ic)


def test_to_minimal_matches_local_reduction():
    rng = random.Random(12)
    for _ in range(10):
        g = random_connected_graph(rng, rng.randint(4, 12), 3)
        labels = {v: rng.randint(0, 3) for v in range(g.n)
                  if rng.random() < 0.6}
        inst = SteinerInstance(g, "IC", labels=labels)
        got, _ = transform_to_minimal(inst)
        want = inst.as_minimal_ic()
        assert got.labels == want.labels
        again, _ = transform_to_minimal(got)
        assert again.labels == got.labels


def test_distributed_equals_centralized_master():
    for inst in _corpus(21, 12):
        sol_c, _ = moat_grow_exact(inst)
        sol_d, stats = moat_grow_distributed(inst)
        assert sol_d.edges == sol_c.edges
        assert sol_d.weight == sol_c.weight
        assert stats.max_words_edge_round <= 8


def test_distributed_single_edge_round_envelope():
    g = WeightedGraph(2, [(0, 1, 3)])
    inst = SteinerInstance(g, "IC", labels={0: 0, 1: 0})
    sol_c, _ = moat_grow_exact(inst)
    sol_d, stats = moat_grow_distributed(inst)
    m = all_pairs_shortest_paths(g)
    assert sol_d.edges == sol_c.edges
    assert stats.rounds <= 60 * (m.D + m.s + 1)


def test_sublinear_equals_rounded_forest_master():
    eps = Fraction(1, 2)
    for inst in _corpus(31, 10):
        _, trace, _ = moat_grow_rounded(inst, eps)
        forest, _ = moat_grow_sublinear(inst, eps)
        assert forest == trace.forest_edges


def test_sublinear_moat_size_invariants():
    eps = Fraction(1, 2)
    for inst in _corpus(41, 8):
        log = []
        moat_grow_sublinear(inst, eps, size_log=log)
        for rec in log:
            assert rec["large_moats"] ** 2 <= rec["sigma_sq"]
            if rec["small"]:
                assert rec["diameter"] ** 2 <= rec["sigma_sq"]


def test_fast_prune_equals_minimal_subforest_master():
    eps = Fraction(1, 2)
    pairs = 0
    for inst in _corpus(51, 12):
        forest, _ = moat_grow_sublinear(inst, eps)
        pruned, _ = fast_prune(forest, inst)
        assert pruned == minimal_subforest(forest, inst).edges
        pairs += 1
    assert pairs == 12


def test_fast_prune_drops_pendant_and_is_idempotent():
    g = WeightedGraph(4, [(0, 1, 1), (1, 2, 1), (1, 3, 1)])
    inst = SteinerInstance(g, "IC", labels={0: 0, 2: 0})
    pruned, _ = fast_prune({(0, 1), (1, 2), (1, 3)}, inst)
    assert pruned == frozenset({(0, 1), (1, 2)})
    again, _ = fast_prune(pruned, inst)
    assert again == pruned


def test_needed_merges_cover_the_pruned_forest():
    from steinerlab.moat_central import MoatEngine
    for inst in _corpus(61, 8):
        eng = MoatEngine(inst, cross_check=False)
        eng.run()
        forest, per_merge = eng.materialize()
        final = minimal_subforest(forest, inst)
        kept = set(needed_merges(eng.merges, inst))
        covered = set()
        for i in kept:
            covered.update(per_merge[i])
        assert final.edges <= covered


def test_full_deterministic_mst_family():
    rng = random.Random(71)
    for _ in range(4):
        g = random_connected_graph(rng, rng.randint(4, 14), rng.randint(2, 5))
        inst = SteinerInstance(g, "IC", labels={v: 0 for v in range(g.n)})
        sol, _ = full_deterministic(inst, Fraction(1, 2))
        assert sol.weight == mst_weight(g)


def test_full_deterministic_ratio_and_cr_input():
    rng = random.Random(81)
    checked = 0
    while checked < 6:
        cr = _random_cr(rng, rng.randint(4, 10), 3)
        try:
            opt = exact_optimum(cr)
        except TooLarge:
            continue
        sol, _ = full_deterministic(cr, Fraction(1, 2))
        assert sol.feasible
        assert sol.weight <= Fraction(5, 2) * opt.weight
        checked += 1


def test_distributed_reruns_are_bit_identical():
    inst = _corpus(91, 1, n_lo=8, n_hi=10)[0]
    _, s1 = moat_grow_distributed(inst)
    _, s2 = moat_grow_distributed(inst)
    assert s1.to_json() == s2.to_json()
