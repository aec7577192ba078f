import json
import math

import pytest

from steinerlab.generators import (InvalidSpec, gen_family, gen_sd_gadget_cr,
                                   gen_sd_gadget_ic)
from steinerlab.graphs import all_pairs_shortest_paths, canon_edge
from steinerlab.harness import (ExperimentConfig, check_row, evaluate_row,
                                run_suite, solve_instance)
from steinerlab.instances import check_feasible
from steinerlab.oracle import exact_optimum
from steinerlab.cli import main
from steinerlab.sim import BudgetViolation, word_budget


# --- family generation ---

def test_family_streams_are_connected_and_deterministic():
    for fam, knobs in [("gnm", {"n": 12}), ("geometric", {"n": 10}),
                       ("grid", {"rows": 3, "cols": 4}),
                       ("path", {"n": 10}), ("stars", {"hubs": 3})]:
        spec = {"family": fam, "count": 3, "seed": 5, **knobs}
        a = [i.to_text() for i in gen_family(spec)]
        b = [i.to_text() for i in gen_family(spec)]
        assert a == b and len(a) == 3
        for inst in gen_family(spec):
            assert inst.graph.is_connected()


def test_grid_example_counts():
    spec = {"family": "grid", "rows": 4, "cols": 4, "weights": [1, 1],
            "classes": 4, "class_size": [2, 2], "seed": 1}
    inst = next(gen_family(spec))
    assert inst.graph.n == 16 and inst.graph.m == 24
    assert inst.k == 4 and inst.t == 8
    assert all(w == 1 for w in inst.graph.weight.values())


def test_heavy_path_stresses_hop_diameter():
    spec = {"family": "path", "n": 12, "heavy": 99, "seed": 0}
    inst = next(gen_family(spec))
    m = all_pairs_shortest_paths(inst.graph)
    assert m.s == inst.graph.n - 1


def test_invalid_specs_rejected():
    with pytest.raises(InvalidSpec):
        list(gen_family({"family": "nope"}))
    with pytest.raises(InvalidSpec):
        list(gen_family({"family": "gnm", "count": 0}))
    with pytest.raises(InvalidSpec):
        list(gen_family({"family": "gnm", "weights": [3, 1]}))


# --- lower-bound gadgets ---

def test_cr_gadget_disjoint_sets_avoid_heavy_edges():
    n, rho = 3, 2
    inst = gen_sd_gadget_cr({1, 3}, {2}, rho, n)
    heavy = rho * (2 * n + 2) + 1
    assert sorted(inst.graph.weight.values()).count(heavy) == 2
    opt = exact_optimum(inst)
    assert opt.weight <= 2 * n + 2
    assert all(inst.graph.weight[e] != heavy for e in opt.edges)


def test_cr_gadget_intersecting_sets_need_heavy_edge():
    n, rho = 3, 2
    inst = gen_sd_gadget_cr({1, 2}, {2, 3}, rho, n)
    heavy = rho * (2 * n + 2) + 1
    opt = exact_optimum(inst)
    assert any(inst.graph.weight[e] == heavy for e in opt.edges)
    assert opt.weight > rho * (2 * n + 2)


def test_ic_gadget_structure_and_empty_optimum():
    inst = gen_sd_gadget_ic({1, 2}, {3}, 4)
    assert inst.graph.n == 10 and all(w == 1
                                      for w in inst.graph.weight.values())
    # disjoint sets: every label class is a singleton, nothing to connect
    assert exact_optimum(inst).weight == 0
    joint = gen_sd_gadget_ic({1, 2}, {2}, 4)
    opt = exact_optimum(joint)
    assert opt.weight == 3 and canon_edge(0, 5) in opt.edges


# --- solving and suites ---

def test_solver_dispatch_feasible_on_all_algos():
    inst = next(gen_family({"family": "gnm", "n": 10, "seed": 3,
                            "classes": 2}))
    for algo in ("central-exact", "central-eps", "dist", "sublinear",
                 "randomized"):
        from fractions import Fraction
        sol, rounds, msgs, mp, gp, dual = solve_instance(
            inst, algo, Fraction(1, 2), seed=1)
        assert sol.feasible
        assert check_feasible(sol.edges, inst)


def test_result_row_ratio_iff_opt():
    inst = next(gen_family({"family": "gnm", "n": 8, "seed": 2}))
    cfg = ExperimentConfig(generator={}, algo="central-exact")
    row = evaluate_row(inst, cfg, seed=0)
    assert (row.opt is None) == (row.ratio is None)
    assert row.n == 8 and row.feasible
    assert not check_row(row, None)


def test_suite_runs_and_is_deterministic(tmp_path):
    cfg = ExperimentConfig(
        generator={"family": "gnm", "n": 9, "count": 4, "seed": 7},
        algo="central-exact", seeds=[0],
        out_csv=str(tmp_path / "a.csv"), out_json=str(tmp_path / "a.json"))
    rep1 = run_suite(cfg)
    assert rep1.passed and len(rep1.rows) == 4
    csv1 = (tmp_path / "a.csv").read_text()
    rep2 = run_suite(cfg)
    assert (tmp_path / "a.csv").read_text() == csv1
    assert json.loads((tmp_path / "a.json").read_text())["passed"]


def test_word_budget_one_breaks_candidate_messages():
    inst = next(gen_family({"family": "gnm", "n": 8, "seed": 4}))
    with word_budget(1):
        with pytest.raises(BudgetViolation):
            solve_instance(inst, "dist")


# --- CLI ---

def test_cli_gen_solve_trace_roundtrip(tmp_path, capsys):
    spec = {"family": "gnm", "n": 8, "count": 1, "seed": 9}
    gen_out = tmp_path / "inst.txt"
    assert main(["gen", json.dumps(spec), "--out", str(gen_out)]) == 0
    sol_out = tmp_path / "sol.json"
    assert main(["solve", str(gen_out), "--algo", "central-exact",
                 "--out", str(sol_out)]) == 0
    payload = json.loads(sol_out.read_text())
    assert payload["feasible"] and payload["dual_lower_bound"] is not None
    trace_out = tmp_path / "trace.json"
    assert main(["trace", str(gen_out), "--out", str(trace_out)]) == 0
    assert json.loads(trace_out.read_text())["steps"]


def test_cli_suite_exit_codes(tmp_path, capsys):
    cfg = {"generator": {"family": "gnm", "n": 8, "count": 2, "seed": 1},
           "algo": "central-eps", "eps": "1/2"}
    assert main(["suite", json.dumps(cfg),
                 "--out", str(tmp_path / "s.csv")]) == 0
    assert "PASS" in capsys.readouterr().out
