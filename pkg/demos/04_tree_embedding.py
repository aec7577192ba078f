"""The randomized tree-embedding solver: random ranks, ancestor chains,
and label climbing.

Every node gets a random rank; its level-i ancestor is the highest-rank
node within distance beta * 2^i.  Labels climb these chains, buying the
physical shortest paths they traverse, and all terminals of a label meet
at a shared high-rank node.  Repeating over fresh random trees and keeping
the lightest forest gives an O(log n)-competitive solution in rounds
scaling with sqrt(n), not with the shortest-path diameter.
"""

import random
from fractions import Fraction

from steinerlab.generators import gen_family
from steinerlab.oracle import exact_optimum
from steinerlab.tree_embed import (build_virtual_tree, full_randomized,
                                   stage1_select, virtual_tree_opt_weight)

inst = next(gen_family({"family": "gnm", "n": 12, "seed": 17,
                        "classes": 2})).as_minimal_ic()
g = inst.graph

vt, _ = build_virtual_tree(g, seed=1)
print(f"beta = {vt.beta} (~{float(vt.beta):.4f}), levels 0..{vt.L}")
v = inst.terminals[0]
print(f"ancestor chain of terminal {v}: {vt.anc[v]} "
      f"(ranks {[vt.ranks[u] for u in vt.anc[v]]})")

F, state, _ = stage1_select(g, vt, inst, seed=1)
w = sum(g.weight[e] for e in F)
bound = virtual_tree_opt_weight(vt, inst)
print(f"stage-1 forest: {len(F)} edges, weight {w} <= "
      f"virtual-tree optimum {bound}")
print(f"max relayed-path multiplicity: {state.max_multiplicity()}")

report = {}
sol, stats = full_randomized(inst, seed=4, report=report)
opt = exact_optimum(inst).weight
print(f"\nfull solver ({report['repetitions']} repetitions, "
      f"{report['mode']} mode): weight {sol.weight}, OPT {opt}, "
      f"ratio {sol.weight / opt:.2f}")
