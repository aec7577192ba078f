"""The end-to-end low-round pipeline: transforms, sublinear moat growth
with small/large moat bookkeeping, and distributed pruning.

Moats are classified small while their component count squared stays below
min(s*t, n); small moats coordinate by local matching while at most sigma
large moats use global convergecasts.  The fast pruning pass reduces the
grown forest to its unique minimal feasible subforest.  Run on a single
label covering every node, the pipeline computes a minimum spanning tree.
"""

import random
from fractions import Fraction

from steinerlab.generators import gen_family
from steinerlab.graphs import mst_weight
from steinerlab.instances import SteinerInstance
from steinerlab.moat_dist import (fast_prune, full_deterministic,
                                  moat_grow_sublinear)
from steinerlab.instances import minimal_subforest

inst = next(gen_family({"family": "grid", "rows": 4, "cols": 5,
                        "seed": 3, "classes": 3})).as_minimal_ic()

size_log = []
forest, stats = moat_grow_sublinear(inst, Fraction(1, 2), size_log=size_log)
print(f"grown forest: {len(forest)} edges in {stats.rounds} rounds")
larges = max(rec["large_moats"] for rec in size_log)
print(f"moat bookkeeping: sigma^2 = {size_log[0]['sigma_sq']}, "
      f"at most {larges} large moats at any step")

pruned, pstats = fast_prune(forest, inst)
reference = minimal_subforest(forest, inst).edges
print(f"fast prune: {len(forest)} -> {len(pruned)} edges "
      f"(matches the centralized minimal subforest: {pruned == reference})")

# MST specialization: one label on every node
g = next(gen_family({"family": "gnm", "n": 30, "seed": 8})).graph
all_term = SteinerInstance(g, "IC", labels={v: 0 for v in range(g.n)})
sol, _ = full_deterministic(all_term, Fraction(1, 2))
print(f"\nall-terminal instance: output weight {sol.weight} "
      f"== MST weight {mst_weight(g)}")
