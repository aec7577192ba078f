"""Message-passing moat growing, instance transforms, and fast pruning.

Every stage that moves data moves it through the bandwidth-limited
simulator: terminal decomposition runs as multi-source relaxation,
candidate merges are exchanged with neighbors and funneled to the root by
pipelined sorted convergecast, and the accepted merges are broadcast back
down the tree.  The root's accept/reject logic and every node's local
mirror updates are the exact transition functions of the centralized
engine, which is what makes the centralized and distributed runs produce
identical forests under a shared tie-break.

Path materialization (token backtracing along claim routes) and the
intra-moat tree routines are computed by the shared engine code, with
their round cost charged analytically.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .graphs import WeightedGraph, all_pairs_shortest_paths, canon_edge
from .instances import (ForestSolution, Infeasible, SteinerInstance,
                        _UnionFind, check_feasible, is_forest,
                        minimal_subforest)
from .moat_central import (CandidateMerge, Decomposition, MoatEngine,
                           TieBreak, ZERO)
from .sim import (NodeProgram, RunStats, broadcast_list, build_bfs_tree,
                  distributed_bellman_ford, gather_sorted, run)


class InfeasibleInput(Infeasible):
    pass


def _sigma_sq(inst: SteinerInstance, s: int) -> int:
    """min{st, n}: the square of the small/large moat threshold."""
    return min(s * max(1, inst.t), inst.graph.n)


def _sigma_int(sigma_sq: int) -> int:
    r = math.isqrt(sigma_sq)
    return r if r * r == sigma_sq else r + 1


# --- instance transforms ------------------------------------------------

class _ExchangeProgram(NodeProgram):
    """One all-neighbors exchange of a flat tuple; output: neighbor -> tuple."""

    def step(self, inbox, round_no):
        if round_no == 0:
            msg = self.ctx.local_input
            return {u: msg for u in self.ctx.neighbors} if msg else {}
        self.done = True
        self.output = dict(inbox)
        return {}


def exchange_with_neighbors(g: WeightedGraph, values: List[Optional[tuple]],
                            stats: Optional[RunStats] = None):
    outputs, st = run(g, _ExchangeProgram, values, round_cap=4)
    if stats is not None:
        stats.merge(st)
    return outputs


def transform_cr_to_ic(inst: SteinerInstance):
    """Convert connection requests to labels: funnel the request pairs up a
    BFS tree, compute connected components once, and broadcast each
    terminal's label (the smallest terminal of its request component)."""
    if inst.kind != "CR":
        raise ValueError("expected a connection-request instance")
    g = inst.graph
    stats = RunStats()
    parents, _, _, _ = build_bfs_tree(g, stats=stats)
    items = [[] for _ in range(g.n)]
    for v, ws in inst.requests.items():
        items[v] = [(v, w) for w in sorted(ws) if v < w]
    pairs = gather_sorted(g, parents, items, stats=stats)
    uf = _UnionFind(set(x for p in pairs for x in p))
    for v, w in pairs:
        uf.union(v, w)
    comp: Dict[int, List[int]] = {}
    for v in sorted(inst.requests):
        comp.setdefault(uf.find(v), []).append(v)
    labeling = [(v, min(members)) for members in comp.values()
                for v in members]
    broadcast_list(g, parents, sorted(labeling), stats=stats)
    out = SteinerInstance(g, "IC", labels=dict(sorted(labeling)))
    return out, stats


def transform_to_minimal(inst: SteinerInstance):
    """Erase labels carried by a single terminal and rename the rest to the
    smallest member of their class (one convergecast + one broadcast)."""
    if inst.kind != "IC":
        raise ValueError("expected a labelled instance")
    g = inst.graph
    stats = RunStats()
    parents, _, _, _ = build_bfs_tree(g, stats=stats)
    items = [[(inst.labels[v], v)] if v in inst.labels else []
             for v in range(g.n)]
    pairs = gather_sorted(g, parents, items, stats=stats)
    by_label: Dict[int, List[int]] = {}
    for lab, v in pairs:
        by_label.setdefault(lab, []).append(v)
    labeling = [(v, min(vs)) for vs in by_label.values() if len(vs) >= 2
                for v in vs]
    broadcast_list(g, parents, sorted(labeling), stats=stats)
    out = SteinerInstance(g, "IC", labels=dict(sorted(labeling)))
    return out, stats


# --- the simulated phase loop -------------------------------------------

class _PhaseLoop:
    """Drives one MoatEngine with decompositions and candidate streams that
    travel through the simulator."""

    def __init__(self, inst: SteinerInstance, eps, tie_break, stats):
        self.inst = inst
        self.g = inst.graph
        self.stats = stats
        self.engine = MoatEngine(inst, eps=eps, tie_break=tie_break,
                                 cross_check=False)
        self.parents, _, self.root, _ = build_bfs_tree(self.g, stats=stats)
        # every node learns all (terminal, label) pairs
        items = [[(v, inst.labels[v])] if v in inst.labels else []
                 for v in range(self.g.n)]
        pairs = gather_sorted(self.g, self.parents, items, stats=stats)
        broadcast_list(self.g, self.parents, pairs, stats=stats)
        self.merge_log: List[Tuple] = []   # per phase: new merges

    def _decomposition(self) -> Decomposition:
        eng = self.engine
        mirror, claims = eng.mirror, eng.claims
        n = self.g.n
        sources, tags, blocked = {}, {}, set()
        for u in range(n):
            t = claims.owner[u]
            if t is None:
                continue
            if mirror.is_active_terminal(t):
                sources[u] = claims.depth[u] - mirror.radius[t]
                tags[u] = t
            else:
                blocked.add(u)
        out, _ = distributed_bellman_ford(
            self.g, sources, hop_cap=n, blocked=blocked,
            source_tags=tags, stats=self.stats)
        dist: List[Optional[Fraction]] = [None] * n
        owner: List[Optional[int]] = [None] * n
        parent: List[Optional[int]] = [None] * n
        frozen = [False] * n
        for u in range(n):
            if u in blocked:
                t = claims.owner[u]
                frozen[u] = True
                dist[u] = claims.depth[u] - mirror.radius[t]
                owner[u] = t
            else:
                d, src, par = out[u]
                dist[u], owner[u] = d, src
                if claims.owner[u] is None:
                    parent[u] = par
        return Decomposition(dist, owner, parent, frozen)

    def _candidates(self, decomp: Decomposition) -> List[CandidateMerge]:
        """Each boundary edge's smaller endpoint proposes the candidate; the
        proposals ride the sorted convergecast to the root."""
        eng = self.engine
        mirror = eng.mirror
        vals = [None] * self.g.n
        for u in range(self.g.n):
            if decomp.owner[u] is not None:
                vals[u] = ("dv", decomp.dist[u], decomp.owner[u])
        nbr_vals = exchange_with_neighbors(self.g, vals, stats=self.stats)
        phase = eng.subphase + 1
        items = [[] for _ in range(self.g.n)]
        for u in range(self.g.n):
            ou = decomp.owner[u]
            if ou is None:
                continue
            for v in self.g.adj[u]:
                if v < u:
                    continue
                got = nbr_vals[u].get(v)
                if got is None:
                    continue
                dv, ov = got[1], got[2]
                if ov == ou or mirror.same_moat(ou, ov):
                    continue
                act_u = mirror.is_active_terminal(ou)
                act_v = mirror.is_active_terminal(ov)
                if not (act_u or act_v):
                    continue
                du = decomp.dist[u]
                w = Fraction(self.g.w(u, v))
                covered = (min(w, max(ZERO, -du))
                           + min(w, max(ZERO, -dv)))
                gap = (max(ZERO, du) + max(ZERO, dv)
                       + max(ZERO, w - covered))
                thr = gap / 2 if (act_u and act_v) else gap
                a, b = canon_edge(ou, ov)
                items[u].append((thr, a, b, u, v, phase))
        wire = gather_sorted(self.g, self.parents, items, stats=self.stats)
        return [CandidateMerge(thr, (a, b), canon_edge(x, y), ph)
                for thr, a, b, x, y, ph in wire]

    def run_phase(self) -> List:
        eng = self.engine
        decomp = self._decomposition()
        cands = self._candidates(decomp)
        n_merges, n_steps = len(eng.merges), len(eng.steps)
        eng._run_phase(decomp=decomp, cands=cands)
        new_merges = eng.merges[n_merges:]
        # broadcast the phase outcome so every mirror replays it
        payload = []
        for s in eng.steps[n_steps:]:
            if s.kind == "merge":
                payload.append(("m", s.mu, s.pair[0], s.pair[1],
                                s.edge[0], s.edge[1]))
            else:
                payload.append(("cp", s.mu))
        broadcast_list(self.g, self.parents, payload, stats=self.stats)
        self.merge_log.append(new_merges)
        return new_merges

    def run(self, on_merge=None) -> None:
        guard = 0
        while self.engine.mirror.any_active():
            for mg in self.run_phase():
                if on_merge is not None:
                    on_merge(mg)
            guard += 1
            assert guard <= 8 * self.g.n * max(1, self.inst.t)

    def charge_backtrace(self, merges) -> None:
        """Token backtracing of the selected merge paths along the claim
        routes, pipelined: bounded by the longest route plus pipeline
        depth."""
        self.stats.add_rounds(self.g.n + len(merges))


# --- candidate-level pruning (step 4 of the merge loop) -----------------

def needed_merges(merges, inst: SteinerInstance) -> List[int]:
    """Indices of merges whose removal would disconnect a label class in
    the merge forest (computed locally from broadcast information)."""
    classes = inst.label_classes()
    of_class = {v: c for c, vs in classes.items() for v in vs}
    adj: Dict[int, List[Tuple[int, int]]] = {}
    for i, mg in enumerate(merges):
        v, w = mg.pair
        adj.setdefault(v, []).append((w, i))
        adj.setdefault(w, []).append((v, i))
    keep = []
    seen = set()
    for start in sorted(adj):
        if start in seen:
            continue
        order, par_edge = [], {start: None}
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            order.append(u)
            for nxt, i in adj[u]:
                if nxt not in seen:
                    seen.add(nxt)
                    par_edge[nxt] = (u, i)
                    stack.append(nxt)
        totals: Dict[int, int] = {}
        for u in order:
            totals[of_class[u]] = totals.get(of_class[u], 0) + 1
        below = {u: {of_class[u]: 1} for u in order}
        for u in reversed(order):
            if par_edge[u] is None:
                continue
            p, i = par_edge[u]
            if any(0 < cnt < totals[c] for c, cnt in below[u].items()):
                keep.append(i)
            for c, cnt in below[u].items():
                below[p][c] = below[p].get(c, 0) + cnt
    return sorted(keep)


# --- public algorithms --------------------------------------------------

def moat_grow_distributed(inst: SteinerInstance,
                          tie_break: Optional[TieBreak] = None):
    """Exact moat growing over the simulator; returns (solution, stats).

    The pruned output is identical to the centralized exact run under the
    same tie-break.
    """
    stats = RunStats()
    loop = _PhaseLoop(inst, None, tie_break, stats)
    loop.run()
    eng = loop.engine
    kept = needed_merges(eng.merges, inst)
    loop.charge_backtrace(kept)
    forest, _ = eng.materialize()
    solution = minimal_subforest(forest, inst)
    return solution, stats


class MoatSizeRecord(dict):
    """Per-merge snapshot of the small/large bookkeeping (sigma_sq is the
    square of the threshold; counts and diameters are exact)."""


def moat_grow_sublinear(inst: SteinerInstance, eps,
                        tie_break: Optional[TieBreak] = None,
                        size_log: Optional[list] = None):
    """Rounded moat growing over the simulator with small/large moat
    bookkeeping; returns (forest before pruning, stats).

    Merges are accepted in the shared filtering order; the phase-end forest
    is independent of the within-phase merge schedule, so the result equals
    the centralized rounded run's forest.  The small-moat matching rounds
    (tree coloring over moat spanning trees) are charged per growth phase.
    """
    stats = RunStats()
    metrics = all_pairs_shortest_paths(inst.graph)
    sq = _sigma_sq(inst, metrics.s)
    sigma = _sigma_int(sq)
    loop = _PhaseLoop(inst, Fraction(eps), tie_break, stats)

    # incremental materialization for the size bookkeeping
    uf = _UnionFind(range(inst.graph.n))
    members = {v: {v} for v in range(inst.graph.n)}
    small = {}          # component root -> classified small at formation
    terminals = set(inst.terminals)
    comp_edges: Dict[int, set] = {v: set() for v in range(inst.graph.n)}

    def classify(root):
        cnt = len(members[root])
        small[root] = cnt * cnt < sq
        if size_log is not None:
            diam = _tree_diameter(members[root], comp_edges[root])
            larges = sum(1 for r, s_ in small.items()
                         if not s_ and terminals & members[r])
            size_log.append(MoatSizeRecord(
                sigma_sq=sq, component=len(members[root]), small=small[root],
                diameter=diam, large_moats=larges))

    for v in range(inst.graph.n):
        small[v] = True

    eng = loop.engine

    def on_merge(mg):
        v, w = mg.pair
        x, y = mg.edge
        if eng.claims.owner[x] == w or eng.claims.owner[y] == v:
            x, y = y, x
        walk = list(reversed(eng.claims.route_to_owner(x)))
        walk += eng.claims.route_to_owner(y)
        for a, b in zip(walk, walk[1:]):
            ra, rb = uf.find(a), uf.find(b)
            if ra == rb:
                continue
            uf.union(a, b)
            root = uf.find(a)
            other = rb if root == ra else ra
            members[root] |= members.pop(other)
            comp_edges[root] |= comp_edges.pop(other)
            comp_edges[root].add(canon_edge(a, b))
            small.pop(other, None)
        classify(uf.find(v))

    guard = 0
    while eng.mirror.any_active():
        checkpoints_before = eng.growth_phase
        for mg in loop.run_phase():
            # the materializing token walk is deferrable; sizes use it now
            on_merge(mg)
        if eng.growth_phase > checkpoints_before:
            # small-moat matching: tree-coloring iterations per growth phase
            iters = max(1, math.ceil(math.log2(max(2, sigma))))
            stats.add_rounds(iters * (sigma + 4))
        guard += 1
        assert guard <= 8 * inst.graph.n * max(1, inst.t)

    forest, _ = eng.materialize()
    loop.charge_backtrace(eng.merges)
    return forest, stats


def _tree_diameter(nodes, edges) -> int:
    """Hop diameter of a tree given as node and edge sets."""
    if len(nodes) <= 1:
        return 0
    adj: Dict[int, List[int]] = {v: [] for v in nodes}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)

    def far(src):
        seen = {src: 0}
        q = [src]
        best = (0, src)
        while q:
            u = q.pop(0)
            best = max(best, (seen[u], u))
            for v in adj[u]:
                if v not in seen:
                    seen[v] = seen[u] + 1
                    q.append(v)
        return best

    _, a = far(min(nodes))
    d, _ = far(a)
    return d


# --- fast pruning -------------------------------------------------------

class PruneState:
    """Cluster bookkeeping of a pruning run: the forest split into
    bounded-size connected clusters, their roots, and the contracted
    forest's inter-cluster edges."""

    def __init__(self, sigma: int):
        self.sigma = sigma
        self.clusters: List[List[int]] = []
        self.roots: List[int] = []
        self.contracted_edges: List[Tuple[int, int]] = []


def fast_prune(F, inst: SteinerInstance):
    """Minimal solving subforest of F via per-edge class-splitting checks
    (the mark/unmark tree routine): an edge stays exactly when some label
    class has terminals strictly on both of its sides.

    Returns (frozenset F0, stats).  Round accounting: small components are
    solved inside the component, large ones through bounded-size clusters
    and a broadcast contracted forest.
    """
    F = frozenset(canon_edge(a, b) for a, b in F)
    g = inst.graph
    if not is_forest(F, g.n):
        raise InfeasibleInput("pruning input is not a forest")
    if not check_feasible(F, inst):
        raise InfeasibleInput("pruning input does not solve the instance")
    classes = inst.label_classes()
    of_class = {v: c for c, vs in classes.items() for v in vs}
    adj: Dict[int, List[int]] = {v: [] for v in range(g.n)}
    for a, b in F:
        adj[a].append(b)
        adj[b].append(a)

    keep = set()
    seen = [False] * g.n
    comps = []
    for start in range(g.n):
        if seen[start]:
            continue
        order, par = [], {start: None}
        seen[start] = True
        stack = [start]
        while stack:
            u = stack.pop()
            order.append(u)
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    par[v] = u
                    stack.append(v)
        comps.append(order)
        totals: Dict[int, int] = {}
        for u in order:
            if u in of_class:
                totals[of_class[u]] = totals.get(of_class[u], 0) + 1
        below: Dict[int, Dict[int, int]] = {u: {} for u in order}
        for u in order:
            if u in of_class:
                below[u][of_class[u]] = 1
        for u in reversed(order):
            if par[u] is None:
                continue
            if any(0 < cnt < totals[c] for c, cnt in below[u].items()):
                keep.add(canon_edge(u, par[u]))
            for c, cnt in below[u].items():
                below[par[u]][c] = below[par[u]].get(c, 0) + cnt

    # round accounting + cluster bookkeeping
    metrics = all_pairs_shortest_paths(g)
    sigma = _sigma_int(_sigma_sq(inst, metrics.s))
    state = PruneState(sigma)
    node_cluster = {}
    for comp in comps:
        if len(comp) < max(2, sigma):
            continue  # small components resolve inside the component
        for i in range(0, len(comp), sigma):
            cid = len(state.clusters)
            chunk = comp[i:i + sigma]
            state.clusters.append(chunk)
            state.roots.append(chunk[0])
            for u in chunk:
                node_cluster[u] = cid
    for a, b in F:
        ca, cb = node_cluster.get(a), node_cluster.get(b)
        if ca is not None and cb is not None and ca != cb:
            state.contracted_edges.append((ca, cb))
    stats = RunStats()
    # local tree routine in components/clusters, cluster merging sweeps,
    # then broadcasting the contracted forest and its label sets
    stats.add_rounds(4 * sigma
                     + 2 * max(1, math.ceil(math.log2(max(2, sigma))))
                     * (sigma + 2)
                     + metrics.D + len(state.contracted_edges)
                     + len(classes))
    return frozenset(keep), stats


def full_deterministic(inst: SteinerInstance, eps):
    """Transforms, rounded sublinear growth, and fast pruning end to end;
    returns (solution, stats)."""
    stats = RunStats()
    work = inst
    if work.kind == "CR":
        work, st = transform_cr_to_ic(work)
        stats.merge(st)
    work, st = transform_to_minimal(work)
    stats.merge(st)
    if not work.labels:
        return ForestSolution(frozenset(), 0, True), stats
    forest, st = moat_grow_sublinear(work, eps)
    stats.merge(st)
    pruned, st = fast_prune(forest, work)
    stats.merge(st)
    return ForestSolution.from_edges(pruned, inst), stats
