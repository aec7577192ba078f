"""Randomized tree-embedding pipeline for Steiner forests.

A random rank permutation and a random scale factor beta define, for every
node, a chain of ancestors: the highest-rank node within distance
beta * 2^i for increasing i.  Labels climb these chains phase by phase,
leaving behind the physical shortest-path edges they traverse; all
terminals of a label meet at a shared high-rank node.  A truncated variant
stops the climb at the sqrt(n) top-rank nodes and finishes by solving a
reduced instance on groups of forest-connected nodes.

Ball membership, ancestors and routing chains are evaluated centrally from
exact distances; per-phase traffic is charged analytically (routes run
along canonical shortest-path trees and are multiplexed round-robin).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .graphs import (Edge, GraphMetrics, WeightedGraph,
                     all_pairs_shortest_paths, canon_edge)
from .instances import (ForestSolution, SteinerInstance, _UnionFind,
                        check_feasible, minimal_subforest)
from .moat_central import moat_grow_exact
from .sim import RunStats

BETA_GRAIN = 2 ** 20


@dataclass
class VirtualTree:
    """Random hierarchical ancestor structure over a weighted graph."""
    beta: Fraction
    L: int
    ranks: List[int]                      # rank[v]: position in a random permutation
    anc: List[List[int]]                  # anc[v][i]: top-rank node in the 2^i-ball
    S: FrozenSet[int]                     # top-rank truncation set (empty: full mode)
    i_v: List[Optional[int]]              # first level whose ancestor lies in S
    tilde: List[Optional[int]]            # closest S node (ties to smaller node)
    metrics: GraphMetrics = field(repr=False, default=None)

    def edge_weight(self, level: int) -> Fraction:
        return self.beta * (2 ** level)

    def to_json_dict(self) -> dict:
        return {
            "beta": str(self.beta),
            "L": self.L,
            "ranks": self.ranks,
            "ancestors": self.anc,
            "S": sorted(self.S),
            "truncation_level": self.i_v,
            "closest_in_S": self.tilde,
        }


def build_virtual_tree(g: WeightedGraph, seed: int, s_mode: str = "full",
                       metrics: Optional[GraphMetrics] = None):
    """Draw ranks and beta, evaluate every node's ancestor chain, and (in
    truncate mode) the closest top-rank node; returns (VirtualTree, stats).

    Rounds are charged for the rank announcement and the level-by-level
    list construction.
    """
    if s_mode not in ("full", "truncate_at_sqrt_n"):
        raise ValueError(f"unknown s_mode {s_mode!r}")
    if metrics is None:
        metrics = all_pairs_shortest_paths(g)
    rng = random.Random(f"vt:{seed}")
    perm = list(range(g.n))
    rng.shuffle(perm)
    ranks = [0] * g.n
    for pos, v in enumerate(perm):
        ranks[v] = pos
    beta = 1 + Fraction(rng.randint(0, BETA_GRAIN), BETA_GRAIN)
    L = max(0, math.ceil(math.log2(metrics.WD))) if metrics.WD > 1 else 0
    anc = []
    for v in range(g.n):
        chain = []
        for i in range(L + 1):
            radius = beta * (2 ** i)
            best = max((u for u in range(g.n)
                        if Fraction(metrics.dist[v][u]) <= radius),
                       key=lambda u: ranks[u])
            chain.append(best)
        anc.append(chain)
    S: FrozenSet[int] = frozenset()
    i_v: List[Optional[int]] = [None] * g.n
    tilde: List[Optional[int]] = [None] * g.n
    if s_mode == "truncate_at_sqrt_n":
        top = math.isqrt(g.n)
        top = top if top * top == g.n else top + 1
        S = frozenset(sorted(range(g.n), key=lambda v: -ranks[v])[:top])
        for v in range(g.n):
            i_v[v] = next((i for i in range(L + 1) if anc[v][i] in S), L)
            tilde[v] = min(S, key=lambda u: (metrics.dist[v][u], u))
    stats = RunStats()
    # rank flood + one bounded-hop relaxation sweep per level
    stats.add_rounds(metrics.D + (L + 1) * (metrics.s + 1))
    vt = VirtualTree(beta, L, ranks, anc, S, i_v, tilde, metrics)
    return vt, stats


def virtual_tree_opt_weight(vt: VirtualTree, inst: SteinerInstance) -> Fraction:
    """Weight of the virtual-tree solution, per label: the cascade subtree
    its terminals span (distinct chain edges until a single carrier
    remains)."""
    total = Fraction(0)
    for members in inst.label_classes().values():
        holders = set(members)
        for i in range(vt.L + 1):
            if len(holders) <= 1:
                break
            edges = {(u, vt.anc[u][i]) for u in holders if u != vt.anc[u][i]}
            total += len(edges) * vt.edge_weight(i)
            holders = {vt.anc[u][i] for u in holders}
    return total


@dataclass
class SelectionState:
    """Outcome bookkeeping of one stage-1 run."""
    F: Set[Edge]
    charged_weight: Fraction              # sum of beta*2^i over served requests
    relay_destinations: Dict[int, Set[int]]
    phases_run: int
    retired_at: Dict[int, int]            # label -> node where its climb ended

    def max_multiplicity(self) -> int:
        if not self.relay_destinations:
            return 0
        return max(len(d) for d in self.relay_destinations.values())


def stage1_select(g: WeightedGraph, vt: VirtualTree, inst: SteinerInstance,
                  seed: int = 0):
    """Climb the ancestor chains label by label, phase by phase, collecting
    the traversed physical edges; returns (F, SelectionState, stats).

    Labels whose terminals are already connected in (V, F) are purged at
    the start of each phase.  In truncate mode a carrier whose next
    ancestor lies in the top-rank set routes to its closest top-rank node
    instead and retires.
    """
    m = vt.metrics
    F: Set[Edge] = set()
    uf = _UnionFind(range(g.n))
    holders: Dict[int, Set[int]] = {
        lab: set(vs) for lab, vs in inst.label_classes().items()}
    relay: Dict[int, Set[int]] = {}
    charged = Fraction(0)
    retired: Dict[int, int] = {}
    stats = RunStats()
    phases = 0
    for i in range(vt.L + 1):
        # purge finished labels (a convergecast-sized charge)
        stats.add_rounds(m.D + max(1, len(holders)))
        for lab in sorted(holders):
            vs = inst.label_classes()[lab]
            if len({uf.find(v) for v in vs}) == 1:
                del holders[lab]
        if not holders:
            break
        phases += 1
        requests = []                      # (label, source, destination)
        for lab in sorted(holders):
            nxt = set()
            for u in sorted(holders[lab]):
                w = vt.anc[u][i]
                if vt.S and w in vt.S:
                    w = vt.tilde[u]
                    retired[lab] = w
                else:
                    nxt.add(w)
                if w != u:
                    requests.append((lab, u, w))
                else:
                    nxt.add(w)
            if lab in retired and not nxt:
                del holders[lab]
            else:
                holders[lab] = nxt if nxt else {retired[lab]}
        max_hops = 0
        for lab, u, w in requests:
            path = m.canonical_path(u, w)
            max_hops = max(max_hops, len(path) - 1)
            charged += vt.edge_weight(i)
            for a, b in zip(path, path[1:]):
                F.add(canon_edge(a, b))
                uf.union(a, b)
            for node in path[1:-1]:
                relay.setdefault(node, set()).add(w)
        # round-robin multiplexed forwarding plus the handoff backtrace
        backlog = {}
        for lab, u, w in requests:
            backlog[u] = backlog.get(u, 0) + 1
        stats.add_rounds(2 * max_hops + (max(backlog.values())
                                         if backlog else 0))
    state = SelectionState(F, charged, relay, phases, retired)
    return F, state, stats


@dataclass
class ReducedInstance:
    """Residual problem once stage-1 edges are fixed: forest-connected
    groups around the top-rank nodes become super-nodes."""
    graph: WeightedGraph                  # the reduced graph
    instance: SteinerInstance             # labels on the reduced graph
    groups: List[List[int]]               # original nodes per reduced node
    group_of: List[Optional[int]]
    inducing: Dict[Edge, Edge]            # reduced edge -> original edge
    label_components: Dict[int, int]      # original label -> merged label


def build_reduced_instance(g: WeightedGraph, F, inst: SteinerInstance,
                           S: FrozenSet[int]):
    """Assign every node to its hop-closest top-rank node inside the forest
    (V, F) under the hop cap, then contract groups; returns
    (ReducedInstance, stats)."""
    hop_cap = math.ceil(3 * math.sqrt(g.n) * math.log(max(2, g.n)))
    fadj: Dict[int, List[int]] = {v: [] for v in range(g.n)}
    for a, b in F:
        fadj[a].append(b)
        fadj[b].append(a)
    # multi-source hop-bounded search, ties to the smaller top-rank node
    best: Dict[int, Tuple[int, int]] = {s: (0, s) for s in sorted(S)}
    frontier = sorted(S)
    hops = 0
    while frontier and hops < hop_cap:
        hops += 1
        nxt = []
        for u in frontier:
            for v in fadj[u]:
                cand = (hops, best[u][1])
                if v not in best or cand < best[v]:
                    best[v] = cand
                    nxt.append(v)
        frontier = sorted(set(nxt))
    anchors = sorted(S)
    index = {s: i for i, s in enumerate(anchors)}
    group_of: List[Optional[int]] = [None] * g.n
    for v, (_, s) in best.items():
        group_of[v] = index[s]
    residual = [v for v in range(g.n) if group_of[v] is None]
    for v in residual:
        group_of[v] = len(index) + residual.index(v)
    count = len(anchors) + len(residual)
    groups: List[List[int]] = [[] for _ in range(count)]
    for v in range(g.n):
        groups[group_of[v]].append(v)
    # cheapest original edge between distinct groups
    cross: Dict[Edge, Tuple[int, Edge]] = {}
    for a, b in g.edges():
        ga, gb = group_of[a], group_of[b]
        if ga == gb:
            continue
        key = canon_edge(ga, gb)
        cand = (g.w(a, b), canon_edge(a, b))
        if key not in cross or cand < cross[key]:
            cross[key] = cand
    rg = WeightedGraph(count, [(a, b, w) for (a, b), (w, _) in cross.items()])
    inducing = {e: orig for e, (_, orig) in cross.items()}
    # merge labels co-resident in one group
    labels_in: Dict[int, Set[int]] = {}
    for v, lab in (inst.labels or {}).items():
        labels_in.setdefault(group_of[v], set()).add(lab)
    luf = _UnionFind({lab for labs in labels_in.values() for lab in labs})
    for labs in labels_in.values():
        labs = sorted(labs)
        for a, b in zip(labs, labs[1:]):
            luf.union(a, b)
    label_components = {lab: luf.find(lab) for lab in luf.parent}
    red_labels = {}
    for gid, labs in labels_in.items():
        red_labels[gid] = min(label_components[lab] for lab in labs)
    red_inst = SteinerInstance(rg, "IC", labels=red_labels)
    out = ReducedInstance(rg, red_inst, groups, group_of, inducing,
                          label_components)
    stats = RunStats()
    stats.add_rounds(hop_cap + count + len(cross))
    return out, stats


def stage2_solve(red: ReducedInstance) -> Set[Edge]:
    """Solve the reduced instance (gathered whole) with exact moat growing
    and map the chosen reduced edges back to their inducing originals."""
    work = red.instance.as_minimal_ic()
    if not work.labels:
        return set()
    sol, _ = moat_grow_exact(work, cross_check=False)
    return {red.inducing[e] for e in sol.edges}


def prune_to_minimal(F, inst: SteinerInstance) -> ForestSolution:
    """Cheapest spanning forest of (V, F), then the minimal solving
    subforest (stage-1 unions may close cycles)."""
    uf = _UnionFind(range(inst.graph.n))
    forest = set()
    for e in sorted(F, key=lambda e: (inst.graph.weight[e], e)):
        if uf.union(*e):
            forest.add(e)
    return minimal_subforest(forest, inst)


def full_randomized(inst: SteinerInstance, seed: int,
                    repetitions: Optional[int] = None,
                    metrics: Optional[GraphMetrics] = None,
                    report: Optional[dict] = None):
    """Repeat stage 1 over fresh random trees, keep the lightest forest,
    finish with stage 2 when the climb was truncated, and prune; returns
    (ForestSolution, stats)."""
    work = inst if inst.kind == "IC" else None
    if work is None:
        from .moat_dist import transform_cr_to_ic
        work, _ = transform_cr_to_ic(inst)
    work = work.as_minimal_ic()
    g = inst.graph
    stats = RunStats()
    if not work.labels:
        return ForestSolution(frozenset(), 0, True), stats
    if metrics is None:
        metrics = all_pairs_shortest_paths(g)
    small_s = metrics.s * metrics.s <= g.n
    mode = "full" if small_s else "truncate_at_sqrt_n"
    reps = repetitions or max(1, 2 * math.ceil(math.log2(max(2, g.n))))
    rng = random.Random(f"fr:{seed}")
    best = None
    max_mult = 0
    for r in range(reps):
        sub = rng.randint(0, 2 ** 30)
        vt, st = build_virtual_tree(g, sub, mode, metrics=metrics)
        stats.merge(st)
        F, state, st = stage1_select(g, vt, work, sub)
        stats.merge(st)
        max_mult = max(max_mult, state.max_multiplicity())
        got = sum(Fraction(g.weight[e]) for e in F)
        if small_s:
            assert got <= virtual_tree_opt_weight(vt, work) or not F
        key = (got, tuple(sorted(F)))
        if best is None or key < best[0]:
            best = (key, F, vt)
    _, F, vt = best
    if not small_s:
        red, st = build_reduced_instance(g, F, work, vt.S)
        stats.merge(st)
        F = set(F) | stage2_solve(red)
        stats.add_rounds(metrics.D + red.graph.n + red.graph.m)
    solution = prune_to_minimal(F, work)
    if report is not None:
        report["max_multiplicity"] = max_mult
        report["mode"] = mode
        report["repetitions"] = reps
    return ForestSolution.from_edges(solution.edges, inst), stats
