"""Centralized moat growing for Steiner forests.

Two variants share one engine: exact simultaneous growth (every growth step
ends in a merge) and rounded growth (radii are additionally truncated at a
geometric sequence of checkpoints where activity is re-evaluated).

The engine maintains two layers of state:

* a *global mirror* -- moat partition, merged labels, radii, activity flags.
  This is exactly the information a distributed node can reconstruct from
  broadcasts, so the same transition logic drives the message-passing
  implementations.
* *claims* -- for every node, which terminal's grown ball covers it, at what
  distance from that terminal, and through which neighbor it was reached.
  Claims are permanent; merge paths are read off the claim routes.

Growth is organized in phases.  Within a phase the territory decomposition
(a Voronoi growth of all active ball surfaces into unclaimed territory,
with inactive territory frozen) is fixed; every boundary edge between two
distinct moats yields a candidate merge whose threshold is the growth at
which the two surfaces meet on that edge.  Candidates are consumed in a
deterministic total order; a phase ends as soon as some moat's activity
status changes.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .graphs import (Edge, GraphMetrics, HalfWeight, WeightedGraph,
                     all_pairs_shortest_paths, canon_edge)
from .instances import (ForestSolution, NotMinimalInstance, SteinerInstance,
                        _UnionFind, minimal_subforest)

ZERO = Fraction(0)


class StalledGrowth(Exception):
    """Raised when a growth iteration cannot make progress (internal bug
    guard; a connected minimal instance always admits a next event)."""


# --- candidate merges ---------------------------------------------------

@dataclass(frozen=True)
class CandidateMerge:
    """A potential merge event observed on one boundary edge.

    ``threshold`` is the within-phase growth at which the two ball surfaces
    meet somewhere on ``edge``; ``pair`` holds the two owning terminals
    (sorted), ``edge`` the inducing boundary edge (sorted).  ``phase`` is
    the decomposition round that produced the candidate.
    """
    threshold: Fraction
    pair: Tuple[int, int]
    edge: Edge
    phase: int


class TieBreak:
    """Total order on candidate merges within one phase.

    The threshold must stay the most significant component (growing past a
    candidate without merging would be unsound); subclasses may reorder
    candidates that share a threshold.
    """

    def key(self, cand: CandidateMerge):
        return (cand.threshold, cand.pair, cand.edge)


DEFAULT_TIE_BREAK = TieBreak()


# --- global mirror ------------------------------------------------------

class GlobalMirror:
    """Moat partition, merged labels, radii and activity flags.

    Everything here is derivable from broadcast information (terminal
    labels plus the accepted merges and growth amounts), which is what lets
    message-passing nodes replay the same control flow locally.
    """

    def __init__(self, terminals: List[int], labels: Dict[int, int],
                 rounded: bool):
        self.terminals = sorted(terminals)
        self.rounded = rounded
        self.base_label = dict(labels)
        self.moat_uf = _UnionFind(self.terminals)
        self.label_uf = _UnionFind(set(labels.values()))
        self.radius: Dict[int, Fraction] = {v: ZERO for v in self.terminals}
        self.act: Dict[int, bool] = {}
        for v in self.terminals:
            root = self.moat_uf.find(v)
            if root not in self.act:
                self.act[root] = self._spans_other_moat(root)

    # -- partition views --

    def moat_of(self, v: int) -> int:
        return self.moat_uf.find(v)

    def same_moat(self, v: int, w: int) -> bool:
        return self.moat_uf.find(v) == self.moat_uf.find(w)

    def moats(self) -> List[Tuple[int, ...]]:
        by_root: Dict[int, List[int]] = {}
        for v in self.terminals:
            by_root.setdefault(self.moat_uf.find(v), []).append(v)
        return sorted(tuple(sorted(m)) for m in by_root.values())

    def label_of_moat(self, root: int) -> int:
        return self.label_uf.find(self.base_label[root])

    def is_active_terminal(self, v: int) -> bool:
        return self.act[self.moat_uf.find(v)]

    def act_vector(self) -> Tuple[bool, ...]:
        return tuple(self.act[self.moat_uf.find(v)] for v in self.terminals)

    def active_moat_count(self) -> int:
        return sum(1 for root, a in self.act.items() if a)

    def any_active(self) -> bool:
        return any(self.act.values())

    def _spans_other_moat(self, root: int) -> bool:
        """True iff some terminal outside root's moat shares its label."""
        lab = self.label_of_moat(root)
        for v in self.terminals:
            if (self.moat_uf.find(v) != root
                    and self.label_uf.find(self.base_label[v]) == lab):
                return True
        return False

    # -- transitions --

    def grow(self, mu: Fraction) -> None:
        for v in self.terminals:
            if self.act[self.moat_uf.find(v)]:
                self.radius[v] += mu

    def merge(self, v: int, w: int) -> int:
        """Union the moats of v and w (and their labels); returns the new
        moat root.  Rounded growth marks merged moats active outright;
        exact growth re-evaluates the spanning predicate."""
        rv, rw = self.moat_uf.find(v), self.moat_uf.find(w)
        assert rv != rw
        self.label_uf.union(self.base_label[rv], self.base_label[rw])
        self.moat_uf.union(rv, rw)
        root = self.moat_uf.find(rv)
        other = rw if root == rv else rv
        del self.act[other]
        if self.rounded:
            self.act[root] = True
        else:
            self.act[root] = self._spans_other_moat(root)
        return root

    def refresh_activity(self) -> None:
        """Re-evaluate every moat's activity (rounded-growth checkpoint)."""
        for root in list(self.act):
            self.act[root] = self._spans_other_moat(root)


# --- claims and decomposition -------------------------------------------

class Claims:
    """Permanent per-node coverage records.

    ``owner[u]`` is the terminal whose ball covers u (or None), ``depth[u]``
    the distance from that terminal along the claim route, ``parent[u]`` the
    neighbor through which the route reaches u (None at terminals).
    """

    def __init__(self, n: int, terminals: List[int]):
        self.owner: List[Optional[int]] = [None] * n
        self.depth: List[Optional[Fraction]] = [None] * n
        self.parent: List[Optional[int]] = [None] * n
        for v in terminals:
            self.owner[v] = v
            self.depth[v] = ZERO

    def route_to_owner(self, u: int) -> List[int]:
        """Nodes from u along claim parents down to the owning terminal."""
        path = [u]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        assert path[-1] == self.owner[u]
        return path


@dataclass
class Decomposition:
    """Result of one territory-growth round.

    ``dist[u]`` is the growth at which the owning surface reaches u
    (negative inside an already-claimed ball, None if unreachable this
    phase), ``owner[u]`` the claiming terminal, ``parent[u]`` the chosen
    predecessor for newly reached nodes, ``frozen[u]`` whether u belongs to
    an inactive moat's territory.
    """
    dist: List[Optional[Fraction]]
    owner: List[Optional[int]]
    parent: List[Optional[int]]
    frozen: List[bool]


def decompose(g: WeightedGraph, mirror: GlobalMirror,
              claims: Claims) -> Decomposition:
    """Grow all active ball surfaces simultaneously into unclaimed
    territory.

    Claimed nodes are fixed: active ones act as sources with offset
    depth - radius(owner), inactive ones are frozen and relay nothing
    (growth may not tunnel through a stalled ball).  Unclaimed nodes adopt
    the lexicographically smallest (distance, owner); parent pointers go to
    the smallest eligible neighbor at the fixpoint.
    """
    n = g.n
    dist: List[Optional[Fraction]] = [None] * n
    owner: List[Optional[int]] = [None] * n
    frozen = [False] * n
    settled = [False] * n
    heap = []
    for u in range(n):
        t = claims.owner[u]
        if t is None:
            continue
        d = claims.depth[u] - mirror.radius[t]
        dist[u] = d
        owner[u] = t
        settled[u] = True
        if mirror.is_active_terminal(t):
            heapq.heappush(heap, (d, t, u))
        else:
            frozen[u] = True
    while heap:
        d, t, u = heapq.heappop(heap)
        if (d, t) != (dist[u], owner[u]):
            continue
        if not settled[u]:
            settled[u] = True
        for v in g.adj[u]:
            if settled[v]:
                continue
            cand = (d + g.w(u, v), t)
            if dist[v] is None or cand < (dist[v], owner[v]):
                dist[v], owner[v] = cand
                heapq.heappush(heap, (cand[0], cand[1], v))
    parent: List[Optional[int]] = [None] * n
    for u in range(n):
        if claims.owner[u] is not None or dist[u] is None:
            continue
        for p in g.adj[u]:
            if frozen[p] or dist[p] is None or owner[p] != owner[u]:
                continue
            if dist[p] + g.w(u, p) == dist[u]:
                parent[u] = p
                break
    return Decomposition(dist, owner, parent, frozen)


def boundary_candidates(g: WeightedGraph, mirror: GlobalMirror,
                        decomp: Decomposition,
                        phase: int) -> List[CandidateMerge]:
    """Candidate merges from every boundary edge between distinct moats.

    The threshold is the within-phase growth at which the two surfaces meet
    on the edge: surplus distances on both sides plus the uncovered middle,
    closing at rate 2 when both moats grow and rate 1 otherwise.
    """
    out = []
    for (a, b) in g.edges():
        oa, ob = decomp.owner[a], decomp.owner[b]
        if oa is None or ob is None or oa == ob:
            continue
        if mirror.same_moat(oa, ob):
            continue
        act_a = mirror.is_active_terminal(oa)
        act_b = mirror.is_active_terminal(ob)
        if not (act_a or act_b):
            continue
        da, db = decomp.dist[a], decomp.dist[b]
        w = Fraction(g.w(a, b))
        covered = min(w, max(ZERO, -da)) + min(w, max(ZERO, -db))
        gap = max(ZERO, da) + max(ZERO, db) + max(ZERO, w - covered)
        threshold = gap / 2 if (act_a and act_b) else gap
        out.append(CandidateMerge(threshold, canon_edge(oa, ob),
                                  canon_edge(a, b), phase))
    return out


# --- trace --------------------------------------------------------------

@dataclass
class TraceStep:
    """One growth event: a merge or a rounding checkpoint."""
    index: int
    kind: str                       # "merge" | "checkpoint"
    mu: Fraction
    active_moats: int               # moats growing during this step
    phase: int                      # merge-phase index (activity changes)
    growth_phase: int               # checkpoint interval (rounded growth)
    pair: Optional[Tuple[int, int]] = None
    edge: Optional[Edge] = None
    path: Tuple[Edge, ...] = ()
    radii: Dict[int, Fraction] = field(default_factory=dict)
    moats: Tuple[Tuple[int, ...], ...] = ()
    act: Dict[int, bool] = field(default_factory=dict)


@dataclass
class MoatTrace:
    """Complete record of a moat-growing run."""
    steps: List[TraceStep]
    forest_edges: frozenset         # all retained merge-path edges, pre-prune
    merge_phases: int
    growth_phases: int
    total_growth: Fraction

    def to_json(self) -> str:
        def enc(x):
            if isinstance(x, Fraction):
                return str(x)
            return x
        blob = {
            "merge_phases": self.merge_phases,
            "growth_phases": self.growth_phases,
            "total_growth": str(self.total_growth),
            "forest_edges": sorted(map(list, self.forest_edges)),
            "steps": [{
                "index": s.index, "kind": s.kind, "mu": str(s.mu),
                "active_moats": s.active_moats, "phase": s.phase,
                "growth_phase": s.growth_phase,
                "pair": list(s.pair) if s.pair else None,
                "edge": list(s.edge) if s.edge else None,
                "path": sorted(map(list, s.path)),
                "radii": {str(v): str(r) for v, r in sorted(s.radii.items())},
                "moats": [list(m) for m in s.moats],
                "act": {str(v): a for v, a in sorted(s.act.items())},
            } for s in self.steps],
        }
        return json.dumps(blob, indent=1)


@dataclass
class GrowthSchedule:
    """Checkpoint bookkeeping of a rounded run: the radius thresholds and
    how many merge phases each checkpoint interval contained."""
    eps: Fraction
    thresholds: List[Fraction]
    phases_per_interval: List[int]


def dual_lower_bound(trace: MoatTrace) -> Fraction:
    """Sum over growth steps of (number of growing moats) * growth; a lower
    bound on the optimum forest weight (and half of it lower-bounds any
    single growing step's contribution to the output)."""
    return sum((s.active_moats * s.mu for s in trace.steps), ZERO)


# --- printed pair-scan (cross-check) ------------------------------------

def pair_scan_mu(mirror: GlobalMirror,
                 metrics: GraphMetrics) -> Optional[Fraction]:
    """Smallest growth until two moat surfaces meet, computed directly from
    pairwise terminal distances and current radii."""
    best = None
    ts = mirror.terminals
    for i, v in enumerate(ts):
        for w in ts[i + 1:]:
            if mirror.same_moat(v, w):
                continue
            av = mirror.is_active_terminal(v)
            aw = mirror.is_active_terminal(w)
            if not (av or aw):
                continue
            gap = (Fraction(metrics.dist[v][w])
                   - mirror.radius[v] - mirror.radius[w])
            mu = gap / 2 if (av and aw) else gap
            if best is None or mu < best:
                best = mu
    return best


# --- the engine ---------------------------------------------------------

@dataclass
class AcceptedMerge:
    pair: Tuple[int, int]
    edge: Edge
    mu: Fraction
    phase: int
    growth_phase: int


class MoatEngine:
    """Shared driver for exact and rounded moat growing."""

    def __init__(self, inst: SteinerInstance, eps: Optional[Fraction] = None,
                 tie_break: Optional[TieBreak] = None,
                 metrics: Optional[GraphMetrics] = None,
                 cross_check: bool = True):
        if inst.kind != "IC" or not inst.is_minimal():
            raise NotMinimalInstance(
                "moat growing expects a minimal labelled instance")
        self.inst = inst
        self.g = inst.graph
        self.eps = eps
        self.rounded = eps is not None
        self.tie_break = tie_break or DEFAULT_TIE_BREAK
        self.cross_check = cross_check
        self.metrics = metrics
        self.mirror = GlobalMirror(inst.terminals, inst.labels, self.rounded)
        self.claims = Claims(self.g.n, inst.terminals)
        self.cum = ZERO
        self.mu_hat = Fraction(1)
        self.growth_phase = 0
        self.merge_phase = 0
        self.subphase = 0
        self.steps: List[TraceStep] = []
        self.merges: List[AcceptedMerge] = []
        self.thresholds: List[Fraction] = []
        self.phases_per_interval: List[int] = []
        self._phases_this_interval = 0

    # -- growth steps --

    def _record(self, kind, mu, active, pair=None, edge=None):
        self.steps.append(TraceStep(
            index=len(self.steps), kind=kind, mu=mu, active_moats=active,
            phase=self.merge_phase, growth_phase=self.growth_phase,
            pair=pair, edge=edge,
            radii=dict(self.mirror.radius), moats=tuple(self.mirror.moats()),
            act={v: self.mirror.is_active_terminal(v)
                 for v in self.mirror.terminals}))

    def _checkpoint(self) -> bool:
        """Truncate growth at the current radius threshold, re-evaluate all
        activity; returns True iff some status changed."""
        mu = self.mu_hat - self.cum
        assert mu >= 0
        before = self.mirror.act_vector()
        active = self.mirror.active_moat_count()
        self.mirror.grow(mu)
        self.cum = self.mu_hat
        self.mirror.refresh_activity()
        self._record("checkpoint", mu, active)
        self.thresholds.append(self.mu_hat)
        self.phases_per_interval.append(self._phases_this_interval)
        self._phases_this_interval = 0
        self.mu_hat *= 1 + self.eps / 2
        self.growth_phase += 1
        return self.mirror.act_vector() != before

    def _scan_check(self, mu_engine: Fraction) -> None:
        if not self.cross_check:
            return
        if self.metrics is None:
            self.metrics = all_pairs_shortest_paths(self.g)
        mu_scan = pair_scan_mu(self.mirror, self.metrics)
        assert mu_scan == mu_engine, (
            f"surface-meet scan disagrees: {mu_scan} vs {mu_engine}")

    def _run_phase(self, decomp: Optional[Decomposition] = None,
                   cands: Optional[List[CandidateMerge]] = None) -> None:
        """One decomposition round: consume candidates in order until an
        activity status changes (or, in rounded mode, a checkpoint fires
        with no candidate below it).

        ``decomp``/``cands`` may be supplied by a message-passing front end
        (whose per-node relaxation computes the same fixpoint); when absent
        they are computed directly.
        """
        self.subphase += 1
        act_start = {v: self.mirror.is_active_terminal(v)
                     for v in self.mirror.terminals}
        if decomp is None:
            decomp = decompose(self.g, self.mirror, self.claims)
        if cands is None:
            cands = boundary_candidates(self.g, self.mirror, decomp,
                                        self.subphase)
        cands = sorted(cands, key=self.tie_break.key)
        phase_start = self.cum
        progressed = False
        status_changed = False
        for cand in cands:
            v, w = cand.pair
            if self.mirror.same_moat(v, w):
                continue
            target = phase_start + cand.threshold
            if self.rounded:
                fired = False
                while target >= self.mu_hat:
                    progressed = True
                    if self._checkpoint():
                        fired = True
                        break
                if fired:
                    status_changed = True
                    break
            mu = target - self.cum
            assert mu >= 0
            self._scan_check(mu)
            before = self.mirror.act_vector()
            active = self.mirror.active_moat_count()
            self.mirror.grow(mu)
            self.cum = target
            self.mirror.merge(v, w)
            self._record("merge", mu, active, pair=cand.pair, edge=cand.edge)
            self.merges.append(AcceptedMerge(cand.pair, cand.edge, mu,
                                             self.merge_phase,
                                             self.growth_phase))
            progressed = True
            if self.mirror.act_vector() != before:
                status_changed = True
                break
        else:
            if self.mirror.any_active():
                if self.rounded:
                    status_changed = self._checkpoint()
                    progressed = True
                else:
                    raise StalledGrowth("no merge candidate while active")
        if not progressed:
            raise StalledGrowth("growth phase made no progress")
        if status_changed:
            self.merge_phase += 1
            self._phases_this_interval += 1
        # claim everything the surfaces rolled over this phase
        growth = self.cum - phase_start
        for u in range(self.g.n):
            if self.claims.owner[u] is not None:
                continue
            d = decomp.dist[u]
            if d is not None and d <= growth:
                t = decomp.owner[u]
                r_start = self.mirror.radius[t] - (
                    growth if act_start[t] else ZERO)
                self.claims.owner[u] = t
                self.claims.depth[u] = d + r_start
                self.claims.parent[u] = decomp.parent[u]

    def run(self) -> None:
        guard = 0
        while self.mirror.any_active():
            self._run_phase()
            guard += 1
            assert guard <= 8 * self.g.n * max(1, len(self.mirror.terminals))

    # -- output --

    def materialize(self) -> Tuple[frozenset, Dict[int, Tuple[Edge, ...]]]:
        """Turn accepted merges into forest edges.

        Each merge contributes the claim route of one endpoint down to its
        terminal, the inducing edge, and the other endpoint's route; edges
        closing a cycle against earlier ones are dropped.
        """
        uf = _UnionFind(range(self.g.n))
        forest = set()
        per_merge: Dict[int, Tuple[Edge, ...]] = {}
        for idx, mg in enumerate(self.merges):
            v, w = mg.pair
            x, y = mg.edge
            if self.claims.owner[x] == w or self.claims.owner[y] == v:
                x, y = y, x
            assert self.claims.owner[x] == v and self.claims.owner[y] == w
            walk = list(reversed(self.claims.route_to_owner(x)))
            walk += self.claims.route_to_owner(y)
            kept = []
            for a, b in zip(walk, walk[1:]):
                if uf.union(a, b):
                    e = canon_edge(a, b)
                    forest.add(e)
                    kept.append(e)
            per_merge[idx] = tuple(kept)
        return frozenset(forest), per_merge

    def finish(self) -> Tuple[ForestSolution, MoatTrace]:
        forest, per_merge = self.materialize()
        merge_idx = 0
        for step in self.steps:
            if step.kind == "merge":
                step.path = per_merge[merge_idx]
                merge_idx += 1
        trace = MoatTrace(steps=self.steps, forest_edges=forest,
                          merge_phases=self.merge_phase,
                          growth_phases=self.growth_phase,
                          total_growth=self.cum)
        solution = minimal_subforest(forest, self.inst)
        return solution, trace


# --- public entry points ------------------------------------------------

def moat_grow_exact(inst: SteinerInstance, tie_break: Optional[TieBreak] = None,
                    metrics: Optional[GraphMetrics] = None,
                    cross_check: bool = True):
    """Simultaneous exact moat growing; returns (solution, trace).

    The output weight is at most twice the optimum, and the trace's dual
    lower bound certifies it per run.
    """
    eng = MoatEngine(inst, eps=None, tie_break=tie_break, metrics=metrics,
                     cross_check=cross_check)
    eng.run()
    return eng.finish()


def moat_grow_rounded(inst: SteinerInstance, eps,
                      tie_break: Optional[TieBreak] = None,
                      metrics: Optional[GraphMetrics] = None,
                      cross_check: bool = True):
    """Moat growing with geometrically rounded activity checkpoints;
    returns (solution, trace, schedule).  The output weight is at most
    (2 + eps) times the optimum."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    eng = MoatEngine(inst, eps=eps, tie_break=tie_break, metrics=metrics,
                     cross_check=cross_check)
    eng.run()
    solution, trace = eng.finish()
    schedule = GrowthSchedule(eps=eps, thresholds=eng.thresholds,
                              phases_per_interval=eng.phases_per_interval)
    return solution, trace, schedule
