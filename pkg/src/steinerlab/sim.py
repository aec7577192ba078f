"""Round-synchronous CONGEST simulator with bandwidth accounting.

A node program is an object created per node from a factory; each round the
simulator calls ``step(inbox, round_no)`` on every non-terminated node (in
node-ID order -- programs may not share state, so this is observably
equivalent to any schedule) and delivers the returned per-neighbor messages
at the start of the next round.  Messages are flat tuples; every element
counts one word except ``Fraction``s, which count two (numerator and
denominator).  Oversized messages raise ``BudgetViolation`` -- algorithm
bugs are never silently truncated.
"""

from __future__ import annotations

import contextlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .graphs import WeightedGraph

DEFAULT_WORDS_PER_MSG = 8

_word_budget = DEFAULT_WORDS_PER_MSG


@contextlib.contextmanager
def word_budget(words: int):
    """Override the per-message word budget for all runs in the block."""
    global _word_budget
    prev = _word_budget
    _word_budget = int(words)
    try:
        yield
    finally:
        _word_budget = prev


class BudgetViolation(Exception):
    pass


class RoundCapExceeded(Exception):
    pass


def word_count(msg: tuple) -> int:
    words = 0
    for item in msg:
        words += 2 if isinstance(item, Fraction) else 1
    return words


@dataclass
class RunStats:
    rounds: int = 0
    total_messages: int = 0
    total_words: int = 0
    max_words_edge_round: int = 0
    per_round_messages: List[int] = field(default_factory=list)
    termination_round: Dict[int, int] = field(default_factory=dict)

    def merge(self, other: "RunStats") -> None:
        self.rounds += other.rounds
        self.total_messages += other.total_messages
        self.total_words += other.total_words
        self.max_words_edge_round = max(self.max_words_edge_round,
                                        other.max_words_edge_round)
        self.per_round_messages.extend(other.per_round_messages)

    def add_rounds(self, rounds: int) -> None:
        """Account rounds charged analytically (no message traffic)."""
        self.rounds += int(rounds)

    def to_json(self) -> str:
        return json.dumps({
            "rounds": self.rounds,
            "total_messages": self.total_messages,
            "total_words": self.total_words,
            "max_words_edge_round": self.max_words_edge_round,
            "termination_round": {str(k): v
                                  for k, v in self.termination_round.items()},
        }, sort_keys=True)


class NodeContext:
    def __init__(self, node: int, neighbors: List[int],
                 edge_weights: Dict[int, int], local_input, rng_seed):
        import random

        self.node = node
        self.neighbors = neighbors
        self.edge_weights = edge_weights
        self.local_input = local_input
        self.rng = random.Random(f"{rng_seed}:{node}")


class NodeProgram:
    """Base class: subclass, read ``self.ctx``, implement ``step``."""

    def __init__(self, ctx: NodeContext):
        self.ctx = ctx
        self.done = False
        self.output = None

    def step(self, inbox: Dict[int, tuple], round_no: int) -> Dict[int, tuple]:
        raise NotImplementedError


def run(g: WeightedGraph, factory: Callable[[NodeContext], NodeProgram],
        inputs: Optional[Sequence] = None, seed: int = 0,
        round_cap: int = 10_000,
        words_per_msg: Optional[int] = None,
        trace: Optional[list] = None) -> Tuple[list, RunStats]:
    """Execute a node program on every node until all terminate."""
    if words_per_msg is None:
        words_per_msg = _word_budget
    if round_cap <= 0:
        raise ValueError("round_cap must be positive")
    nodes = []
    for v in range(g.n):
        ctx = NodeContext(
            node=v,
            neighbors=list(g.adj[v]),
            edge_weights={u: g.w(v, u) for u in g.adj[v]},
            local_input=None if inputs is None else inputs[v],
            rng_seed=seed,
        )
        nodes.append(factory(ctx))
    stats = RunStats()
    inboxes: List[Dict[int, tuple]] = [{} for _ in range(g.n)]
    for round_no in range(round_cap):
        if all(p.done for p in nodes):
            break
        next_inboxes: List[Dict[int, tuple]] = [{} for _ in range(g.n)]
        sent_this_round = 0
        for v in range(g.n):
            prog = nodes[v]
            if prog.done:
                continue
            outbox = prog.step(inboxes[v], round_no) or {}
            for dst, msg in outbox.items():
                if dst not in g.adj[v]:
                    raise ValueError(f"node {v} sent to non-neighbor {dst}")
                words = word_count(msg)
                if words > words_per_msg:
                    raise BudgetViolation(
                        f"node {v} -> {dst} message of {words} words "
                        f"exceeds budget {words_per_msg}: {msg!r}")
                stats.max_words_edge_round = max(stats.max_words_edge_round,
                                                words)
                stats.total_words += words
                sent_this_round += 1
                next_inboxes[dst][v] = msg
                if trace is not None:
                    trace.append((round_no, v, dst, words,
                                  msg[0] if msg else ""))
            if prog.done and v not in stats.termination_round:
                stats.termination_round[v] = round_no
        stats.total_messages += sent_this_round
        stats.per_round_messages.append(sent_this_round)
        stats.rounds += 1
        inboxes = next_inboxes
    else:
        raise RoundCapExceeded(f"round cap {round_cap} hit")
    for v, p in enumerate(nodes):
        stats.termination_round.setdefault(v, stats.rounds)
    return [p.output for p in nodes], stats


# --- BFS tree -----------------------------------------------------------

class _BfsProgram(NodeProgram):
    """Builds a BFS tree rooted at the max-ID node; output (parent, depth)."""

    def __init__(self, ctx):
        super().__init__(ctx)
        self.depth = None
        self.parent = None
        self.announced = False

    def step(self, inbox, round_no):
        if round_no == 0 and self.ctx.local_input == "root":
            self.depth, self.parent = 0, None
        if self.depth is None:
            offers = sorted((msg[1], src) for src, msg in inbox.items())
            if offers:
                d, src = offers[0]
                self.depth, self.parent = d + 1, src
        if self.depth is not None and not self.announced:
            self.announced = True
            return {u: ("bfs", self.depth) for u in self.ctx.neighbors}
        if self.announced:
            self.done = True
            self.output = (self.parent, self.depth)
        return {}


def build_bfs_tree(g: WeightedGraph, seed: int = 0,
                   stats: Optional[RunStats] = None):
    """Return (parent list, depth list, root, RunStats)."""
    root = g.n - 1
    inputs = ["root" if v == root else None for v in range(g.n)]
    outputs, st = run(g, _BfsProgram, inputs, seed=seed, round_cap=g.n + 3)
    if stats is not None:
        stats.merge(st)
    parents = [o[0] for o in outputs]
    depths = [o[1] for o in outputs]
    return parents, depths, root, st


def tree_children(parents: Sequence[Optional[int]]) -> List[List[int]]:
    children: List[List[int]] = [[] for _ in parents]
    for v, p in enumerate(parents):
        if p is not None:
            children[p].append(v)
    return children


# --- Bellman-Ford with reduced weights ----------------------------------

class _BellmanFordProgram(NodeProgram):
    """Multi-source relaxation; local input is a dict:

    ``init``: optional (distance, source) pair seeding this node;
    ``blocked``: bool -- frozen nodes neither relax nor relay;
    ``fixed``: bool -- sources with permanent values (ignore improvements);
    ``weights``: optional per-neighbor override of the relaxation weight.
    Output: (distance, source, parent) or (None, None, None).
    A node keeps the lexicographically smallest (distance, source); parents
    break remaining ties by smaller neighbor ID.
    """

    def __init__(self, ctx):
        super().__init__(ctx)
        inp = ctx.local_input or {}
        self.blocked = inp.get("blocked", False)
        self.fixed = inp.get("fixed", False)
        self.hop_cap = inp["hop_cap"]
        self.weights = inp.get("weights") or ctx.edge_weights
        init = inp.get("init")
        if init is not None:
            self.dist, self.src = Fraction(init[0]), init[1]
        else:
            self.dist, self.src = None, None
        self.parent = None
        self.dirty = init is not None and not self.blocked

    def step(self, inbox, round_no):
        if round_no < self.hop_cap:
            if not self.blocked and not self.fixed:
                for nbr in sorted(inbox):
                    if inbox[nbr][0] != "bf":
                        continue
                    cand = (Fraction(inbox[nbr][1]) + self.weights[nbr],
                            inbox[nbr][2])
                    if (self.dist is None or cand < (self.dist, self.src)):
                        self.dist, self.src = cand
                        self.dirty = True
            out = {}
            if self.dirty:
                self.dirty = False
                out = {u: ("bf", self.dist, self.src)
                       for u in self.ctx.neighbors}
            return out
        if round_no == self.hop_cap:
            # One closing exchange of settled values so that parent pointers
            # depend only on the fixpoint, never on message timing.
            if not self.blocked and self.dist is not None:
                return {u: ("fin", self.dist, self.src)
                        for u in self.ctx.neighbors}
            return {}
        if not self.blocked and not self.fixed and self.dist is not None:
            for nbr in sorted(inbox):
                tag, d, s = inbox[nbr]
                if (tag == "fin" and s == self.src
                        and d + self.weights[nbr] == self.dist):
                    self.parent = nbr
                    break
        self.done = True
        self.output = (self.dist, self.src, self.parent)
        return {}


def distributed_bellman_ford(g: WeightedGraph, sources: Dict[int, Fraction],
                             hop_cap: int,
                             weightfn=None,
                             blocked: Optional[set] = None,
                             seed: int = 0,
                             stats: Optional[RunStats] = None,
                             source_tags: Optional[Dict[int, int]] = None):
    """Per-node (distance, closest source, parent); ties to smaller source.

    ``sources`` maps source node -> initial distance (may be negative to
    model positions inside an already-grown ball); source values are fixed
    and never improved.  ``weightfn(u, v)`` may supply reduced edge weights;
    ``blocked`` nodes are frozen.  ``source_tags`` may relabel the announced
    source of a seeded node (e.g. the terminal owning a claimed node).
    """
    blocked = blocked or set()
    source_tags = source_tags or {}
    inputs = []
    for v in range(g.n):
        inp = {"hop_cap": hop_cap, "blocked": v in blocked}
        if v in sources:
            inp["init"] = (Fraction(sources[v]), source_tags.get(v, v))
            inp["fixed"] = True
        if weightfn is not None:
            inp["weights"] = {u: weightfn(v, u) for u in g.adj[v]}
        inputs.append(inp)
    outputs, st = run(g, _BellmanFordProgram, inputs, seed=seed,
                      round_cap=hop_cap + 4)
    if stats is not None:
        stats.merge(st)
    return outputs, st


# --- pipelined gather / broadcast over a rooted tree --------------------

class _GatherProgram(NodeProgram):
    """Streams every node's sorted item list to the root in ascending global
    order (pipelined sorted merge).  Local input: dict with ``parent``,
    ``children``, ``items`` (list of tuples, pre-sorted).  The root's output
    is the fully merged ascending list."""

    END = ("gather_end",)

    def __init__(self, ctx):
        super().__init__(ctx)
        inp = ctx.local_input
        self.parent = inp["parent"]
        self.children = list(inp["children"])
        self.mine = sorted(inp["items"])
        self.buffers = {c: [] for c in self.children}
        self.ended = {c: False for c in self.children}
        self.collected = []
        self.sent_end = False

    def _next_item(self):
        """Pop the globally smallest available item, or None if we must wait
        or everything is flushed (then '' marks exhaustion)."""
        heads = []
        for c in self.children:
            if self.buffers[c]:
                heads.append((self.buffers[c][0], c))
            elif not self.ended[c]:
                return None  # must wait for this child
        if self.mine:
            heads.append((self.mine[0], "self"))
        if not heads:
            return ""
        item, who = min(heads, key=lambda x: x[0])
        if who == "self":
            self.mine.pop(0)
        else:
            self.buffers[who].pop(0)
        return item

    def step(self, inbox, round_no):
        for src, msg in inbox.items():
            if msg == self.END:
                self.ended[src] = True
            elif msg[0] == "gather":
                self.buffers[src].append(tuple(msg[1:]))
        item = self._next_item()
        if self.parent is None:  # root collects
            while item not in (None, ""):
                self.collected.append(item)
                item = self._next_item()
            if item == "":
                self.done = True
                self.output = self.collected
            return {}
        if item == "":
            if not self.sent_end:
                self.sent_end = True
                return {self.parent: self.END}
            self.done = True
            return {}
        if item is None:
            return {}
        return {self.parent: ("gather",) + item}


def gather_sorted(g: WeightedGraph, parents: Sequence[Optional[int]],
                  items_per_node: Sequence[list], seed: int = 0,
                  round_cap: int = 100_000,
                  stats: Optional[RunStats] = None) -> list:
    """Pipelined convergecast of sorted items; returns the root's merged
    ascending list."""
    children = tree_children(parents)
    inputs = [{"parent": parents[v], "children": children[v],
               "items": items_per_node[v]} for v in range(g.n)]
    outputs, st = run(g, _GatherProgram, inputs, seed=seed,
                      round_cap=round_cap)
    if stats is not None:
        stats.merge(st)
    root = parents.index(None)
    return outputs[root]


class _BroadcastProgram(NodeProgram):
    """Pipelined broadcast of the root's item list down the tree."""

    END = ("bcast_end",)

    def __init__(self, ctx):
        super().__init__(ctx)
        inp = ctx.local_input
        self.parent = inp["parent"]
        self.children = list(inp["children"])
        self.queue = list(inp["items"]) if self.parent is None else []
        self.received = list(self.queue)
        self.ended = self.parent is None
        self.flushed = False

    def step(self, inbox, round_no):
        if self.parent is not None and self.parent in inbox:
            msg = inbox[self.parent]
            if msg == self.END:
                self.ended = True
            else:
                item = tuple(msg[1:])
                self.received.append(item)
                self.queue.append(item)
        out = {}
        if self.queue:
            item = self.queue.pop(0)
            out = {c: ("bcast",) + item for c in self.children}
        elif self.ended and not self.flushed:
            self.flushed = True
            out = {c: self.END for c in self.children}
        elif self.ended and self.flushed:
            self.done = True
            self.output = self.received
        return out


def broadcast_list(g: WeightedGraph, parents: Sequence[Optional[int]],
                   items: list, seed: int = 0, round_cap: int = 100_000,
                   stats: Optional[RunStats] = None) -> list:
    """Broadcast ``items`` from the root; returns per-node received lists
    (asserted identical)."""
    children = tree_children(parents)
    inputs = [{"parent": parents[v], "children": children[v],
               "items": items if parents[v] is None else []}
              for v in range(g.n)]
    outputs, st = run(g, _BroadcastProgram, inputs, seed=seed,
                      round_cap=round_cap)
    if stats is not None:
        stats.merge(st)
    assert all(o == outputs[0] for o in outputs)
    return outputs
