"""Saturation rules plus exhaustive enumeration over message orders.

The procedure first rejects traces whose given relations already cycle,
then saturates: orderings forced by the current graph are committed before
any enumeration.  Rule 1 commits the execution order of two messages as
soon as any happens-before path orders their events; the remaining rules
are realised as orientation propagation -- for every undecided message or
execution order pair, each direction is tried against the closed graph, and
a pair with exactly one surviving direction is committed (a pair with none
is a contradiction).  Enumeration then walks the total message orders per
receiver (lazily, in lexicographic order, respecting everything committed),
derives the execution order each one forces through the queue discipline,
and tests acyclicity, returning the first witness found.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from . import graphcore
from .model import (CONSISTENT, INCONSISTENT, TIMEOUT, CheckResult,
                    TraceGraph, Witness)
from .prep import Prep, fifo_dynamic_edges, prepare

DEFAULT_BUDGET = 10_000_000


@dataclass
class SaturationState:
    prep: Prep
    committed_eo: set[tuple[int, int]] = field(default_factory=set)
    committed_mo: set[tuple[int, int]] = field(default_factory=set)
    edges: list[tuple[int, int]] = field(default_factory=list)
    reach: list[int] = field(default_factory=list)   # bitmask closure
    cycle: list[str] | None = None                   # set when contradictory

    @property
    def inconsistent(self) -> bool:
        return self.cycle is not None

    def committed_eo_ids(self) -> set[tuple[str, str]]:
        return {(self.prep.eid(a), self.prep.eid(b)) for a, b in self.committed_eo}

    def committed_mo_ids(self) -> set[tuple[str, str]]:
        return {(self.prep.eid(a), self.prep.eid(b)) for a, b in self.committed_mo}


def _closure_masks(n: int, edges: list[tuple[int, int]]) -> list[int] | None:
    """Reachability bitmasks over a DAG (None when cyclic)."""
    order = graphcore.topo_order(n, edges)
    if order is None:
        return None
    succ: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        succ[a].append(b)
    reach = [0] * n
    for u in reversed(order):
        m = 0
        for v in succ[u]:
            m |= reach[v] | (1 << v)
        reach[u] = m
    return reach


def _message_events(prep: Prep, g: int) -> list[int]:
    gid = prep.eid(g)
    handler = prep.raw.events[g].handler
    return [prep.idx[e] for e in prep.msgs.posted[handler][gid].events]


def saturate(t: TraceGraph) -> SaturationState:
    """Fixed-point commitment of forced execution/message orders."""
    prep = prepare(t)
    state = SaturationState(prep, edges=list(prep.static_edges))
    reach = _closure_masks(prep.n, state.edges)
    if reach is None:
        cyc = graphcore.find_short_cycle(prep.n, state.edges)
        state.cycle = [prep.eid(i) for i in cyc]
        return state
    state.reach = reach

    def reaches(a: int, b: int) -> bool:
        return bool(state.reach[a] >> b & 1)

    def eo_pair_blocked(g1: int, g2: int) -> bool:
        # committing g1 before g2 adds all m1-events -> m2-events plus the
        # coupled post order; blocked when the graph already orders any of
        # those target events before a source event
        m1, m2 = _message_events(prep, g1), _message_events(prep, g2)
        if any(reaches(b, a) for b in m2 for a in m1):
            return True
        p1, p2 = prep.post_of.get(g1), prep.post_of.get(g2)
        if p1 is not None and p2 is not None and reaches(p2, p1):
            return True
        return False

    def mo_pair_blocked(p1: int, p2: int) -> bool:
        if reaches(p2, p1):
            return True
        g1, g2 = prep.get_of.get(p1), prep.get_of.get(p2)
        if g1 is not None and g2 is not None:
            return eo_pair_blocked(g1, g2)
        return False

    def commit_mo(p1: int, p2: int) -> None:
        state.committed_mo.add((p1, p2))
        state.edges.append((p1, p2))
        g1, g2 = prep.get_of.get(p1), prep.get_of.get(p2)
        if g1 is not None and g2 is not None:
            state.committed_eo.add((g1, g2))
            for a in _message_events(prep, g1):
                for b in _message_events(prep, g2):
                    state.edges.append((a, b))

    eo_pairs = [tuple(c) for h, gets in sorted(prep.gets_by_handler.items())
                for c in itertools.combinations(gets, 2)]
    mo_pairs = [tuple(c) for h in prep.receivers
                for c in itertools.combinations(prep.posts_by_recv[h], 2)]

    changed = True
    while changed:
        changed = False
        for p1, p2 in mo_pairs:
            if (p1, p2) in state.committed_mo or (p2, p1) in state.committed_mo:
                continue
            fwd, bwd = mo_pair_blocked(p1, p2), mo_pair_blocked(p2, p1)
            if fwd and bwd:
                state.cycle = [prep.eid(p1), prep.eid(p2)]
                return state
            if fwd != bwd:
                commit_mo(*((p2, p1) if fwd else (p1, p2)))
                reach = _closure_masks(prep.n, state.edges)
                if reach is None:  # pragma: no cover - the tests above prevent it
                    cyc = graphcore.find_short_cycle(prep.n, state.edges)
                    state.cycle = [prep.eid(i) for i in cyc]
                    return state
                state.reach = reach
                changed = True
        for g1, g2 in eo_pairs:
            if (g1, g2) in state.committed_eo or (g2, g1) in state.committed_eo:
                continue
            p1, p2 = prep.post_of.get(g1), prep.post_of.get(g2)
            fwd, bwd = eo_pair_blocked(g1, g2), eo_pair_blocked(g2, g1)
            if fwd and bwd:
                state.cycle = [prep.eid(g1), prep.eid(g2)]
                return state
            if fwd != bwd:
                if p1 is not None and p2 is not None:
                    commit_mo(*((p2, p1) if fwd else (p1, p2)))
                else:
                    a, b = ((g2, g1) if fwd else (g1, g2))
                    state.committed_eo.add((a, b))
                    for x in _message_events(prep, a):
                        for y in _message_events(prep, b):
                            state.edges.append((x, y))
                reach = _closure_masks(prep.n, state.edges)
                if reach is None:  # pragma: no cover
                    cyc = graphcore.find_short_cycle(prep.n, state.edges)
                    state.cycle = [prep.eid(i) for i in cyc]
                    return state
                state.reach = reach
                changed = True
    return state


def _linear_extensions(items: list[int], before: set[tuple[int, int]]):
    """All total orders of ``items`` extending ``before``, lexicographically
    by item position."""
    preds: dict[int, set[int]] = {i: set() for i in items}
    for a, b in before:
        if a in preds and b in preds:
            preds[b].add(a)

    def rec(placed: list[int], remaining: list[int]):
        if not remaining:
            yield tuple(placed)
            return
        done = set(placed)
        for x in remaining:
            if preds[x] <= done:
                placed.append(x)
                yield from rec(placed, [y for y in remaining if y != x])
                placed.pop()

    yield from rec([], items)


def check_enum(t: TraceGraph, budget: int = DEFAULT_BUDGET,
               timeout_ms: int | None = None) -> CheckResult:
    """Enumeration checker: saturate, then search total message orders."""
    deadline = None if timeout_ms is None else time.monotonic() + timeout_ms / 1000.0
    state = saturate(t)
    prep = state.prep
    if state.inconsistent:
        return CheckResult(INCONSISTENT, detail="cycle: " + ",".join(state.cycle))

    # an order pair forced by the saturated closure must be respected, so the
    # per-receiver enumeration extends (closure | committed) on its posts
    forced: set[tuple[int, int]] = set(state.committed_mo)
    for h in prep.receivers:
        for p1, p2 in itertools.permutations(prep.posts_by_recv[h], 2):
            if state.reach[p1] >> p2 & 1:
                forced.add((p1, p2))

    pools = [prep.posts_by_recv[h] for h in prep.receivers]
    checked = 0

    def product(i: int, acc: dict[str, list[int]]):
        if i == len(pools):
            yield dict(acc)
            return
        for perm in _linear_extensions(pools[i], forced):
            acc[prep.receivers[i]] = list(perm)
            yield from product(i + 1, acc)
        acc.pop(prep.receivers[i], None)

    for mo in product(0, {}):
        checked += 1
        if checked > budget:
            return CheckResult(TIMEOUT, detail=f"budget of {budget} acyclicity checks",
                               stats={"checked": checked})
        if deadline is not None and checked % 64 == 0 and time.monotonic() > deadline:
            return CheckResult(TIMEOUT, detail="wall-clock timeout",
                               stats={"checked": checked})
        edges = state.edges + fifo_dynamic_edges(prep, mo)
        order = graphcore.topo_order(prep.n, edges)
        if order is None:
            continue
        eo = {}
        for h, perm in mo.items():
            eo[h] = [prep.eid(prep.get_of[p]) for p in perm if p in prep.get_of]
        w = Witness(
            mo={h: [prep.eid(p) for p in perm] for h, perm in mo.items()},
            eo=eo,
            linearization=[prep.eid(i) for i in order],
        )
        return CheckResult(CONSISTENT, witness=w, stats={"checked": checked})
    return CheckResult(INCONSISTENT, stats={"checked": checked})
