"""Brute-force reference checker.

Enumerates every total message order per receiver (and, in strict mode,
every execution order per handler independently), derives the remaining
relations, and tests happens-before acyclicity.  Deliberately does no
pruning: this is the ground truth the real checkers are validated against.
"""

from __future__ import annotations

import itertools
import math
import time
from collections import defaultdict
from dataclasses import dataclass

from . import graphcore
from .model import (CONSISTENT, INCONSISTENT, TIMEOUT, GET, POST, WRITE,
                    CheckResult, TraceGraph, Witness, derive_messages,
                    normalize)


class OracleLimitExceeded(Exception):
    """The instance is too large for exhaustive enumeration."""


@dataclass
class OracleConfig:
    strict_eo: bool = False      # enumerate eo independently of mo
    infer_co: bool = False       # enumerate coherence when a variable has none
    max_events: int = 24
    max_assignments: int = 2_000_000
    all_witnesses: bool = False


def _predict(counts: list[int]) -> int:
    total = 1
    for c in counts:
        total *= math.factorial(c)
    return total


def check_oracle(t: TraceGraph, cfg: OracleConfig | None = None,
                 timeout_ms: int | None = None) -> CheckResult:
    cfg = cfg or OracleConfig()
    n = len(t.events)
    if n > cfg.max_events:
        raise OracleLimitExceeded(f"{n} events exceeds the oracle limit {cfg.max_events}")

    norm = normalize(t)
    msgs = derive_messages(norm)
    idx = {ev.eid: i for i, ev in enumerate(t.events)}

    posts_by_recv: dict[str, list[int]] = defaultdict(list)
    gets_by_handler: dict[str, list[int]] = defaultdict(list)
    writes_by_var: dict[str, list[int]] = defaultdict(list)
    for i, ev in enumerate(t.events):
        if ev.kind == POST:
            posts_by_recv[ev.receiver].append(i)
        elif ev.kind == GET:
            gets_by_handler[ev.handler].append(i)
        elif ev.kind == WRITE:
            writes_by_var[ev.var].append(i)

    get_of: dict[int, int] = {}
    for p, g in t.pairs("pb"):
        get_of[idx[p]] = idx[g]

    # last event of the message a get heads, for lifting execution order
    last_of_msg: dict[int, int] = {}
    for h, per_get in msgs.posted.items():
        for gid, m in per_get.items():
            last_of_msg[idx[gid]] = idx[m.events[-1]]

    co_given = {var for (k, s, d) in t.edges if k == "co"
                for var in (t.event(s).var,)}

    # static generating edges (acyclicity-equivalent to the closed relation)
    static: list[tuple[int, int]] = []
    for label in ("po", "rf", "pb"):
        static += [(idx[s], idx[d]) for s, d in norm.pairs(label)]
    rf_pairs = [(idx[s], idx[d]) for s, d in t.pairs("rf")]

    def fr_edges(co_chain_by_var: dict[str, list[int]]) -> list[tuple[int, int]]:
        nxt: dict[int, int] = {}
        for chain in co_chain_by_var.values():
            for a, b in zip(chain, chain[1:]):
                nxt[a] = b
        return [(r, nxt[w]) for w, r in rf_pairs if w in nxt]

    def co_sorted(var: str) -> list[int]:
        ws = writes_by_var[var]
        sub = {w: i for i, w in enumerate(ws)}
        pairs = [(sub[idx[s]], sub[idx[d]]) for s, d in t.pairs("co")
                 if t.event(s).var == var]
        order = graphcore.topo_order(len(ws), pairs)
        if order is None:  # pre-validated inputs never reach this
            raise OracleLimitExceeded(f"coherence order on {var} is cyclic")
        return [ws[i] for i in order]

    receivers = [h for h in t.handlers if posts_by_recv.get(h)]
    handlers_with_gets = [h for h in t.handlers if gets_by_handler.get(h)]
    free_co_vars = sorted(v for v in writes_by_var
                          if cfg.infer_co and v not in co_given and len(writes_by_var[v]) > 1)

    counts = [len(posts_by_recv[h]) for h in receivers]
    if cfg.strict_eo:
        counts += [len(gets_by_handler[h]) for h in handlers_with_gets]
    counts += [len(writes_by_var[v]) for v in free_co_vars]
    if _predict(counts) > cfg.max_assignments:
        raise OracleLimitExceeded(
            f"{_predict(counts)} assignments exceed the limit {cfg.max_assignments}")

    fixed_co = {var: co_sorted(var) for var in writes_by_var if var not in free_co_vars}
    deadline = None if timeout_ms is None else time.monotonic() + timeout_ms / 1000.0

    def mo_products():
        pools = [itertools.permutations(posts_by_recv[h]) for h in receivers]
        return itertools.product(*pools)

    def eo_products():
        if not cfg.strict_eo:
            return [None]
        pools = [itertools.permutations(gets_by_handler[h]) for h in handlers_with_gets]
        return itertools.product(*pools)

    def co_products():
        if not free_co_vars:
            return [()]
        pools = [itertools.permutations(writes_by_var[v]) for v in free_co_vars]
        return itertools.product(*pools)

    witnesses: list[Witness] = []
    n_events = len(t.events)
    explored = 0
    for co_choice in co_products():
        co_chains = dict(fixed_co)
        for var, perm in zip(free_co_vars, co_choice):
            co_chains[var] = list(perm)
        co_dyn = [(a, b) for chain in co_chains.values() for a, b in zip(chain, chain[1:])]
        base = static + co_dyn + fr_edges(co_chains)
        for mo_choice in mo_products():
            for eo_choice in eo_products():
                explored += 1
                if deadline is not None and explored % 256 == 0 \
                        and time.monotonic() > deadline:
                    return CheckResult(TIMEOUT, stats={"assignments": explored})
                edges = list(base)
                eo_chains: dict[str, list[int]] = {}
                for h, perm in zip(receivers, mo_choice):
                    edges += zip(perm, perm[1:])
                    matched = [get_of[p] for p in perm if p in get_of]
                    if cfg.strict_eo:
                        # queue order must still follow mo through pb
                        edges += zip(matched, matched[1:])
                    else:
                        eo_chains[h] = matched
                if cfg.strict_eo:
                    for h, perm in zip(handlers_with_gets, eo_choice):
                        eo_chains[h] = list(perm)
                for h, chain in eo_chains.items():
                    for g1, g2 in zip(chain, chain[1:]):
                        edges.append((last_of_msg.get(g1, g1), g2))
                order = graphcore.topo_order(n_events, edges)
                if order is None:
                    continue
                w = Witness(
                    mo={h: [t.events[p].eid for p in perm]
                        for h, perm in zip(receivers, mo_choice)},
                    eo={h: [t.events[g].eid for g in chain]
                        for h, chain in eo_chains.items()},
                    linearization=[t.events[i].eid for i in order],
                )
                if not cfg.all_witnesses:
                    return CheckResult(CONSISTENT, witness=w,
                                       stats={"assignments": explored})
                witnesses.append(w)
    if witnesses:
        return CheckResult(CONSISTENT, witness=witnesses[0],
                           all_witnesses=witnesses, stats={"assignments": explored})
    return CheckResult(INCONSISTENT, stats={"assignments": explored})
