"""Shared per-trace precomputation for the checkers.

Index-based views of a partial trace: message structure, post/get matching,
and a generating happens-before edge list that is acyclicity-equivalent to
the closed static relation (message chains instead of full program order,
coherence chains instead of the closed coherence order, immediate
overwrite edges instead of full from-reads).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .model import (GET, POST, WRITE, MessageStructure, TraceGraph,
                    derive_messages, normalize)


@dataclass
class Prep:
    t: TraceGraph                       # normalized copy
    raw: TraceGraph                     # the caller's graph
    n: int
    idx: dict[str, int]
    msgs: MessageStructure
    posts_by_recv: dict[str, list[int]]     # receiver -> post indices, file order
    gets_by_handler: dict[str, list[int]]
    get_of: dict[int, int]                  # post -> its get
    post_of: dict[int, int]                 # get -> its post
    last_of_msg: dict[int, int]             # get -> last event of its message
    static_edges: list[tuple[int, int]]
    receivers: list[str] = field(default_factory=list)

    def eid(self, i: int) -> str:
        return self.raw.events[i].eid


def prepare(t: TraceGraph) -> Prep:
    norm = normalize(t)
    idx = {ev.eid: i for i, ev in enumerate(t.events)}
    msgs = derive_messages(norm)

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

    get_of, post_of = {}, {}
    for p, g in t.pairs("pb"):
        get_of[idx[p]] = idx[g]
        post_of[idx[g]] = idx[p]

    last_of_msg: dict[int, int] = {}
    static: list[tuple[int, int]] = []
    for h in t.handlers:
        init = msgs.initial[h]
        chain = [idx[e] for e in init.events]
        static += zip(chain, chain[1:])
        for gid, m in msgs.posted[h].items():
            body = [idx[e] for e in m.events]
            static += zip(body, body[1:])
            last_of_msg[idx[gid]] = body[-1]
            if chain:
                static.append((chain[-1], body[0]))

    static += [(idx[s], idx[d]) for s, d in t.pairs("rf")]
    static += [(idx[s], idx[d]) for s, d in t.pairs("pb")]

    # coherence chains per variable (validated total, so a topological sort
    # of the given edges is the order) and immediate-overwrite edges
    from . import graphcore
    co_next: dict[int, int] = {}
    for var, ws in writes_by_var.items():
        sub = {w: i for i, w in enumerate(ws)}
        pairs = [(sub[idx[s]], sub[idx[d]]) for s, d in t.pairs("co")
                 if t.event(s).var == var]
        order = graphcore.topo_order(len(ws), pairs)
        if order is None:
            order = list(range(len(ws)))
        chain = [ws[i] for i in order]
        static += zip(chain, chain[1:])
        for a, b in zip(chain, chain[1:]):
            co_next[a] = b
    for s, d in t.pairs("rf"):
        w = idx[s]
        if w in co_next:
            static.append((idx[d], co_next[w]))  # from-reads, generating form

    receivers = [h for h in t.handlers if posts_by_recv.get(h)]
    return Prep(norm, t, len(t.events), idx, msgs, posts_by_recv,
                gets_by_handler, get_of, post_of, last_of_msg,
                sorted(set(static)), receivers)


def fifo_dynamic_edges(prep: Prep, mo: dict[str, list[int]]) -> list[tuple[int, int]]:
    """Message-order chains plus the execution-order lift they force under
    queue semantics."""
    edges: list[tuple[int, int]] = []
    for h, perm in mo.items():
        edges += zip(perm, perm[1:])
        matched = [prep.get_of[p] for p in perm if p in prep.get_of]
        for g1, g2 in zip(matched, matched[1:]):
            edges.append((prep.last_of_msg.get(g1, g1), g2))
    return edges
