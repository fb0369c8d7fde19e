"""Trace corpus generators.

``random_partial_trace`` produces small valid partial traces (well-formed
post/get matching, functional reads-from, total coherence per variable)
with deliberately random rf/co wiring, so verdicts come out mixed; the
equivalence suites run every checker against the brute-force reference on
them.  The remaining builders construct the fixed families used by the
scaling and fixture tests.
"""

from __future__ import annotations

import random

from .model import Event, TraceGraph


def random_partial_trace(rng: random.Random, max_events: int = 10,
                         max_handlers: int = 4, nested: bool = True) -> TraceGraph:
    """One random valid partial trace with at most ``max_events`` events.

    With ``nested`` False every post is placed in an initial message, which
    keeps the trace inside the no-nesting fragment.
    """
    t = TraceGraph()
    n_handlers = rng.randint(1, max_handlers)
    handlers = [f"h{i + 1}" for i in range(n_handlers)]
    for h in handlers:
        t.add_handler(h)

    # messages as (handler, [event ids]); index 0..n_handlers-1 are initial
    messages: list[tuple[str, list[str]]] = [(h, []) for h in handlers]
    initial_count = len(messages)
    counter = 0

    def fresh(kind: str, handler: str, **kw) -> str:
        nonlocal counter
        counter += 1
        eid = f"e{counter}"
        t.add_event(Event(eid, handler, kind, **kw))
        return eid

    budget = rng.randint(0, max_events)
    variables = [f"x{i}" for i in range(1, 4)]
    writes: dict[str, list[str]] = {v: [] for v in variables}

    while counter < budget:
        room = budget - counter
        if room >= 2 and rng.random() < 0.4:
            # spawn a message: a post somewhere plus its get on the receiver
            src_pool = (range(len(messages)) if nested else range(initial_count))
            mi = rng.choice(list(src_pool))
            src_handler, src_events = messages[mi]
            recv = rng.choice(handlers)
            p = fresh("post", src_handler, receiver=recv)
            src_events.append(p)
            g = fresh("get", recv)
            messages.append((recv, [g]))
            t.add_edge("pb", p, g)
        else:
            mi = rng.randrange(len(messages))
            h, evs = messages[mi]
            var = rng.choice(variables)
            if writes[var] and rng.random() < 0.5:
                r = fresh("read", h, var=var)
                evs.append(r)
                t.add_edge("rf", rng.choice(writes[var]), r)
            else:
                w = fresh("write", h, var=var, val=rng.randint(0, 9))
                evs.append(w)
                writes[var].append(w)

    # program order: chains per message, initial events before every get
    for mi, (h, evs) in enumerate(messages):
        for a, b in zip(evs, evs[1:]):
            t.add_edge("po", a, b)
    for h in handlers:
        init_events = next(evs for hh, evs in messages[:initial_count] if hh == h)
        gets = [evs[0] for hh, evs in messages[initial_count:] if hh == h]
        if init_events:
            for g in gets:
                t.add_edge("po", init_events[-1], g)

    # coherence: a random total order per variable
    for var, ws in writes.items():
        order = list(ws)
        rng.shuffle(order)
        for a, b in zip(order, order[1:]):
            t.add_edge("co", a, b)
    return t


# ---------------------------------------------------------------------------
# Fixture families
# ---------------------------------------------------------------------------


def sorting_fixture(final_order: tuple[str, ...] = ("m2", "m1", "m3")) -> TraceGraph:
    """The three-chain nested-posting shuffle: m1 routed h1,h2,h3 and m2/m3
    routed h1,h3,h2, all landing back in h1's mailbox.  rf edges between the
    inner message bodies force the requested arrival order.
    """
    t = TraceGraph()
    for h in ("h0", "h1", "h2", "h3"):
        t.add_handler(h)

    def post(eid, h, recv):
        t.add_event(Event(eid, h, "post", receiver=recv))
        return eid

    def get(eid, h):
        t.add_event(Event(eid, h, "get"))
        return eid

    routes = {"m1": ("h2", "h3"), "m2": ("h3", "h2"), "m3": ("h3", "h2")}
    seeds = []
    for m, (mid1, mid2) in routes.items():
        seeds.append(post(f"seed_{m}", "h0", "h1"))
        g1 = get(f"{m}_hop1_get", "h1")
        p1 = post(f"{m}_hop1_post", "h1", mid1)
        g2 = get(f"{m}_hop2_get", mid1)
        p2 = post(f"{m}_hop2_post", mid1, mid2)
        g3 = get(f"{m}_hop3_get", mid2)
        p3 = post(f"{m}_hop3_post", mid2, "h1")
        gi = get(f"{m}_get", "h1")
        t.add_edge("pb", f"seed_{m}", g1)
        t.add_edge("po", g1, p1)
        t.add_edge("pb", p1, g2)
        t.add_edge("po", g2, p2)
        t.add_edge("pb", p2, g3)
        t.add_edge("po", g3, p3)
        t.add_edge("pb", p3, gi)
    for a, b in zip(seeds, seeds[1:]):
        t.add_edge("po", a, b)

    # force the arrival order with write/read pairs between inner bodies
    for i, (ma, mb) in enumerate(zip(final_order, final_order[1:])):
        var = f"v{i}"
        w = f"{ma}_w{i}"
        r = f"{mb}_r{i}"
        t.add_event(Event(w, "h1", "write", var=var, val=1))
        t.add_event(Event(r, "h1", "read", var=var))
        t.add_edge("po", f"{ma}_get", w)
        t.add_edge("po", f"{mb}_get", r)
        t.add_edge("rf", w, r)
    return t


def enum_explosion_trace(sources: int = 4, per_source: int = 8) -> TraceGraph:
    """Many independent post streams into one mailbox: trivially consistent,
    but the per-receiver interleaving count is astronomical."""
    t = TraceGraph()
    t.add_handler("sink")
    for s in range(sources):
        h = f"src{s + 1}"
        t.add_handler(h)
        prev = None
        for k in range(per_source):
            p = f"p_{h}_{k + 1}"
            g = f"g_{h}_{k + 1}"
            t.add_event(Event(p, h, "post", receiver="sink"))
            t.add_event(Event(g, "sink", "get"))
            t.add_edge("pb", p, g)
            if prev:
                t.add_edge("po", prev, p)
            prev = p
    return t


def nonest_chain_trace(n_events: int) -> TraceGraph:
    """No-nesting family on three handlers: h1 streams messages to h2 and h2
    streams to h3, with write/read pairs tying each message to its sender.
    Event count scales linearly and the trace is always consistent."""
    t = TraceGraph()
    for h in ("h1", "h2", "h3"):
        t.add_handler(h)
    k = max(1, n_events // 8)  # 8 events per round
    prev1 = prev2 = None
    for i in range(1, k + 1):
        w1, p1 = f"h1_w{i}", f"h1_p{i}"
        g2, r2 = f"h2_g{i}", f"h2_r{i}"
        w2, p2 = f"h2_w{i}", f"h2_p{i}"
        g3, r3 = f"h3_g{i}", f"h3_r{i}"
        t.add_event(Event(w1, "h1", "write", var=f"a{i}", val=i))
        t.add_event(Event(p1, "h1", "post", receiver="h2"))
        t.add_event(Event(g2, "h2", "get"))
        t.add_event(Event(r2, "h2", "read", var=f"a{i}"))
        t.add_event(Event(w2, "h2", "write", var=f"b{i}", val=i))
        t.add_event(Event(p2, "h2", "post", receiver="h3"))
        t.add_event(Event(g3, "h3", "get"))
        t.add_event(Event(r3, "h3", "read", var=f"b{i}"))
        t.add_edge("po", w1, p1)
        if prev1:
            t.add_edge("po", prev1, w1)
        prev1 = p1
        t.add_edge("pb", p1, g2)
        t.add_edge("po", g2, r2)
        t.add_edge("rf", w1, r2)
        t.add_edge("po", w2, p2)
        if prev2:
            t.add_edge("po", prev2, w2)
        prev2 = p2
        t.add_edge("pb", p2, g3)
        t.add_edge("po", g3, r3)
        t.add_edge("rf", w2, r3)
    return t
