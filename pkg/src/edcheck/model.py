"""Core trace model: events, labelled relation graphs, validation, happens-before.

A trace is a set of read/write/post/get events plus labelled edges over six
relations.  Four of them (``po``, ``rf``, ``co``, ``pb``) are *given* in a
partial trace; the remaining two (``mo``, ``eo``) are what the checkers
search for.  A full trace fixes all six, and is consistent exactly when the
happens-before union (including the derived ``fr``, ``qo`` and lifted
execution order) is acyclic.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field, replace

from . import graphcore

# Event kinds and relation labels.
WRITE, READ, POST, GET = "write", "read", "post", "get"
KINDS = (WRITE, READ, POST, GET)

LABELS = ("po", "rf", "co", "pb", "mo", "eo")
STATIC_LABELS = frozenset({"po", "rf", "co", "pb"})
GUESSED_LABELS = frozenset({"mo", "eo"})

# Validation modes.
PARTIAL = "partial"
FULL = "full"


class TraceStructureError(Exception):
    """Raised when a graph is too malformed for structural derivation."""


@dataclass(frozen=True)
class Event:
    """One occurrence of a read, write, post or get.

    ``var``/``val`` are present exactly for reads/writes (``val`` only on
    writes) and ``receiver`` exactly for posts.
    """

    eid: str
    handler: str
    kind: str
    var: str | None = None
    val: int | None = None
    receiver: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        want_var = self.kind in (WRITE, READ)
        if (self.var is not None) != want_var:
            raise ValueError(f"event {self.eid}: var must be present iff read/write")
        if (self.val is not None) != (self.kind == WRITE):
            raise ValueError(f"event {self.eid}: val must be present iff write")
        if (self.receiver is not None) != (self.kind == POST):
            raise ValueError(f"event {self.eid}: receiver must be present iff post")


Edge = tuple[str, str, str]  # (label, src event id, dst event id)


class TraceGraph:
    """Events plus labelled edges; the object every checker consumes.

    Handlers and events keep their construction (file) order; that order is
    the tiebreaker everywhere determinism matters.  Instances are treated as
    immutable once built -- all operations below are pure functions.
    """

    def __init__(self, handlers=(), events=(), edges=()):
        self.handlers: list[str] = list(handlers)
        self.events: list[Event] = []
        self.edges: set[Edge] = set()
        self._index: dict[str, int] = {}
        for ev in events:
            self.add_event(ev)
        for e in edges:
            self.add_edge(*e)

    def add_handler(self, name: str) -> None:
        if name not in self.handlers:
            self.handlers.append(name)

    def add_event(self, ev: Event) -> None:
        if ev.eid in self._index:
            raise ValueError(f"duplicate event id {ev.eid!r}")
        self._index[ev.eid] = len(self.events)
        self.events.append(ev)
        self.add_handler(ev.handler)
        if ev.receiver is not None:
            self.add_handler(ev.receiver)

    def add_edge(self, label: str, src: str, dst: str) -> None:
        if label not in LABELS:
            raise ValueError(f"unknown edge label {label!r}")
        self.edges.add((label, src, dst))

    # -- lookups ------------------------------------------------------------

    def index(self, eid: str) -> int:
        return self._index[eid]

    def has_event(self, eid: str) -> bool:
        return eid in self._index

    def event(self, eid: str) -> Event:
        return self.events[self._index[eid]]

    def pairs(self, label: str) -> list[tuple[str, str]]:
        return [(s, d) for (k, s, d) in self.edges if k == label]

    def copy(self) -> "TraceGraph":
        return TraceGraph(self.handlers, self.events, self.edges)

    def __eq__(self, other):
        return (isinstance(other, TraceGraph)
                and self.handlers == other.handlers
                and self.events == other.events
                and self.edges == other.edges)

    def __repr__(self):
        return (f"TraceGraph({len(self.handlers)} handlers, "
                f"{len(self.events)} events, {len(self.edges)} edges)")


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    events: tuple[str, ...] = ()


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, message: str, *events: str) -> None:
        self.violations.append(Violation(code, message, tuple(events)))

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(f"{v.code}: {v.message}" for v in self.violations)


@dataclass
class Message:
    """One message instance: its get (None for the initial message) and its
    events in program order (the get first, when present)."""

    get: str | None
    events: list[str]


@dataclass
class MessageStructure:
    initial: dict[str, Message]            # handler -> initial message
    posted: dict[str, dict[str, Message]]  # handler -> get id -> message

    def message_of(self, t: TraceGraph, eid: str) -> Message:
        ev = t.event(eid)
        for m in [self.initial[ev.handler], *self.posted[ev.handler].values()]:
            if eid in m.events:
                return m
        raise KeyError(eid)


@dataclass
class Witness:
    """A concrete mo/eo assignment plus a linearization that realises it."""

    mo: dict[str, list[str]]  # receiver handler -> post ids in message order
    eo: dict[str, list[str]]  # handler -> get ids in execution order
    linearization: list[str]


@dataclass
class HbResult:
    acyclic: bool
    linearization: list[str] | None = None
    cycle: list[str] | None = None


# Check verdicts shared by every checker.
CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"
TIMEOUT = "timeout"
BACKEND_ERROR = "backend-error"


@dataclass
class CheckResult:
    verdict: str
    witness: Witness | None = None
    detail: str = ""
    stats: dict = field(default_factory=dict)
    all_witnesses: list[Witness] | None = None

    @property
    def consistent(self) -> bool:
        return self.verdict == CONSISTENT


# ---------------------------------------------------------------------------
# Relation helpers (index-pair based)
# ---------------------------------------------------------------------------


def _closure(pairs: set[tuple[int, int]]) -> set[tuple[int, int]]:
    """Transitive closure of an index-pair relation (Floyd-Warshall on the
    touched nodes only)."""
    succ: dict[int, set[int]] = defaultdict(set)
    for a, b in pairs:
        succ[a].add(b)
    out = set(pairs)
    changed = True
    while changed:
        changed = False
        for a in list(succ):
            new = set()
            for b in succ[a]:
                new.update(succ.get(b, ()))
            new -= succ[a]
            if new:
                succ[a] |= new
                changed = True
    return {(a, b) for a, bs in succ.items() for b in bs}


def _label_pairs_idx(t: TraceGraph, label: str) -> set[tuple[int, int]]:
    return {(t.index(s), t.index(d)) for (k, s, d) in t.edges if k == label}


def _is_total_order(members: list[int], pairs: set[tuple[int, int]]):
    """Check a closed relation restricted to ``members`` is a strict total
    order; return the sorted member list or None."""
    for a in members:
        if (a, a) in pairs:
            return None
    for a, b in itertools.combinations(members, 2):
        if ((a, b) in pairs) == ((b, a) in pairs):
            return None
    # n log n sort is safe once antisymmetry and totality hold
    import functools

    return sorted(members, key=functools.cmp_to_key(
        lambda a, b: -1 if (a, b) in pairs else (1 if a != b else 0)))


# ---------------------------------------------------------------------------
# Normalisation
# ---------------------------------------------------------------------------


def normalize(t: TraceGraph, strict: bool = False) -> TraceGraph:
    """Close ``po`` transitively and, unless ``strict``, insert the mandatory
    program-order edges from initial-message events to every get of the same
    handler when a file omitted them."""
    out = t.copy()
    po = _label_pairs_idx(out, "po")
    po = _closure(po)
    if not strict:
        by_handler: dict[str, list[int]] = defaultdict(list)
        for i, ev in enumerate(out.events):
            by_handler[ev.handler].append(i)
        get_desc: dict[int, set[int]] = defaultdict(set)
        for a, b in po:
            if out.events[a].kind == GET:
                get_desc[b].add(a)
        for h, members in by_handler.items():
            gets = [i for i in members if out.events[i].kind == GET]
            initial = [i for i in members
                       if out.events[i].kind != GET and not get_desc[i]]
            for a in initial:
                for g in gets:
                    po.add((a, g))
        po = _closure(po)
    out.edges = {e for e in out.edges if e[0] != "po"}
    for a, b in po:
        out.add_edge("po", out.events[a].eid, out.events[b].eid)
    return out


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate(t: TraceGraph, mode: str = PARTIAL, strict: bool = False) -> ValidationReport:
    """Check the trace conditions.  Pure: never mutates or repairs ``t``
    itself (repair happens on an internal normalised copy; ``strict``
    disables it and reports missing initial-before-get edges instead)."""
    rep = ValidationReport()
    if mode not in (PARTIAL, FULL):
        raise ValueError(f"unknown validation mode {mode!r}")

    # Structural pass on the raw graph.
    known = {ev.eid for ev in t.events}
    handlers = set(t.handlers)
    for ev in t.events:
        if ev.handler not in handlers:
            rep.add("unknown-handler", f"event {ev.eid} on undeclared handler", ev.eid)
    for (k, s, d) in sorted(t.edges):
        if s not in known or d not in known:
            rep.add("dangling-endpoint", f"{k} edge {s}->{d} references a missing event", s, d)
    if not rep.ok:
        return rep

    for (k, s, d) in sorted(t.edges):
        es, ed = t.event(s), t.event(d)
        bad = None
        if k == "rf" and not (es.kind == WRITE and ed.kind == READ and es.var == ed.var):
            bad = "rf must go write->read on one variable"
        elif k == "co" and not (es.kind == WRITE and ed.kind == WRITE and es.var == ed.var):
            bad = "co must relate writes on one variable"
        elif k == "pb" and not (es.kind == POST and ed.kind == GET and es.receiver == ed.handler):
            bad = "pb must pair a post with a get on the posted-to handler"
        elif k == "po" and es.handler != ed.handler:
            bad = "po must stay within one handler"
        elif k == "mo" and not (es.kind == POST and ed.kind == POST and es.receiver == ed.receiver):
            bad = "mo must relate posts with one receiver"
        elif k == "eo" and not (es.kind == GET and ed.kind == GET and es.handler == ed.handler):
            bad = "eo must relate gets on one handler"
        if bad:
            rep.add("edge-kind-mismatch", f"{k} edge {s}->{d}: {bad}", s, d)
    if not rep.ok:
        return rep

    if mode == PARTIAL:
        for (k, s, d) in sorted(t.edges):
            if k in GUESSED_LABELS:
                rep.add("guessed-edges-in-partial",
                        f"{k} edge {s}->{d} not allowed in a partial trace", s, d)

    # rf functionality.
    rf_in: dict[str, list[str]] = defaultdict(list)
    for s, d in t.pairs("rf"):
        rf_in[d].append(s)
    for ev in t.events:
        srcs = rf_in.get(ev.eid, [])
        if len(srcs) > 1:
            rep.add("rf-not-functional", f"read {ev.eid} has {len(srcs)} rf sources", ev.eid)
        if mode == FULL and ev.kind == READ and not srcs:
            rep.add("read-without-rf", f"read {ev.eid} has no rf source", ev.eid)

    # Program order structure, on the normalised copy.
    norm = normalize(t, strict=strict)
    po = _label_pairs_idx(norm, "po")
    by_handler: dict[str, list[int]] = defaultdict(list)
    for i, ev in enumerate(t.events):
        by_handler[ev.handler].append(i)

    for i, ev in enumerate(t.events):
        if (i, i) in po:
            rep.add("po-cyclic", f"program order cycles through {ev.eid}", ev.eid)
    if any(v.code == "po-cyclic" for v in rep.violations):
        return rep

    get_anc: dict[int, list[int]] = defaultdict(list)
    for a, b in po:
        if t.events[a].kind == GET:
            get_anc[b].append(a)
    for h, members in by_handler.items():
        gets = [i for i in members if t.events[i].kind == GET]
        initial = []
        for i in members:
            ev = t.events[i]
            if ev.kind == GET:
                ancs = get_anc[i]
                if ancs:
                    rep.add("po-into-get",
                            f"get {ev.eid} has a program-order predecessor get", ev.eid)
                continue
            ancs = get_anc[i]
            if len(ancs) > 1:
                rep.add("multiple-get-ancestors",
                        f"event {ev.eid} sits in more than one message", ev.eid)
            elif not ancs:
                initial.append(i)
        # per-message totality
        msgs = [initial] + [[g] + [i for i in members
                                   if t.events[i].kind != GET and get_anc[i] == [g]]
                            for g in gets]
        for msg in msgs:
            if _is_total_order(msg, po) is None:
                ids = [t.events[i].eid for i in msg]
                rep.add("message-order-incomplete",
                        f"events of one message not totally ordered: {ids}", *ids)
        if strict:
            for a in initial:
                for g in gets:
                    if (a, g) not in po:
                        rep.add("initial-not-first",
                                f"initial event {t.events[a].eid} not ordered before "
                                f"get {t.events[g].eid}",
                                t.events[a].eid, t.events[g].eid)

    # Coherence: strict total order per variable after closure.
    co = _closure(_label_pairs_idx(t, "co"))
    writes_by_var: dict[str, list[int]] = defaultdict(list)
    for i, ev in enumerate(t.events):
        if ev.kind == WRITE:
            writes_by_var[ev.var].append(i)
    for var, ws in sorted(writes_by_var.items()):
        if any((w, w) in co for w in ws):
            rep.add("co-cyclic", f"coherence order on {var} is cyclic")
        elif _is_total_order(ws, co) is None:
            rep.add("co-not-total", f"coherence order on {var} is not total")

    # Posted-by.
    pb_out: dict[str, list[str]] = defaultdict(list)
    pb_in: dict[str, list[str]] = defaultdict(list)
    for s, d in t.pairs("pb"):
        pb_out[s].append(d)
        pb_in[d].append(s)
    for ev in t.events:
        if ev.kind == POST and len(pb_out.get(ev.eid, [])) > 1:
            rep.add("pb-not-injective", f"post {ev.eid} pairs with several gets", ev.eid)
        if ev.kind == GET:
            n = len(pb_in.get(ev.eid, []))
            if n > 1:
                rep.add("pb-not-injective", f"get {ev.eid} has several posting events", ev.eid)
            elif n == 0:
                rep.add("get-without-pb", f"get {ev.eid} has no posting event", ev.eid)
        if mode == FULL and ev.kind == POST and not pb_out.get(ev.eid):
            rep.add("post-without-get", f"post {ev.eid} has no matching get", ev.eid)

    if mode == FULL:
        mo = _closure(_label_pairs_idx(t, "mo"))
        posts_by_recv: dict[str, list[int]] = defaultdict(list)
        for i, ev in enumerate(t.events):
            if ev.kind == POST:
                posts_by_recv[ev.receiver].append(i)
        for h, ps in sorted(posts_by_recv.items()):
            if any((p, p) in mo for p in ps) or _is_total_order(ps, mo) is None:
                rep.add("mo-not-total", f"message order for posts to {h} is not a total order")
        eo = _closure(_label_pairs_idx(t, "eo"))
        for h in t.handlers:
            gs = [i for i, ev in enumerate(t.events)
                  if ev.kind == GET and ev.handler == h]
            if any((g, g) in eo for g in gs) or _is_total_order(gs, eo) is None:
                rep.add("eo-not-total", f"execution order of gets on {h} is not a total order")

    return rep


# ---------------------------------------------------------------------------
# Message structure
# ---------------------------------------------------------------------------


def derive_messages(t: TraceGraph) -> MessageStructure:
    """Partition each handler's events into its initial message and one
    message per get, each ordered by program order."""
    norm = normalize(t)
    po = _label_pairs_idx(norm, "po")
    initial: dict[str, Message] = {}
    posted: dict[str, dict[str, Message]] = {}
    by_handler: dict[str, list[int]] = defaultdict(list)
    for i, ev in enumerate(t.events):
        by_handler[ev.handler].append(i)
    for h in t.handlers:
        members = by_handler.get(h, [])
        gets = [i for i in members if t.events[i].kind == GET]
        init_members, owner = [], {}
        for i in members:
            if t.events[i].kind == GET:
                continue
            ancs = [g for g in gets if (g, i) in po]
            if len(ancs) > 1:
                # nearest ancestor must be unique and po-maximal among them
                ancs = [g for g in ancs if all(g == g2 or (g2, g) in po for g2 in ancs)]
                if len(ancs) != 1:
                    raise TraceStructureError(
                        f"event {t.events[i].eid} has unrelated get ancestors")
            if ancs:
                owner[i] = ancs[0]
            else:
                init_members.append(i)
        order = _is_total_order(init_members, po)
        if order is None:
            raise TraceStructureError(f"initial message of {h} is not totally ordered")
        initial[h] = Message(None, [t.events[i].eid for i in order])
        posted[h] = {}
        for g in gets:
            body = [i for i in members if owner.get(i) == g]
            order = _is_total_order([g] + body, po)
            if order is None:
                raise TraceStructureError(
                    f"message of get {t.events[g].eid} is not totally ordered")
            posted[h][t.events[g].eid] = Message(
                t.events[g].eid, [t.events[i].eid for i in order])
    return MessageStructure(initial, posted)


# ---------------------------------------------------------------------------
# Derived relations
# ---------------------------------------------------------------------------


def derived_fr(t: TraceGraph) -> set[tuple[str, str]]:
    """From-reads: a read precedes every write that coherence-overwrites the
    write it observed (rf inverse composed with the co closure)."""
    co = _closure(_label_pairs_idx(t, "co"))
    out = set()
    for w, r in t.pairs("rf"):
        wi = t.index(w)
        for (a, b) in co:
            if a == wi:
                out.add((r, t.events[b].eid))
    return out


def derived_qo(t: TraceGraph, mo: set[tuple[str, str]]) -> set[tuple[str, str]]:
    """Queue order: transfer of message order from posts to their gets."""
    get_of = {}
    for p, g in t.pairs("pb"):
        get_of[p] = g
    return {(get_of[p1], get_of[p2]) for (p1, p2) in mo
            if p1 in get_of and p2 in get_of}


def derived_eo_dagger(t: TraceGraph, eo: set[tuple[str, str]]) -> set[tuple[str, str]]:
    """Lift execution order from gets to every event of the two messages."""
    norm = normalize(t)
    po = _label_pairs_idx(norm, "po")
    desc: dict[int, list[int]] = defaultdict(list)
    for a, b in po:
        desc[a].append(b)
    out = set()
    for g1, g2 in eo:
        i1, i2 = t.index(g1), t.index(g2)
        left = [i1] + desc[i1]
        right = [i2] + desc[i2]
        for a in left:
            for b in right:
                out.add((t.events[a].eid, t.events[b].eid))
    return out


def hb_edges(t: TraceGraph,
             mo_pairs: set[tuple[str, str]],
             eo_pairs: set[tuple[str, str]]) -> set[tuple[str, str]]:
    """The full happens-before edge set for a given mo/eo assignment."""
    norm = normalize(t)
    out: set[tuple[str, str]] = set()
    for label in ("po", "rf", "co", "pb"):
        out |= set(norm.pairs(label))
    out |= derived_fr(t)
    out |= mo_pairs
    out |= derived_eo_dagger(t, eo_pairs)
    out |= derived_qo(t, mo_pairs)
    return out


def hb_acyclic(t: TraceGraph) -> HbResult:
    """Decide consistency of a full trace (mo and eo edges included).

    Returns a witness linearization when acyclic, otherwise one shortest
    cycle found by breadth-first search.
    """
    mo = _closure(_label_pairs_idx(t, "mo"))
    eo = _closure(_label_pairs_idx(t, "eo"))
    ids = lambda pairs: {(t.events[a].eid, t.events[b].eid) for a, b in pairs}
    hb = hb_edges(t, ids(mo), ids(eo))
    n = len(t.events)
    idx_edges = [(t.index(a), t.index(b)) for a, b in hb if a != b]
    order = graphcore.topo_order(n, idx_edges)
    if order is not None:
        return HbResult(True, linearization=[t.events[i].eid for i in order])
    cyc = graphcore.find_short_cycle(n, idx_edges)
    return HbResult(False, cycle=[t.events[i].eid for i in cyc])


def extend_with_witness(t: TraceGraph, w: Witness) -> TraceGraph:
    """Return the full trace obtained by adding the witness's mo/eo chains."""
    out = t.copy()
    for h, posts in w.mo.items():
        for a, b in zip(posts, posts[1:]):
            out.add_edge("mo", a, b)
    for h, gets in w.eo.items():
        for a, b in zip(gets, gets[1:]):
            out.add_edge("eo", a, b)
    return out


def witness_respected(t: TraceGraph, w: Witness) -> bool:
    """Replay the witness linearization and check it violates no hb edge."""
    full = extend_with_witness(t, w)
    mo = _closure(_label_pairs_idx(full, "mo"))
    eo = _closure(_label_pairs_idx(full, "eo"))
    ids = lambda pairs: {(t.events[a].eid, t.events[b].eid) for a, b in pairs}
    hb = hb_edges(t, ids(mo), ids(eo))
    pos = {eid: i for i, eid in enumerate(w.linearization)}
    if len(pos) != len(t.events):
        return False
    return all(pos[a] < pos[b] for a, b in hb if a != b)
