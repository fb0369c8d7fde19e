"""Trace and witness files.

Traces are UTF-8 JSON documents with three top-level keys::

    {"handlers": ["h1", ...],
     "events":   [{"id": "e1", "handler": "h1", "kind": "write",
                   "var": "x", "val": 3}, ...],
     "edges":    [{"kind": "po", "src": "e1", "dst": "e2"}, ...]}

Serialisation is canonical: object keys sorted, handlers and events in
construction order, edges sorted by (kind, src, dst), one trailing newline.
Parsing is strict -- unknown keys, duplicate ids and unknown edge kinds are
errors, and semantic validation is deliberately left to the caller.
"""

from __future__ import annotations

import json

from .model import (GUESSED_LABELS, LABELS, Event, TraceGraph, Witness)


class TraceParseError(Exception):
    """Malformed trace or witness document."""


_EVENT_KEYS = {"id", "handler", "kind", "var", "val", "receiver"}
_EDGE_KEYS = {"kind", "src", "dst"}


def _require_keys(obj: dict, allowed: set[str], what: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise TraceParseError(f"unknown keys in {what}: {sorted(extra)}")


def parse_trace(data: bytes | str, require_partial: bool = False) -> TraceGraph:
    """Parse a trace document.  With ``require_partial`` any mo/eo edge is
    rejected up front (consumers asking for a partial trace)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise TraceParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise TraceParseError("top level must be an object")
    _require_keys(doc, {"handlers", "events", "edges"}, "trace document")
    for key in ("handlers", "events", "edges"):
        if key not in doc or not isinstance(doc[key], list):
            raise TraceParseError(f"missing or non-array key {key!r}")

    t = TraceGraph()
    for h in doc["handlers"]:
        if not isinstance(h, str):
            raise TraceParseError("handler names must be strings")
        if h in t.handlers:
            raise TraceParseError(f"duplicate handler {h!r}")
        t.add_handler(h)

    for i, obj in enumerate(doc["events"]):
        if not isinstance(obj, dict):
            raise TraceParseError(f"event #{i} is not an object")
        _require_keys(obj, _EVENT_KEYS, f"event #{i}")
        try:
            eid = obj["id"]
            handler = obj["handler"]
            kind = obj["kind"]
        except KeyError as exc:
            raise TraceParseError(f"event #{i} missing key {exc}") from exc
        val = obj.get("val")
        if val is not None and (not isinstance(val, int) or isinstance(val, bool)):
            raise TraceParseError(f"event {eid!r}: val must be an integer")
        if handler not in t.handlers:
            raise TraceParseError(f"event {eid!r}: unknown handler {handler!r}")
        recv = obj.get("receiver")
        if recv is not None and recv not in t.handlers:
            raise TraceParseError(f"event {eid!r}: unknown receiver {recv!r}")
        try:
            ev = Event(eid, handler, kind, obj.get("var"), val, recv)
        except ValueError as exc:
            raise TraceParseError(str(exc)) from exc
        if t.has_event(eid):
            raise TraceParseError(f"duplicate event id {eid!r}")
        t.add_event(ev)

    for i, obj in enumerate(doc["edges"]):
        if not isinstance(obj, dict):
            raise TraceParseError(f"edge #{i} is not an object")
        _require_keys(obj, _EDGE_KEYS, f"edge #{i}")
        try:
            kind, src, dst = obj["kind"], obj["src"], obj["dst"]
        except KeyError as exc:
            raise TraceParseError(f"edge #{i} missing key {exc}") from exc
        if kind not in LABELS:
            raise TraceParseError(f"unknown edge kind {kind!r}")
        if require_partial and kind in GUESSED_LABELS:
            raise TraceParseError(
                f"edge #{i}: {kind} edges are not allowed in a partial trace")
        if not t.has_event(src) or not t.has_event(dst):
            raise TraceParseError(f"edge #{i} references a missing event")
        t.add_edge(kind, src, dst)
    return t


def _dump(doc) -> bytes:
    return (json.dumps(doc, sort_keys=True) + "\n").encode("utf-8")


def serialize_trace(t: TraceGraph) -> bytes:
    events = []
    for ev in t.events:
        obj = {"id": ev.eid, "handler": ev.handler, "kind": ev.kind}
        if ev.var is not None:
            obj["var"] = ev.var
        if ev.val is not None:
            obj["val"] = ev.val
        if ev.receiver is not None:
            obj["receiver"] = ev.receiver
        events.append(obj)
    edges = [{"kind": k, "src": s, "dst": d} for (k, s, d) in sorted(t.edges)]
    return _dump({"handlers": t.handlers, "events": events, "edges": edges})


def load_trace(path, require_partial: bool = False) -> TraceGraph:
    with open(path, "rb") as fh:
        return parse_trace(fh.read(), require_partial=require_partial)


def save_trace(path, t: TraceGraph) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_trace(t))


# -- witnesses --------------------------------------------------------------


def serialize_witness(w: Witness) -> bytes:
    return _dump({
        "mo": {h: list(ps) for h, ps in sorted(w.mo.items())},
        "eo": {h: list(gs) for h, gs in sorted(w.eo.items())},
        "linearization": list(w.linearization),
    })


def parse_witness(data: bytes | str) -> Witness:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise TraceParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise TraceParseError("top level must be an object")
    _require_keys(doc, {"mo", "eo", "linearization"}, "witness document")
    try:
        return Witness(dict(doc["mo"]), dict(doc["eo"]), list(doc["linearization"]))
    except (KeyError, TypeError) as exc:
        raise TraceParseError(f"malformed witness: {exc}") from exc


def save_witness(path, w: Witness) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_witness(w))
