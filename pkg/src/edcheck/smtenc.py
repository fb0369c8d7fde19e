"""Constraint encoding over per-event integer timestamps, SMT-LIB rendering,
and external solver dispatch.

Every event gets one integer timestamp.  The given relations (and the
derived from-reads) become strict inequalities; per handler every message
pair must execute serially (one whole-before-the-other disjunction); per
receiver every post pair is ordered one way or the other; and queue
discipline couples each post pair with its get pair (omit with
``fifo=False`` to reproduce the bare serial/post encoding for comparison).
A model is decoded by sorting events on timestamps, which yields the
witness directly.
"""

from __future__ import annotations

import os
import re
import shlex
import shutil
import subprocess
import sys
import time
from dataclasses import dataclass, field

from .model import (BACKEND_ERROR, CONSISTENT, INCONSISTENT, TIMEOUT, GET,
                    POST, CheckResult, TraceGraph, Witness, derived_fr,
                    extend_with_witness, hb_acyclic, normalize)
from .prep import prepare

Atom = tuple[str, str]  # (a, b) standing for t_a < t_b


@dataclass
class SolverQuery:
    events: list[str]
    hard_edges: list[Atom]
    serial_disjunctions: list[tuple[Atom, Atom]]
    post_disjunctions: list[tuple[Atom, Atom]]
    fifo_couplings: list[tuple[Atom, Atom]]


@dataclass
class SolverBackend:
    """External solver invocation: a command reading SMT-LIB2 from stdin and
    printing a check-sat answer plus a get-value model."""

    cmd: str
    name: str = ""


class EncodingError(Exception):
    pass


def encode(t: TraceGraph, fifo: bool = True) -> SolverQuery:
    prep = prepare(t)
    norm = prep.t
    hard: set[Atom] = set()
    for label in ("po", "rf", "co", "pb"):
        hard.update(norm.pairs(label))
    hard.update(derived_fr(t))
    hard = {(a, b) for a, b in hard if a != b}

    serial: list[tuple[Atom, Atom]] = []
    for h in t.handlers:
        msgs = [prep.msgs.initial[h]] if prep.msgs.initial[h].events else []
        msgs += [prep.msgs.posted[h][g] for g in sorted(
            prep.msgs.posted[h], key=lambda g: prep.idx[g])]
        for i in range(len(msgs)):
            for j in range(i + 1, len(msgs)):
                m1, m2 = msgs[i], msgs[j]
                serial.append(((m1.events[-1], m2.events[0]),
                               (m2.events[-1], m1.events[0])))

    posts: list[tuple[Atom, Atom]] = []
    couplings: list[tuple[Atom, Atom]] = []
    for h in prep.receivers:
        ps = prep.posts_by_recv[h]
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                p1, p2 = prep.eid(ps[i]), prep.eid(ps[j])
                posts.append(((p1, p2), (p2, p1)))
                g1, g2 = prep.get_of.get(ps[i]), prep.get_of.get(ps[j])
                if fifo and g1 is not None and g2 is not None:
                    couplings.append(((p1, p2), (prep.eid(g1), prep.eid(g2))))

    return SolverQuery([ev.eid for ev in t.events], sorted(hard),
                       serial, posts, couplings)


# -- rendering ----------------------------------------------------------------

_SIMPLE_SYM = re.compile(r"[A-Za-z0-9~!@$%^&*_\-+=<>.?/]+\Z")


def _sym(eid: str) -> str:
    name = f"t_{eid}"
    if _SIMPLE_SYM.match(name):
        return name
    if "|" in name or "\\" in name:
        raise EncodingError(f"event id {eid!r} cannot be an SMT symbol")
    return f"|{name}|"


def _lt(a: str, b: str) -> str:
    return f"(< {_sym(a)} {_sym(b)})"


def render_smtlib(q: SolverQuery) -> bytes:
    lines = ["(set-logic QF_IDL)"]
    lines += [f"(declare-const {_sym(e)} Int)" for e in q.events]
    lines += sorted(f"(assert {_lt(a, b)})" for a, b in q.hard_edges)
    lines += sorted(f"(assert (or {_lt(*d1)} {_lt(*d2)}))"
                    for d1, d2 in q.serial_disjunctions)
    lines += sorted(f"(assert (or {_lt(*d1)} {_lt(*d2)}))"
                    for d1, d2 in q.post_disjunctions)
    lines += sorted(f"(assert (= {_lt(*p)} {_lt(*g)}))"
                    for p, g in q.fifo_couplings)
    lines.append("(check-sat)")
    if q.events:
        lines.append(f"(get-value ({' '.join(_sym(e) for e in q.events)}))")
    return ("\n".join(lines) + "\n").encode("utf-8")


# -- backends -----------------------------------------------------------------

ENV_SOLVER_CMD = "EDCHECK_SOLVER_CMD"


def bundled_backend() -> SolverBackend:
    return SolverBackend(f"{shlex.quote(sys.executable)} -m edcheck.refsolver",
                         name="bundled")


def resolve_backend(cmd: str | None = None) -> SolverBackend:
    """Pick a solver: explicit command, then the environment override, then
    z3 when installed, then the bundled reference solver."""
    if cmd:
        return SolverBackend(cmd, name="explicit")
    env = os.environ.get(ENV_SOLVER_CMD)
    if env:
        return SolverBackend(env, name="env")
    if shutil.which("z3"):
        return SolverBackend("z3 -in", name="z3")
    return bundled_backend()


def _parse_model(text: str) -> dict[str, int]:
    """Read ((t_x 1) (t_y (- 2)) ...) blocks from solver output."""
    toks = re.findall(r"\(|\)|[^\s()]+", text)
    vals: dict[str, int] = {}
    i = 0

    def parse(i: int):
        if toks[i] != "(":
            return toks[i], i + 1
        out = []
        i += 1
        while i < len(toks) and toks[i] != ")":
            node, i = parse(i)
            out.append(node)
        return out, i + 1

    while i < len(toks):
        if toks[i] != "(":
            i += 1
            continue
        node, i = parse(i)
        for entry in node if isinstance(node, list) else []:
            if (isinstance(entry, list) and len(entry) == 2
                    and isinstance(entry[0], str)):
                name, val = entry
                if isinstance(val, list):
                    if len(val) == 2 and val[0] == "-":
                        val = "-" + val[1]
                    else:
                        continue
                try:
                    num = int(val)
                except ValueError:
                    continue
                sym = name.strip("|")
                if sym.startswith("t_"):
                    vals[sym[2:]] = num
    return vals


def check_smt(t: TraceGraph, backend: SolverBackend | None = None,
              timeout_ms: int | None = None, fifo: bool = True) -> CheckResult:
    backend = backend or resolve_backend()
    query = encode(t, fifo=fifo)
    doc = render_smtlib(query)
    argv = shlex.split(backend.cmd)
    t0 = time.monotonic()
    try:
        proc = subprocess.run(
            argv, input=doc, stdout=subprocess.PIPE, stderr=subprocess.PIPE,
            timeout=None if timeout_ms is None else timeout_ms / 1000.0)
    except FileNotFoundError:
        return CheckResult(BACKEND_ERROR, detail=f"solver binary not found: {argv[0]!r}")
    except subprocess.TimeoutExpired:
        return CheckResult(TIMEOUT, detail=f"solver exceeded {timeout_ms} ms")
    out = proc.stdout.decode("utf-8", "replace")
    status = next((ln.strip() for ln in out.splitlines()
                   if ln.strip() in ("sat", "unsat", "unknown")), None)
    if proc.returncode != 0 and status not in ("sat", "unsat"):
        err = proc.stderr.decode("utf-8", "replace").strip()
        return CheckResult(BACKEND_ERROR,
                           detail=f"solver exited {proc.returncode}: {err[:500]}")
    if status == "unsat":
        return CheckResult(INCONSISTENT,
                           stats={"solver_s": time.monotonic() - t0})
    if status != "sat":
        return CheckResult(BACKEND_ERROR, detail=f"unparsable solver output: {out[:200]!r}")

    stamps = _parse_model(out)
    missing = [e for e in query.events if e not in stamps]
    if missing:
        return CheckResult(BACKEND_ERROR,
                           detail=f"model lacks timestamps for {missing[:5]}")
    fileorder = {e: i for i, e in enumerate(query.events)}
    lin = sorted(query.events, key=lambda e: (stamps[e], fileorder[e]))
    pos = {e: i for i, e in enumerate(lin)}
    mo: dict[str, list[str]] = {}
    eo: dict[str, list[str]] = {}
    for ev in t.events:
        if ev.kind == POST:
            mo.setdefault(ev.receiver, []).append(ev.eid)
        elif ev.kind == GET:
            eo.setdefault(ev.handler, []).append(ev.eid)
    for group in (mo, eo):
        for h in group:
            group[h].sort(key=lambda e: pos[e])
    w = Witness(mo, eo, lin)
    if fifo:
        # a decoded witness must actually be one; anything else is an
        # encoder or solver defect, never an inconsistency verdict
        full = extend_with_witness(t, w)
        res = hb_acyclic(full)
        if not res.acyclic:
            return CheckResult(BACKEND_ERROR,
                               detail="decoded model does not satisfy happens-"
                                      f"before acyclicity (cycle {res.cycle})")
    return CheckResult(CONSISTENT, witness=w,
                       stats={"solver_s": time.monotonic() - t0})
