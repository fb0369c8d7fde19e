"""Operational interpreter: FIFO mailboxes, pluggable schedulers, and trace
extraction from recorded runs.

Each handler owns a register valuation, a FIFO mailbox, a program counter,
the id of its active message and a counter minting fresh message ids.
Handlers start executing their initial message with id ``(h, 0)``; a handler
sitting on ``last`` with a nonempty mailbox performs a get, dequeueing the
oldest message and jumping to its first instruction.  A run ends when no
handler is enabled (every handler stuck on ``last`` with an empty mailbox)
or when the step budget runs out.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .model import Event, TraceGraph, GET, POST, READ, WRITE
from .programs import (Goto, IfGoto, Last, PostMsg, Program, ReadVar, SetReg,
                       WriteVar, eval_exp)


class ScheduleError(Exception):
    """A replay schedule named a handler with no enabled transition."""


Mid = tuple[str, int]


@dataclass(frozen=True)
class RunEvent:
    """One recorded event transition, with the message-id bookkeeping the
    trace extraction needs."""

    handler: str
    kind: str
    var: str | None = None
    val: int | None = None
    receiver: str | None = None
    mid: Mid = ("", 0)
    newmid: Mid | None = None   # posts only: the id minted for the message
    msg: str | None = None      # gets/posts only: the message name involved


@dataclass
class HandlerState:
    regs: dict[str, int]
    mailbox: deque  # of (msg name, Mid)
    line: tuple[str, int]  # (message name, instruction index)
    mid: Mid
    mcount: int

    def clone(self) -> "HandlerState":
        return HandlerState(dict(self.regs), deque(self.mailbox), self.line,
                            self.mid, self.mcount)


@dataclass
class Configuration:
    program: Program
    states: dict[str, HandlerState]
    globals: dict[str, int]

    def clone(self) -> "Configuration":
        return Configuration(self.program,
                             {h: s.clone() for h, s in self.states.items()},
                             dict(self.globals))

    def enabled(self) -> list[str]:
        """Handlers with an enabled transition, in declaration order."""
        out = []
        for h in self.program.handlers:
            st = self.states[h.name]
            ins = self._instr(st)
            if isinstance(ins, Last):
                if st.mailbox:
                    out.append(h.name)
            else:
                out.append(h.name)
        return out

    def quiescent(self) -> bool:
        return not self.enabled()

    def _instr(self, st: HandlerState):
        msg = self.program.msgs[st.line[0]]
        return msg.instrs[st.line[1]]


def initial_configuration(prog: Program) -> Configuration:
    states = {}
    for h in prog.handlers:
        states[h.name] = HandlerState(
            regs=dict(h.regs),
            mailbox=deque(),
            line=(h.init_msg, 0),
            mid=(h.name, 0),
            mcount=1,
        )
    return Configuration(prog, states, dict(prog.vars))


def step(c: Configuration, h: str) -> tuple[Configuration, RunEvent | None]:
    """Apply one transition of handler ``h``.  Pure: returns a fresh
    configuration.  Raises ScheduleError if ``h`` is not enabled."""
    if h not in c.enabled():
        raise ScheduleError(f"handler {h!r} has no enabled transition")
    c = c.clone()
    st = c.states[h]
    msg = c.program.msgs[st.line[0]]
    ins = msg.instrs[st.line[1]]
    nxt = (st.line[0], st.line[1] + 1)
    ev: RunEvent | None = None

    if isinstance(ins, Last):
        name, mid = st.mailbox.popleft()
        st.mid = mid
        st.line = (name, 0)
        ev = RunEvent(h, GET, mid=mid, msg=name)
    elif isinstance(ins, WriteVar):
        v = st.regs[ins.reg]
        c.globals[ins.var] = v
        st.line = nxt
        ev = RunEvent(h, WRITE, var=ins.var, val=v, mid=st.mid)
    elif isinstance(ins, ReadVar):
        st.regs[ins.reg] = c.globals[ins.var]
        st.line = nxt
        ev = RunEvent(h, READ, var=ins.var, mid=st.mid)
    elif isinstance(ins, PostMsg):
        newmid = (h, st.mcount)
        st.mcount += 1
        c.states[ins.receiver].mailbox.append((ins.msg, newmid))
        st.line = nxt
        ev = RunEvent(h, POST, receiver=ins.receiver, mid=st.mid,
                      newmid=newmid, msg=ins.msg)
    elif isinstance(ins, SetReg):
        st.regs[ins.reg] = eval_exp(ins.exp, st.regs)
        st.line = nxt
    elif isinstance(ins, IfGoto):
        if eval_exp(ins.cond, st.regs) != 0:
            st.line = (st.line[0], msg.labels[ins.target])
        else:
            st.line = nxt
    elif isinstance(ins, Goto):
        st.line = (st.line[0], msg.labels[ins.target])
    else:  # pragma: no cover
        raise AssertionError(f"unhandled instruction {ins!r}")
    return c, ev


@dataclass
class SeededSchedule:
    seed: int


@dataclass
class ReplaySchedule:
    decisions: list[str]


Schedule = SeededSchedule | ReplaySchedule


def run(prog: Program, schedule: Schedule, max_steps: int = 100_000
        ) -> tuple[list[RunEvent], Configuration]:
    """Drive the program under the schedule until quiescence or the step
    budget; returns the recorded event transitions and the final state."""
    c = initial_configuration(prog)
    events: list[RunEvent] = []
    rng = random.Random(schedule.seed) if isinstance(schedule, SeededSchedule) else None
    replay = list(schedule.decisions) if isinstance(schedule, ReplaySchedule) else None
    steps = 0
    while steps < max_steps:
        enabled = c.enabled()
        if not enabled:
            break
        if rng is not None:
            h = rng.choice(enabled)
        else:
            if not replay:
                break
            h = replay.pop(0)
            if h not in enabled:
                raise ScheduleError(f"replay decision {h!r} is not enabled")
        c, ev = step(c, h)
        if ev is not None:
            events.append(ev)
        steps += 1
    return events, c


def explore_runs(prog: Program, depth_bound: int, dedup: bool = True):
    """Bounded depth-first enumeration of runs over scheduler choices.

    Yields the recorded events of each maximal run (quiescent, or cut at the
    depth bound).  With ``dedup`` runs with identical event sequences are
    reported once.
    """
    seen: set[tuple] = set()

    def key(events: list[RunEvent]) -> tuple:
        return tuple(events)

    def rec(c: Configuration, events: list[RunEvent], depth: int):
        enabled = c.enabled()
        if not enabled or depth >= depth_bound:
            k = key(events)
            if not dedup or k not in seen:
                seen.add(k)
                yield list(events)
            return
        for h in enabled:
            c2, ev = step(c, h)
            if ev is not None:
                events.append(ev)
            yield from rec(c2, events, depth + 1)
            if ev is not None:
                events.pop()

    yield from rec(initial_configuration(prog), [], 0)


# ---------------------------------------------------------------------------
# Trace extraction
# ---------------------------------------------------------------------------


def extract_trace(events: list[RunEvent], handlers: list[str] | None = None
                  ) -> TraceGraph:
    """Build the induced full trace of a recorded run.

    Reads-from points at the latest earlier write on the variable, coherence
    and message order follow run order per variable/receiver, program order
    chains events of one message id (with initial-message events preceding
    every get of the handler), execution order chains gets per handler, and
    posted-by matches minted ids to fetched ids.
    """
    t = TraceGraph()
    if handlers:
        for h in handlers:
            t.add_handler(h)
    ids = []
    for i, ev in enumerate(events):
        eid = f"e{i + 1}"
        ids.append(eid)
        t.add_event(Event(eid, ev.handler, ev.kind,
                          var=ev.var, val=ev.val, receiver=ev.receiver))

    last_write: dict[str, int] = {}
    co_prev: dict[str, int] = {}
    mo_prev: dict[str, int] = {}
    eo_prev: dict[str, int] = {}
    po_prev: dict[Mid, int] = {}
    init_last: dict[str, int] = {}
    pending_post: dict[Mid, int] = {}

    for i, ev in enumerate(events):
        if ev.kind == WRITE:
            if ev.var in co_prev:
                t.add_edge("co", ids[co_prev[ev.var]], ids[i])
            co_prev[ev.var] = i
            last_write[ev.var] = i
        elif ev.kind == READ:
            if ev.var in last_write:
                t.add_edge("rf", ids[last_write[ev.var]], ids[i])
        elif ev.kind == POST:
            if ev.receiver in mo_prev:
                t.add_edge("mo", ids[mo_prev[ev.receiver]], ids[i])
            mo_prev[ev.receiver] = i
            pending_post[ev.newmid] = i
        elif ev.kind == GET:
            if ev.handler in eo_prev:
                t.add_edge("eo", ids[eo_prev[ev.handler]], ids[i])
            eo_prev[ev.handler] = i
            if ev.mid in pending_post:
                t.add_edge("pb", ids[pending_post[ev.mid]], ids[i])
            if ev.handler in init_last:
                t.add_edge("po", ids[init_last[ev.handler]], ids[i])
        if ev.kind != GET:
            if ev.mid in po_prev:
                t.add_edge("po", ids[po_prev[ev.mid]], ids[i])
            po_prev[ev.mid] = i
            if ev.mid == (ev.handler, 0):
                init_last[ev.handler] = i
        else:
            po_prev[ev.mid] = i
    return t
