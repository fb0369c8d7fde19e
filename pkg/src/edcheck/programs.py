"""Program model for the toy event-driven language and its text format.

A program declares shared variables, handlers (each with local registers and
an initial message), and messages.  Messages are instruction sequences ending
in ``last``; instructions may carry a ``label:`` prefix for gotos.  Example::

    vars x y=2
    handler h1 regs a init boot
    handler h2 regs b init idle
    msg boot on h1
      a = 5
      x = a
      post h2 work
      last
    msg idle on h2
      last
    msg work on h2
      b = x
      if b < 9 goto done
      x = b
    done: last

Assignments disambiguate by declared names: ``x = a`` writes register ``a``
to shared ``x``; ``a = x`` reads shared ``x`` into register ``a``; anything
else is a register expression over registers and integer literals with
operators ``+ - * == != < <=``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class ProgramError(Exception):
    """Static program problems: parse errors, unknown names, bad labels."""


# Expressions are nested tuples: ("int", v) | ("reg", name) | (op, lhs, rhs).


@dataclass(frozen=True)
class WriteVar:
    label: str
    var: str
    reg: str


@dataclass(frozen=True)
class ReadVar:
    label: str
    reg: str
    var: str


@dataclass(frozen=True)
class SetReg:
    label: str
    reg: str
    exp: tuple


@dataclass(frozen=True)
class IfGoto:
    label: str
    cond: tuple
    target: str


@dataclass(frozen=True)
class Goto:
    label: str
    target: str


@dataclass(frozen=True)
class PostMsg:
    label: str
    receiver: str
    msg: str


@dataclass(frozen=True)
class Last:
    label: str


Instr = WriteVar | ReadVar | SetReg | IfGoto | Goto | PostMsg | Last


@dataclass
class MsgDef:
    name: str
    owner: str
    instrs: list[Instr] = field(default_factory=list)
    labels: dict[str, int] = field(default_factory=dict)


@dataclass
class HandlerDecl:
    name: str
    regs: dict[str, int]
    init_msg: str


@dataclass
class Program:
    vars: dict[str, int]
    handlers: list[HandlerDecl]
    msgs: dict[str, MsgDef]

    def handler(self, name: str) -> HandlerDecl:
        for h in self.handlers:
            if h.name == name:
                return h
        raise KeyError(name)


# ---------------------------------------------------------------------------
# Expression parsing / evaluation
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(==|!=|<=|<|\+|-|\*|\(|\)|-?\d+|[A-Za-z_]\w*)")


def _tokenize(text: str) -> list[str]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ProgramError(f"bad expression near {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_exp(text: str, regs: set[str]) -> tuple:
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def eat():
        nonlocal pos
        pos += 1
        return toks[pos - 1]

    def atom():
        tok = peek()
        if tok is None:
            raise ProgramError(f"expression ends early: {text!r}")
        if tok == "(":
            eat()
            e = cmp_()
            if peek() != ")":
                raise ProgramError(f"missing ')' in {text!r}")
            eat()
            return e
        eat()
        if re.fullmatch(r"-?\d+", tok):
            return ("int", int(tok))
        if tok not in regs:
            raise ProgramError(f"unknown register {tok!r} in expression {text!r}")
        return ("reg", tok)

    def mul():
        e = atom()
        while peek() == "*":
            eat()
            e = ("*", e, atom())
        return e

    def add():
        e = mul()
        while peek() in ("+", "-"):
            e = (eat(), e, mul())
        return e

    def cmp_():
        e = add()
        if peek() in ("==", "!=", "<", "<="):
            e = (eat(), e, add())
        return e

    e = cmp_()
    if pos != len(toks):
        raise ProgramError(f"trailing tokens in expression {text!r}")
    return e


def eval_exp(e: tuple, regs: dict[str, int]) -> int:
    op = e[0]
    if op == "int":
        return e[1]
    if op == "reg":
        return regs[e[1]]
    a, b = eval_exp(e[1], regs), eval_exp(e[2], regs)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    raise ProgramError(f"unknown operator {op!r}")


# ---------------------------------------------------------------------------
# Program text parsing
# ---------------------------------------------------------------------------

_NAME = r"[A-Za-z_]\w*"
_DECL = re.compile(rf"({_NAME})(?:\s*=\s*(-?\d+))?$")


def _parse_decls(parts: list[str], what: str, ln: int) -> dict[str, int]:
    out: dict[str, int] = {}
    for p in parts:
        m = _DECL.match(p)
        if not m:
            raise ProgramError(f"line {ln}: bad {what} declaration {p!r}")
        if m.group(1) in out:
            raise ProgramError(f"line {ln}: duplicate {what} {m.group(1)!r}")
        out[m.group(1)] = int(m.group(2) or 0)
    return out


def parse_program(text: str) -> Program:
    vars_: dict[str, int] = {}
    handlers: list[HandlerDecl] = []
    msgs: dict[str, MsgDef] = {}
    current: MsgDef | None = None

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "vars" and current is None:
            vars_.update(_parse_decls(words[1:], "variable", ln))
            continue
        if words[0] == "handler" and current is None:
            m = re.match(rf"handler\s+({_NAME})\s+regs((?:\s+{_NAME}(?:\s*=\s*-?\d+)?)*)"
                         rf"\s+init\s+({_NAME})$", line)
            if not m:
                raise ProgramError(f"line {ln}: bad handler declaration")
            regs = _parse_decls(m.group(2).split(), "register", ln)
            handlers.append(HandlerDecl(m.group(1), regs, m.group(3)))
            continue
        if words[0] == "msg":
            m = re.match(rf"msg\s+({_NAME})\s+on\s+({_NAME})$", line)
            if not m:
                raise ProgramError(f"line {ln}: expected 'msg <name> on <handler>'")
            name, owner = m.group(1), m.group(2)
            if name in msgs:
                raise ProgramError(f"line {ln}: duplicate message {name!r}")
            current = MsgDef(name, owner)
            msgs[name] = current
            continue
        if current is None:
            raise ProgramError(f"line {ln}: instruction outside a message")
        _parse_instr(line, ln, current, vars_)

    prog = Program(vars_, handlers, msgs)
    _check_program(prog)
    return prog


def _parse_instr(line: str, ln: int, msg: MsgDef, vars_: dict[str, int]) -> None:
    label = f"{msg.name}.{len(msg.instrs)}"
    m = re.match(rf"({_NAME})\s*:\s*(\S.*)$", line)
    if m:
        label, line = m.group(1), m.group(2)
    if label in msg.labels:
        raise ProgramError(f"line {ln}: duplicate label {label!r}")

    words = line.split()
    instr: Instr
    if line == "last":
        instr = Last(label)
    elif words[0] == "post":
        if len(words) != 3:
            raise ProgramError(f"line {ln}: expected 'post <handler> <msg>'")
        instr = PostMsg(label, words[1], words[2])
    elif words[0] == "goto":
        if len(words) != 2:
            raise ProgramError(f"line {ln}: expected 'goto <label>'")
        instr = Goto(label, words[1])
    elif words[0] == "if":
        m = re.match(rf"if\s+(.+)\s+goto\s+({_NAME})$", line)
        if not m:
            raise ProgramError(f"line {ln}: expected 'if <exp> goto <label>'")
        instr = IfGoto(label, ("?", m.group(1)), m.group(2))
    elif "=" in line:
        lhs, rhs = (s.strip() for s in line.split("=", 1))
        if not re.fullmatch(_NAME, lhs):
            raise ProgramError(f"line {ln}: bad assignment target {lhs!r}")
        if lhs in vars_:
            if not re.fullmatch(_NAME, rhs) or rhs in vars_:
                raise ProgramError(
                    f"line {ln}: writes store one register into one variable")
            instr = WriteVar(label, lhs, rhs)
        elif re.fullmatch(_NAME, rhs) and rhs in vars_:
            instr = ReadVar(label, lhs, rhs)
        else:
            instr = SetReg(label, lhs, ("?", rhs))
    else:
        raise ProgramError(f"line {ln}: cannot parse instruction {line!r}")
    msg.labels[label] = len(msg.instrs)
    msg.instrs.append(instr)


def _check_program(prog: Program) -> None:
    if not prog.handlers:
        raise ProgramError("program declares no handlers")
    owners = {h.name for h in prog.handlers}
    seen = set()
    for h in prog.handlers:
        if h.name in seen:
            raise ProgramError(f"duplicate handler {h.name!r}")
        seen.add(h.name)
        if h.init_msg not in prog.msgs:
            raise ProgramError(f"handler {h.name}: unknown initial message {h.init_msg!r}")
        if prog.msgs[h.init_msg].owner != h.name:
            raise ProgramError(
                f"handler {h.name}: initial message {h.init_msg!r} belongs to "
                f"{prog.msgs[h.init_msg].owner!r}")
    inits = [h.init_msg for h in prog.handlers]
    if len(set(inits)) != len(inits):
        raise ProgramError("initial messages must be distinct")

    for msg in prog.msgs.values():
        if msg.owner not in owners:
            raise ProgramError(f"message {msg.name}: unknown handler {msg.owner!r}")
        if not msg.instrs or not isinstance(msg.instrs[-1], Last):
            raise ProgramError(f"message {msg.name} must end with 'last'")
        if any(isinstance(i, Last) for i in msg.instrs[:-1]):
            raise ProgramError(f"message {msg.name}: 'last' before the end")
        regs = set(_owner_regs(prog, msg.owner))
        resolved = []
        for ins in msg.instrs:
            if isinstance(ins, (WriteVar, ReadVar)):
                if ins.var not in prog.vars:
                    raise ProgramError(f"{msg.name}: unknown variable {ins.var!r}")
                if ins.reg not in regs:
                    raise ProgramError(f"{msg.name}: unknown register {ins.reg!r}")
                resolved.append(ins)
            elif isinstance(ins, SetReg):
                if ins.reg not in regs:
                    raise ProgramError(f"{msg.name}: unknown register {ins.reg!r}")
                resolved.append(SetReg(ins.label, ins.reg, parse_exp(ins.exp[1], regs)))
            elif isinstance(ins, IfGoto):
                if ins.target not in msg.labels:
                    raise ProgramError(f"{msg.name}: unknown label {ins.target!r}")
                resolved.append(IfGoto(ins.label, parse_exp(ins.cond[1], regs), ins.target))
            elif isinstance(ins, Goto):
                if ins.target not in msg.labels:
                    raise ProgramError(f"{msg.name}: unknown label {ins.target!r}")
                resolved.append(ins)
            elif isinstance(ins, PostMsg):
                if ins.receiver not in owners:
                    raise ProgramError(f"{msg.name}: unknown post target {ins.receiver!r}")
                if ins.msg not in prog.msgs:
                    raise ProgramError(f"{msg.name}: unknown message {ins.msg!r}")
                if prog.msgs[ins.msg].owner != ins.receiver:
                    raise ProgramError(
                        f"{msg.name}: message {ins.msg!r} does not belong to "
                        f"{ins.receiver!r}")
                if ins.msg in inits:
                    raise ProgramError(
                        f"{msg.name}: initial message {ins.msg!r} cannot be posted")
                resolved.append(ins)
            else:
                resolved.append(ins)
        msg.instrs = resolved


def _owner_regs(prog: Program, handler: str) -> dict[str, int]:
    return prog.handler(handler).regs


def load_program(path) -> Program:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_program(fh.read())
