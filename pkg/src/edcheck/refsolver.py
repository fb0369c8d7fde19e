"""Reference solver for the emitted QF_IDL fragment.

Usage: ``python3 -m edcheck.refsolver`` reads an SMT-LIB2 document from
stdin and prints ``sat``/``unsat`` plus a ``get-value`` model.  Runs as a
plain subprocess, so it plugs into the same backend contract as any
external solver.

Supported input: ``set-logic``, ``declare-const <name> Int``, asserts over
strict comparisons ``(< x y)`` combined with ``or``/``and``/``not``/``=``,
``check-sat``, ``get-value``, ``exit``.

The decision procedure is DPLL over comparison atoms with an incremental
difference-logic theory: truths contribute strict edges, falsehoods weak
reverse edges, and feasibility is maintained as an integer potential
function repaired Dijkstra-style on every assignment (a repair that loops
back to the edge source certifies a negative cycle).  Decisions prefer the
polarity already satisfied by the current potentials, so satisfiable
instances tend to complete without backtracking.
"""

from __future__ import annotations

import heapq
import re
import sys


class SolverInputError(Exception):
    pass


def tokenize(text: str):
    # strip ; comments, then split parens and symbols
    text = re.sub(r";[^\n]*", "", text)
    return re.findall(r"\(|\)|[^\s()]+", text)


def parse_sexprs(toks: list[str]):
    pos = 0

    def parse():
        nonlocal pos
        if pos >= len(toks):
            raise SolverInputError("unexpected end of input")
        tok = toks[pos]
        pos += 1
        if tok == "(":
            out = []
            while pos < len(toks) and toks[pos] != ")":
                out.append(parse())
            if pos >= len(toks):
                raise SolverInputError("unbalanced parentheses")
            pos += 1
            return out
        if tok == ")":
            raise SolverInputError("unbalanced ')'")
        return tok

    out = []
    while pos < len(toks):
        out.append(parse())
    return out


class DiffLogic:
    """Incremental conjunction of difference constraints t_v <= t_u + w."""

    def __init__(self, n: int):
        self.n = n
        self.pi = [0] * n
        self.succ: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.trail: list[tuple[int, int]] = []  # (node, previous potential) or edge marks

    def checkpoint(self):
        return (list(self.pi), [len(s) for s in self.succ])

    def restore(self, snap):
        pi, lens = snap
        self.pi = list(pi)
        for i, ln in enumerate(lens):
            del self.succ[i][ln:]

    def add(self, u: int, v: int, w: int) -> bool:
        """Add t_v <= t_u + w; False when it closes a negative cycle (the
        edge is still recorded; callers backtrack via snapshots)."""
        self.succ[u].append((v, w))
        pi = self.pi
        if pi[v] <= pi[u] + w:
            return True
        # lower pi[v] and propagate decreases
        target = pi[u] + w
        dist = {v: target}
        heap = [(-(pi[v] - target), v)]
        while heap:
            neg, x = heapq.heappop(heap)
            nx = dist.get(x)
            if nx is None or -neg != pi[x] - nx:
                continue
            if x == u and nx < pi[u]:
                return False  # lowering the source: negative cycle
            pi_x_old = pi[x]
            pi[x] = nx
            for (y, wy) in self.succ[x]:
                cand = nx + wy
                if cand < pi[y] and cand < dist.get(y, cand + 1):
                    dist[y] = cand
                    heapq.heappush(heap, (-(pi[y] - cand), y))
        return True


class Solver:
    def __init__(self):
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        self.atoms: list[tuple[int, int]] = []   # atom i is names[a] < names[b]
        self.atom_index: dict[tuple[int, int], int] = {}
        self.clauses: list[list[int]] = []       # literals: +i+1 / -(i+1)
        self.result: str | None = None

    def declare(self, name: str):
        if name in self.index:
            raise SolverInputError(f"duplicate declaration {name!r}")
        self.index[name] = len(self.names)
        self.names.append(name)

    def atom(self, a: str, b: str) -> int:
        key = (self.index[a], self.index[b])
        if key not in self.atom_index:
            self.atom_index[key] = len(self.atoms)
            self.atoms.append(key)
        return self.atom_index[key]

    # formula -> CNF via small-scale structural translation; the emitted
    # fragment only nests or/and/not/= around comparisons
    def assert_form(self, form):
        lits = self._as_clause(form)
        if lits is not None:
            self.clauses.append(lits)
            return
        if isinstance(form, list) and form and form[0] == "and":
            for sub in form[1:]:
                self.assert_form(sub)
            return
        if isinstance(form, list) and len(form) == 3 and form[0] == "=":
            x = self._as_literal(form[1])
            y = self._as_literal(form[2])
            if x is not None and y is not None:
                self.clauses.append([-x, y])
                self.clauses.append([x, -y])
                return
        raise SolverInputError(f"unsupported assertion {form!r}")

    def _as_literal(self, form) -> int | None:
        if isinstance(form, list) and len(form) == 3 and form[0] == "<":
            return self.atom(form[1], form[2]) + 1
        if isinstance(form, list) and len(form) == 2 and form[0] == "not":
            lit = self._as_literal(form[1])
            return None if lit is None else -lit
        return None

    def _as_clause(self, form) -> list[int] | None:
        lit = self._as_literal(form)
        if lit is not None:
            return [lit]
        if isinstance(form, list) and form and form[0] == "or":
            lits = [self._as_literal(sub) for sub in form[1:]]
            if all(l is not None for l in lits):
                return list(lits)
        return None

    # -- search ---------------------------------------------------------

    def solve(self) -> list[int] | None:
        """DPLL search; returns feasible potentials (one per declared name)
        or None when unsatisfiable."""
        n_atoms = len(self.atoms)
        assign: list[int] = [0] * n_atoms  # 0 unknown, 1 true, -1 false
        theory = DiffLogic(len(self.names))
        watch: list[list[int]] = [[] for _ in range(n_atoms)]
        for ci, cl in enumerate(self.clauses):
            for lit in cl:
                watch[abs(lit) - 1].append(ci)

        def post(aid: int, value: int) -> bool:
            a, b = self.atoms[aid]
            if value > 0:
                return theory.add(b, a, -1)   # t_a <= t_b - 1
            return theory.add(a, b, 0)        # t_b <= t_a

        trail: list[int] = []

        def set_lit(lit: int) -> bool:
            aid, val = abs(lit) - 1, (1 if lit > 0 else -1)
            if assign[aid] == val:
                return True
            if assign[aid] == -val:
                return False
            assign[aid] = val
            trail.append(aid)
            return post(aid, val)

        def propagate(start: int) -> bool:
            i = start
            while i < len(trail):
                aid = trail[i]
                i += 1
                for ci in watch[aid]:
                    cl = self.clauses[ci]
                    unassigned = None
                    satisfied = False
                    for lit in cl:
                        v = assign[abs(lit) - 1]
                        if v == 0:
                            if unassigned is None:
                                unassigned = lit
                            else:
                                unassigned = 0  # two free literals
                                break
                        elif (v > 0) == (lit > 0):
                            satisfied = True
                            break
                    if satisfied or unassigned == 0:
                        continue
                    if unassigned is None:
                        return False
                    if not set_lit(unassigned):
                        return False
            return True

        # top-level units
        for cl in self.clauses:
            if len(cl) == 1 and not set_lit(cl[0]):
                return None
        if not propagate(0):
            return None

        frames = []  # (decided atom, phase, trail length, theory snapshot)

        def pick() -> int | None:
            for cl in self.clauses:
                free = None
                sat = False
                for lit in cl:
                    v = assign[abs(lit) - 1]
                    if v == 0:
                        free = free or lit
                    elif (v > 0) == (lit > 0):
                        sat = True
                        break
                if not sat and free:
                    return free
            return None

        while True:
            lit = pick()
            if lit is None:
                return theory.pi
            aid = abs(lit) - 1
            a, b = self.atoms[aid]
            # prefer the phase the current potentials already satisfy:
            # the atom reads t_a < t_b, and timestamps are the potentials
            want_true = theory.pi[a] < theory.pi[b]
            phase = abs(lit) if want_true else -abs(lit)
            frames.append((aid, phase, len(trail), theory.checkpoint()))
            ok = set_lit(phase) and propagate(len(trail) - 1)
            while not ok:
                if not frames:
                    return None
                aid, phase, tlen, snap = frames.pop()
                for x in trail[tlen:]:
                    assign[x] = 0
                del trail[tlen:]
                theory.restore(snap)
                if phase == 0:
                    ok = False  # both phases failed here; keep unwinding
                    continue
                frames.append((aid, 0, tlen, theory.checkpoint()))
                ok = set_lit(-phase) and propagate(len(trail) - 1)


def main(argv=None) -> int:
    text = sys.stdin.read()
    solver = Solver()
    model: dict[str, int] | None = None
    answered = False
    try:
        for form in parse_sexprs(tokenize(text)):
            if not isinstance(form, list) or not form:
                raise SolverInputError(f"unexpected toplevel {form!r}")
            head = form[0]
            if head == "set-logic":
                continue
            if head == "declare-const":
                if len(form) != 3 or form[2] != "Int":
                    raise SolverInputError(f"bad declaration {form!r}")
                solver.declare(form[1])
            elif head == "assert":
                if len(form) != 2:
                    raise SolverInputError(f"bad assert {form!r}")
                solver.assert_form(form[1])
            elif head == "check-sat":
                pi = solver.solve()
                answered = True
                if pi is None:
                    model = None
                    print("unsat")
                else:
                    model = {name: pi[i] for i, name in enumerate(solver.names)}
                    print("sat")
            elif head == "get-value":
                if not answered or model is None:
                    print('(error "no model available")')
                    continue
                parts = []
                for name in form[1]:
                    v = model.get(name.strip("|"), 0)
                    parts.append(f"({name} {v})" if v >= 0 else f"({name} (- {-v}))")
                print("(" + " ".join(parts) + ")")
            elif head == "exit":
                break
            else:
                raise SolverInputError(f"unsupported command {head!r}")
    except SolverInputError as exc:
        print(f"(error {str(exc)!r})", file=sys.stderr)
        return 2
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
