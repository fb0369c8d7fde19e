"""Graph kernel selection.

The acyclicity test is the innermost loop of the enumeration checkers: one
call per candidate mo assignment, potentially millions per trace.  A small
Cython kernel (:mod:`edcheck._fastgraph`) implements it over C arrays; this
module falls back to the pure-Python twin when the extension was not built.
Both implementations are behaviourally identical (see tests and
``benchmarks/bench_kernels.py``).
"""

from __future__ import annotations

from collections import deque

try:  # pragma: no cover - exercised only when the extension is built
    from . import _fastgraph as _impl
    COMPILED = True
except ImportError:
    from . import _fastgraph_py as _impl
    COMPILED = False


def topo_order(n: int, edges) -> list[int] | None:
    """Kahn topological order of nodes 0..n-1, or None if cyclic.

    Ready nodes are served in first-seen order with the initial frontier in
    index order, so the result is deterministic.
    """
    return _impl.topo_order(n, edges)


def is_acyclic(n: int, edges) -> bool:
    return _impl.topo_order(n, edges) is not None


def find_short_cycle(n: int, edges) -> list[int] | None:
    """One shortest cycle (as a node list without the closing repeat), found
    by BFS from every node left unresolved by Kahn's algorithm."""
    order = _impl.topo_order(n, edges)
    if order is not None:
        return None
    resolved = set(order_nodes(n, edges))
    succ: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        if a not in resolved and b not in resolved:
            succ[a].append(b)
    best: list[int] | None = None
    for start in range(n):
        if start in resolved:
            continue
        parent: dict[int, int] = {start: -1}
        q = deque([start])
        found = None
        while q and found is None:
            u = q.popleft()
            for v in succ[u]:
                if v == start:
                    found = u
                    break
                if v not in parent:
                    parent[v] = u
                    q.append(v)
        if found is not None:
            path = [found]
            while path[-1] != start:
                path.append(parent[path[-1]])
            path.reverse()
            if best is None or len(path) < len(best):
                best = path
    return best


def order_nodes(n: int, edges) -> list[int]:
    """Nodes removable by Kahn's algorithm (everything outside cycles and
    their downstream-of-cycle successors stay out)."""
    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        indeg[b] += 1
        succ[a].append(b)
    q = deque(i for i in range(n) if indeg[i] == 0)
    out = []
    while q:
        u = q.popleft()
        out.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                q.append(v)
    return out
