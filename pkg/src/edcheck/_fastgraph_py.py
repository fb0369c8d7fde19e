"""Pure-Python twin of the compiled graph kernel."""

from __future__ import annotations


def topo_order(n: int, edges) -> list[int] | None:
    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        indeg[b] += 1
        succ[a].append(b)
    out = [i for i in range(n) if indeg[i] == 0]
    head = 0
    while head < len(out):
        u = out[head]
        head += 1
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                out.append(v)
    if len(out) != n:
        return None
    return out
