# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled graph kernel: Kahn topological sort over C arrays.

Semantics match edcheck._fastgraph_py exactly; the pure version is the
reference in the equivalence tests.
"""

from libc.stdlib cimport malloc, free


def topo_order(int n, edges):
    if n == 0:
        return []
    cdef Py_ssize_t m = len(edges)
    cdef int *indeg = <int *>malloc(n * sizeof(int))
    cdef int *head = <int *>malloc(n * sizeof(int))
    cdef int *nxt = <int *>malloc(m * sizeof(int)) if m else NULL
    cdef int *dst = <int *>malloc(m * sizeof(int)) if m else NULL
    cdef int *out = <int *>malloc(n * sizeof(int))
    if indeg == NULL or head == NULL or out == NULL or (m and (nxt == NULL or dst == NULL)):
        free(indeg); free(head); free(nxt); free(dst); free(out)
        raise MemoryError()
    cdef int i, a, b, u, v, filled = 0, served = 0
    cdef Py_ssize_t k
    try:
        for i in range(n):
            indeg[i] = 0
            head[i] = -1
        # adjacency as per-source linked lists, preserving insertion order
        # by building backwards
        for k in range(m - 1, -1, -1):
            a = edges[k][0]
            b = edges[k][1]
            dst[k] = b
            nxt[k] = head[a]
            head[a] = <int>k
            indeg[b] += 1
        for i in range(n):
            if indeg[i] == 0:
                out[filled] = i
                filled += 1
        while served < filled:
            u = out[served]
            served += 1
            k = head[u]
            while k != -1:
                v = dst[k]
                indeg[v] -= 1
                if indeg[v] == 0:
                    out[filled] = v
                    filled += 1
                k = nxt[k]
        if filled != n:
            return None
        return [out[i] for i in range(n)]
    finally:
        free(indeg); free(head); free(nxt); free(dst); free(out)
