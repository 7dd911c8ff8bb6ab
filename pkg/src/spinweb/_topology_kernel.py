"""Compiled graph traversal kernels for the topology metrics.

Graphs arrive as CSR arrays (ptr, adj) with neighbor lists sorted
ascending, which the triangle counter exploits for two-pointer set
intersections.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def bfs_mean_distance(ptr, adj, sources, n):
    """Per-source mean hop distance to all other nodes.

    Returns -1.0 for a source that cannot reach the whole graph, so the
    caller can detect disconnected input.
    """
    out = np.empty(sources.size, dtype=np.float64)
    dist = np.empty(n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    for si in range(sources.size):
        s = sources[si]
        dist[:] = -1
        dist[s] = 0
        queue[0] = s
        head = 0
        tail = 1
        total = 0
        while head < tail:
            u = queue[head]
            head += 1
            for ei in range(ptr[u], ptr[u + 1]):
                v = adj[ei]
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    total += dist[v]
                    queue[tail] = v
                    tail += 1
        if tail < n:
            out[si] = -1.0
        else:
            out[si] = total / (n - 1)
    return out


@numba.njit(cache=True)
def triangle_counts(ptr, adj, edges):
    """Triangles through each node, one increment per closing vertex."""
    n = ptr.size - 1
    t = np.zeros(n, dtype=np.int64)
    for ei in range(edges.shape[0]):
        u = edges[ei, 0]
        v = edges[ei, 1]
        i = ptr[u]
        j = ptr[v]
        iu = ptr[u + 1]
        jv = ptr[v + 1]
        while i < iu and j < jv:
            a = adj[i]
            b = adj[j]
            if a == b:
                t[a] += 1
                i += 1
                j += 1
            elif a < b:
                i += 1
            else:
                j += 1
    return t
