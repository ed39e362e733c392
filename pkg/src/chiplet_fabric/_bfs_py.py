"""Pure-Python BFS kernels; same signatures as the compiled ``_bfs`` module."""

from collections import deque

import numpy as np


def bfs_distances(indptr, indices, source):
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    indptr = indptr.tolist()
    indices = indices.tolist()
    d = dist.tolist()
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = d[u] + 1
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if d[v] < 0:
                d[v] = du
                queue.append(v)
    return np.asarray(d, dtype=np.int64)


def eccentricities(indptr, indices):
    n = len(indptr) - 1
    ecc = np.empty(n, dtype=np.int64)
    for s in range(n):
        d = bfs_distances(indptr, indices, s)
        ecc[s] = -1 if (d < 0).any() else d.max()
    return ecc
