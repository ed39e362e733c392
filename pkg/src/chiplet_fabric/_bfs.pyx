# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled breadth-first-search kernels over CSR adjacency arrays."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef void _bfs(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
               Py_ssize_t source, cnp.int64_t[::1] dist,
               cnp.int64_t[::1] queue) noexcept nogil:
    cdef Py_ssize_t head = 0, tail = 0, u, v, e
    cdef Py_ssize_t n = dist.shape[0]
    for u in range(n):
        dist[u] = -1
    dist[source] = 0
    queue[tail] = source
    tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue[tail] = v
                tail += 1


def bfs_distances(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices, Py_ssize_t source):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    dist = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] d = dist
    cdef cnp.int64_t[::1] q = queue
    with nogil:
        _bfs(indptr, indices, source, d, q)
    return dist


def eccentricities(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices):
    """Eccentricity of every node; -1 marks a node that cannot reach all others."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t s, u
    cdef cnp.int64_t best, dv
    ecc = np.empty(n, dtype=np.int64)
    dist = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] e = ecc
    cdef cnp.int64_t[::1] d = dist
    cdef cnp.int64_t[::1] q = queue
    with nogil:
        for s in range(n):
            _bfs(indptr, indices, s, d, q)
            best = 0
            for u in range(n):
                dv = d[u]
                if dv < 0:
                    best = -1
                    break
                if dv > best:
                    best = dv
            e[s] = best
    return ecc
