# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loops: implicit lifted-graph BFS and the real walk power sum."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def lifted_st_distance(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                       const cnp.uint8_t[::1] colors, long k, long s_mod, long n):
    cdef long nv = s_mod * n + 2
    cdef cnp.int64_t[::1] dist = np.full(nv, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] queue = np.empty(nv, dtype=np.int64)
    cdef long head = 0, tail = 0
    cdef long x, u, b, v, nb, y, p, dx
    cdef bint up
    cdef long start = 2 + (k - 1) * s_mod
    dist[0] = 0
    dist[start] = 1
    queue[tail] = start
    tail += 1
    while head < tail:
        x = queue[head]
        head += 1
        dx = dist[x]
        u = (x - 2) // s_mod + 1
        b = (x - 2) % s_mod
        if u == k and b == 1:
            return dx + 1
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            up = u < v
            if (u == k and colors[v]) or (v == k and colors[u]):
                up = not up
            if up:
                nb = (b + 1) % s_mod
            else:
                nb = (b + s_mod - 1) % s_mod
            y = 2 + (v - 1) * s_mod + nb
            if dist[y] < 0:
                dist[y] = dx + 1
                queue[tail] = y
                tail += 1
    return -1


cdef inline void _reflect(double[::1] x, const cnp.int64_t[::1] ptr,
                          const cnp.int64_t[::1] idx, const double[::1] w) noexcept nogil:
    cdef Py_ssize_t g, p
    cdef double dot
    for g in range(ptr.shape[0] - 1):
        dot = 0.0
        for p in range(ptr[g], ptr[g + 1]):
            dot += w[p] * x[idx[p]]
        dot *= 2.0
        for p in range(ptr[g], ptr[g + 1]):
            x[idx[p]] -= dot * w[p]


def walk_zero_phase_sum(x0, const cnp.int64_t[::1] a_ptr, const cnp.int64_t[::1] a_idx,
                        const double[::1] a_w, const cnp.int64_t[::1] b_ptr,
                        const cnp.int64_t[::1] b_idx, const double[::1] b_w, long steps):
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    out = np.zeros(x.shape[0], dtype=np.float64)
    cdef double[::1] acc = out
    cdef Py_ssize_t i, j, dim = x.shape[0]
    with nogil:
        for j in range(steps):
            for i in range(dim):
                acc[i] += x[i]
            _reflect(x, b_ptr, b_idx, b_w)
            _reflect(x, a_ptr, a_idx, a_w)
    return out
