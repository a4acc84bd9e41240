"""Pure-Python/numpy versions of the compiled kernels.

Signatures and results match ``_kernels.pyx`` exactly; the package picks one of
the two at import time (see :mod:`qcycle.kernels`).
"""
from __future__ import annotations

from collections import deque

import numpy as np


def lifted_st_distance(indptr, indices, colors, k, s_mod, n):
    """BFS distance from ``S`` to ``T`` in the lifted graph, or -1 if unreachable.

    The lifted graph is walked implicitly from the CSR arrays of the base graph;
    ``colors[v]`` is the flip bit applied to the edge ``{k, v}``.
    """
    nv = s_mod * n + 2
    dist = [-1] * nv
    start = 2 + (k - 1) * s_mod  # k_0
    dist[0] = 0
    dist[start] = 1
    q = deque([start])
    while q:
        x = q.popleft()
        dx = dist[x]
        u, b = divmod(x - 2, s_mod)
        u += 1
        if u == k and b == 1:
            return dx + 1
        for p in range(indptr[u], indptr[u + 1]):
            v = int(indices[p])
            up = u < v
            if (u == k and colors[v]) or (v == k and colors[u]):
                up = not up
            nb = (b + 1) % s_mod if up else (b - 1) % s_mod
            y = 2 + (v - 1) * s_mod + nb
            if dist[y] < 0:
                dist[y] = dx + 1
                q.append(y)
    return -1


def _reflect_groups(x, ptr, idx, w, sizes):
    prod = w * x[idx]
    dots = np.add.reduceat(prod, ptr[:-1])
    x[idx] -= 2.0 * w * np.repeat(dots, sizes)


def walk_zero_phase_sum(x0, a_ptr, a_idx, a_w, b_ptr, b_idx, b_w, steps):
    """Return ``sum_{j < steps} U^j x0`` for ``U = R_A R_B`` (R_B applied first).

    Each reflection is ``I - 2 sum_g |z_g><z_g|`` where group ``g`` owns the
    disjoint index slice ``idx[ptr[g]:ptr[g+1]]`` with real weights ``w``.
    Groups must be non-empty.
    """
    x = np.array(x0, dtype=np.float64)
    acc = np.zeros_like(x)
    a_sizes = np.diff(a_ptr)
    b_sizes = np.diff(b_ptr)
    has_a = len(a_sizes) > 0
    has_b = len(b_sizes) > 0
    for _ in range(int(steps)):
        acc += x
        if has_b:
            _reflect_groups(x, b_ptr, b_idx, b_w, b_sizes)
        if has_a:
            _reflect_groups(x, a_ptr, a_idx, a_w, a_sizes)
    return acc
