"""Compiled kernels vs the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the implicit lifted-graph BFS over every anchor of random sparse graphs,
and the walk power sum on path-like walk spaces, for both implementations.
"""
import argparse
import timeit

import numpy as np

from qcycle import _fallback, oracles
from qcycle.graphs import AncillarySpec, Graph, sample_coloring
from qcycle.walk import _groups, walk_from_graph

try:
    from qcycle import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def bfs_case(n, seed):
    rng = np.random.default_rng(seed)
    g = oracles.random_graph(n, rng, p=min(1.0, 3.0 / n))
    indptr, indices = g.csr()
    cols = [AncillarySpec(g, 3, k, sample_coloring(n, seed + k)).flips() for k in range(1, n + 1)]

    def run(mod):
        for k in range(1, n + 1):
            mod.lifted_st_distance(indptr, indices, cols[k - 1], k, 3, n)
    return run


def walk_case(L, steps):
    g = Graph.from_edges(L + 1, [(i, i + 1) for i in range(1, L + 1)])
    w = walk_from_graph(g, 1, {L + 1}, d=L)
    x0 = np.zeros(w.dim)
    x0[0] = 1.0
    args = (*_groups(w, 0), *_groups(w, 1), steps)

    def run(mod):
        mod.walk_zero_phase_sum(x0, *args)
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    cases = [(f"lifted BFS, n={n}, all anchors", bfs_case(n, n)) for n in (8, 32, 128)]
    cases += [(f"walk sum, path L={L}, T={T}", walk_case(L, T)) for L, T in ((4, 200), (16, 800), (64, 3000))]
    print(f"{'case':40s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, run in cases:
        py = min(timeit.repeat(lambda: run(_fallback), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:40s} {py:12.3f} {'-':>12s} {'-':>8s}")
            continue
        cy = min(timeit.repeat(lambda: run(_kernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:40s} {py:12.3f} {cy:12.3f} {py / cy:8.1f}x")


if __name__ == "__main__":
    main()
