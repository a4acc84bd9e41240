"""Quantum-walk s-t connectivity on the bipartite double cover ``H'``.

The walk space has one basis state per edge of ``H'`` (indexed by its side-0
endpoint first) plus the dangling state ``|e_s>`` hanging off the start vertex.
``R_A`` and ``R_B`` are direct sums of local diffusions ``D_v = I - 2|ζ_v><ζ_v|``
over the side-0 and side-1 vertices; marked vertices get ``D_v = I``.

Detection statistic: phase estimation of ``U = R_A R_B`` with ``T`` register
points on ``|e_s>``; outcome 0 is read as "path".  Its probability is
``||(1/T) sum_{j<T} U^j |e_s>||^2``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

from . import kernels
from .graphs import (AdjacencyArray, AncillarySpec, Graph, S, T, ancillary_neighbors,
                     h_degree)
from .qsim import aa_iterations, diffusion_from_phi, exact_amplitude_amplification, unitary_eig


class DenseRegimeError(ValueError):
    pass


@dataclass
class WalkSpace:
    """Explicit walk space; ``nbrs[v]`` lists neighbours of ``v`` in array-slot order."""

    nbrs: dict
    side: dict
    s: Hashable
    marked: frozenset
    C: float = 4.0
    d: float = 1.0
    n_vertices: int | None = None
    dense: bool = False
    queries: int = 0
    edge_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.side[self.s] != 0:
            raise ValueError("start vertex must be on side 0")
        idx = {}
        for a in sorted(self.nbrs, key=_sort_key):
            if self.side[a] != 0:
                continue
            for b in self.nbrs[a]:
                if self.side[b] != 1:
                    raise ValueError(f"edge {a}-{b} does not cross sides")
                idx[(a, b)] = len(idx) + 1
        self.edge_index = idx
        if self.n_vertices is None:
            self.n_vertices = len(self.nbrs)

    @property
    def dim(self) -> int:
        return len(self.edge_index) + 1

    def edge(self, u, v) -> int:
        return self.edge_index[(u, v) if self.side[u] == 0 else (v, u)]

    def block(self, v) -> list[int]:
        out = [self.edge(v, w) for w in self.nbrs[v]]
        if v == self.s:
            out.append(0)  # slot d_s + 1 holds |e_s>
        return out

    def amplitudes(self, v) -> np.ndarray:
        """Unnormalised ζ_v amplitudes over ``block(v)``."""
        deg = len(self.nbrs[v])
        if v == self.s:
            return np.concatenate([np.full(deg, math.sqrt(self.C * self.d)), [1.0]])
        return np.ones(deg)

    def zeta(self, v) -> np.ndarray:
        a = self.amplitudes(v)
        return a / np.linalg.norm(a)

    def vertices(self, side: int) -> list:
        return [v for v in sorted(self.nbrs, key=_sort_key) if self.side[v] == side]

    def active(self, side: int) -> list:
        return [v for v in self.vertices(side) if v not in self.marked and self.block(v)]


def _sort_key(v):
    return repr(v)


# --- construction -----------------------------------------------------------------

def walk_from_graph(h: Graph, s: int, marked, C: float = 4.0, d: float = 1.0,
                    n_vertices: int | None = None) -> WalkSpace:
    """Walk space on the double cover of an explicit graph; ``H'`` vertices are ``(x, side)``."""
    nbrs, side = {}, {}
    for x in range(1, h.n + 1):
        for sd in (0, 1):
            nbrs[(x, sd)] = [(y, 1 - sd) for y in h.neighbors(x)]
            side[(x, sd)] = sd
    mk = frozenset((m, sd) for m in marked for sd in (0, 1))
    return WalkSpace(nbrs, side, (s, 0), mk, C, d, n_vertices or 2 * h.n)


def walk_from_spec(spec: AncillarySpec, C: float = 4.0, d: float = 1.0) -> WalkSpace:
    """Discover the component of ``(S, 0)`` in ``H'`` through array queries only."""
    if not isinstance(spec.base, AdjacencyArray):
        raise TypeError("walk_from_spec needs an adjacency-array base")
    before = spec.counter.queries if spec.counter is not None else 0
    start = (S, 0)
    nbrs, side = {start: None}, {start: 0}
    q = deque([start])
    while q:
        x, sd = q.popleft()
        row = []
        for j in range(1, h_degree(spec, x) + 1):
            y = (ancillary_neighbors(spec, x, j), 1 - sd)
            row.append(y)
            if y not in side:
                side[y] = 1 - sd
                nbrs[y] = None
                q.append(y)
        nbrs[(x, sd)] = row
    after = spec.counter.queries if spec.counter is not None else 0
    m = sum(spec.base.degrees) // 2
    return WalkSpace(nbrs, side, start, frozenset({(T, 0), (T, 1)}), C, d,
                     n_vertices=2 * spec.num_vertices, dense=m >= spec.n, queries=after - before)


# --- operators --------------------------------------------------------------------

def walk_diffusion(v, w: WalkSpace) -> np.ndarray:
    """Dense ``D_v`` on the full walk space."""
    if v not in w.nbrs:
        raise KeyError(f"unknown vertex {v}")
    D = np.eye(w.dim)
    if v in w.marked:
        return D
    idx = w.block(v)
    z = w.zeta(v)
    D[np.ix_(idx, idx)] -= 2 * np.outer(z, z)
    return D


def walk_reflections(w: WalkSpace) -> tuple[np.ndarray, np.ndarray]:
    """``(R_A, R_B)`` from the ζ-projector formula."""
    out = []
    for sd in (0, 1):
        R = np.eye(w.dim)
        for v in w.active(sd):
            idx = w.block(v)
            z = w.zeta(v)
            R[np.ix_(idx, idx)] -= 2 * np.outer(z, z)
        out.append(R)
    return out[0], out[1]


def queries_per_step(d_m: int) -> int:
    """Array queries for one ``R_A R_B``: both layers, each ``V S_0 V^†`` with ``V`` an
    amplitude-amplification circuit padded to the max-degree schedule."""
    return 4 * (1 + 2 * aa_iterations(max(1, d_m)))


def build_RA_RB_walk(w: WalkSpace, d_m: int | None = None) -> tuple[np.ndarray, np.ndarray, int]:
    """``R_A``, ``R_B`` with each ``D_v = V S_0 V^†`` prepared by exact amplitude amplification."""
    if d_m is None:
        d_m = max(len(w.block(v)) for v in w.nbrs)
    out = []
    for sd in (0, 1):
        R = np.eye(w.dim, dtype=complex)
        for v in w.active(sd):
            idx = w.block(v)
            res = exact_amplitude_amplification(w.amplitudes(v))
            R[np.ix_(idx, idx)] = diffusion_from_phi(res.phi)
        out.append(R.real if np.abs(R.imag).max() < 1e-12 else R)
    return out[0], out[1], queries_per_step(d_m)


def _groups(w: WalkSpace, sd: int):
    ptr, idx, wt = [0], [], []
    for v in w.active(sd):
        idx.extend(w.block(v))
        wt.extend(w.zeta(v))
        ptr.append(len(idx))
    return np.asarray(ptr, np.int64), np.asarray(idx, np.int64), np.asarray(wt, np.float64)


def steps_for(d: float, n_walk: int, cw: float = 8.0) -> int:
    return int(math.ceil(cw * math.sqrt(d * n_walk)))


def zero_outcome_probability(w: WalkSpace, steps: int) -> float:
    """``||(1/T) sum_{j<T} U^j |e_s>||^2`` via the compiled power-sum kernel."""
    if steps <= 0:
        return 0.0
    x0 = np.zeros(w.dim)
    x0[0] = 1.0
    acc = kernels.walk_zero_phase_sum(x0, *_groups(w, 0), *_groups(w, 1), int(steps))
    acc /= steps
    return float(acc @ acc)


def zero_outcome_probability_eigen(w: WalkSpace, steps: int) -> float:
    """Reference: ``sum_λ |c_λ|^2 F_T(φ_λ)`` from a dense eigendecomposition."""
    RA, RB = walk_reflections(w)
    ev, Z = unitary_eig(RA @ RB)
    c2 = np.abs(Z[0, :]) ** 2
    phi = np.angle(ev)
    y = np.arange(steps)
    amp = np.exp(1j * phi[:, None] * y).sum(axis=1) / steps
    return float(np.sum(c2 * np.abs(amp) ** 2))


@dataclass
class WalkResult:
    p_path: float
    estimate: float
    detections: int
    trials: int
    steps: int
    walk_steps: int


def walk_detect(w: WalkSpace, d: float, trials: int, seed, steps: int | None = None,
                cw: float = 8.0) -> WalkResult:
    """Sample the outcome-0 test ``trials`` times; returns the empirical path rate."""
    if w.dense:
        raise DenseRegimeError("m >= n: the input must be rejected before any walk")
    if d <= 0:
        hit = float(w.s in w.marked)
        return WalkResult(hit, hit, int(hit) * trials, trials, 0, 0)
    if steps is None:
        steps = steps_for(d, w.n_vertices, cw)
    p = min(1.0, zero_outcome_probability(w, steps))
    rng = np.random.default_rng(seed)
    hits = int((rng.random(trials) < p).sum())
    return WalkResult(p, hits / trials if trials else p, hits, trials, steps, steps * trials)
