"""Brute-force classical ground truth: cycles, bipartiteness, connectivity, imbalance."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .graphs import AdjacencyArray, AncillarySpec, Graph, SizeCapError, orient_edge

MAX_ENUM_VERTICES = 10


class InvalidWitnessError(ValueError):
    pass


@dataclass(frozen=True)
class CycleWitness:
    vertices: tuple[int, ...]
    p: int = 0
    q: int = 0

    @property
    def D(self) -> int:
        return self.p - self.q

    def __len__(self) -> int:
        return len(self.vertices)

    def edges(self) -> list[tuple[int, int]]:
        vs = self.vertices
        return [(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]


def _as_graph(g: Graph | AdjacencyArray) -> Graph:
    return g.to_graph() if isinstance(g, AdjacencyArray) else g


def _count_directions(vertices: Sequence[int], spec: AncillarySpec | None) -> tuple[int, int]:
    p = q = 0
    for i in range(len(vertices)):
        u, v = vertices[i], vertices[(i + 1) % len(vertices)]
        if spec is None:
            forward = u < v
        else:
            forward = orient_edge(spec, u, v) == (u, v)
        if forward:
            p += 1
        else:
            q += 1
    return p, q


def _witness(vertices: Sequence[int]) -> CycleWitness:
    p, q = _count_directions(vertices, None)
    return CycleWitness(tuple(vertices), p, q)


def has_cycle(g: Graph | AdjacencyArray) -> CycleWitness | None:
    """First cycle met by an iterative DFS that visits lowest labels first."""
    g = _as_graph(g)
    parent = {}
    for root in range(1, g.n + 1):
        if root in parent:
            continue
        parent[root] = 0
        stack = [(root, iter(g.neighbors(root)))]
        on_stack = {root}
        path = [root]
        while stack:
            u, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                on_stack.discard(u)
                path.pop()
                continue
            if nxt == parent[u]:
                continue
            if nxt in on_stack:
                i = path.index(nxt)
                return _witness(path[i:])
            if nxt in parent:
                continue
            parent[nxt] = u
            stack.append((nxt, iter(g.neighbors(nxt))))
            on_stack.add(nxt)
            path.append(nxt)
    return None


def is_bipartite(g: Graph | AdjacencyArray) -> dict[int, int] | CycleWitness:
    """BFS 2-colouring, or an odd cycle when none exists."""
    g = _as_graph(g)
    side: dict[int, int] = {}
    parent: dict[int, int] = {}
    depth: dict[int, int] = {}
    for root in range(1, g.n + 1):
        if root in side:
            continue
        side[root], parent[root], depth[root] = 0, 0, 0
        q = deque([root])
        while q:
            u = q.popleft()
            for v in g.neighbors(u):
                if v not in side:
                    side[v], parent[v], depth[v] = side[u] ^ 1, u, depth[u] + 1
                    q.append(v)
                elif side[v] == side[u]:
                    return _witness(_join_tree_paths(u, v, parent, depth))
    return side


def _join_tree_paths(u, v, parent, depth):
    left, right = [u], [v]
    while depth[left[-1]] > depth[right[-1]]:
        left.append(parent[left[-1]])
    while depth[right[-1]] > depth[left[-1]]:
        right.append(parent[right[-1]])
    while left[-1] != right[-1]:
        left.append(parent[left[-1]])
        right.append(parent[right[-1]])
    return left + right[-2::-1]


def st_connected(g: Graph | AdjacencyArray, s: int, t: int) -> int | None:
    g = _as_graph(g)
    if not (1 <= s <= g.n and 1 <= t <= g.n):
        raise ValueError("s and t must be vertices")
    dist = {s: 0}
    q = deque([s])
    while q:
        u = q.popleft()
        if u == t:
            return dist[u]
        for v in g.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return None


def component_of(g: Graph, v: int) -> set[int]:
    seen = {v}
    q = deque([v])
    while q:
        u = q.popleft()
        for w in g.neighbors(u):
            if w not in seen:
                seen.add(w)
                q.append(w)
    return seen


def is_connected(g: Graph) -> bool:
    return g.n == 0 or len(component_of(g, 1)) == g.n


def simple_cycles(g: Graph | AdjacencyArray) -> list[tuple[int, ...]]:
    """All simple cycles (length >= 3), each once.

    Canonical form: starts at its smallest vertex and ``c[1] < c[-1]``.
    """
    g = _as_graph(g)
    if g.n > MAX_ENUM_VERTICES:
        raise SizeCapError(f"cycle enumeration capped at {MAX_ENUM_VERTICES} vertices")
    adj = {v: [w for w in g.neighbors(v)] for v in range(1, g.n + 1)}
    out = []
    for start in range(1, g.n + 1):
        # only extend through vertices larger than the start
        path = [start]
        on_path = {start}

        def extend(u):
            for w in adj[u]:
                if w == start and len(path) >= 3 and path[1] < path[-1]:
                    out.append(tuple(path))
                elif w > start and w not in on_path:
                    path.append(w)
                    on_path.add(w)
                    extend(w)
                    path.pop()
                    on_path.discard(w)

        extend(start)
    return out


def cycle_imbalance(spec: AncillarySpec, w: CycleWitness | Sequence[int]) -> int:
    """``(p - q) mod s_mod`` for the cycle traversed in stored order."""
    vertices = tuple(w.vertices if isinstance(w, CycleWitness) else w)
    g = _as_graph(spec.base)
    if len(vertices) < 3 or len(set(vertices)) != len(vertices):
        raise InvalidWitnessError("a cycle needs at least 3 distinct vertices")
    for i in range(len(vertices)):
        if not g.has_edge(vertices[i], vertices[(i + 1) % len(vertices)]):
            raise InvalidWitnessError(f"{vertices} is not a cycle of the base graph")
    p, q = _count_directions(vertices, spec)
    return (p - q) % spec.s_mod


def detectable_cycle_predicate(spec: AncillarySpec) -> bool:
    """True iff some cycle in ``k``'s component has imbalance not divisible by ``s_mod``."""
    g = _as_graph(spec.base)
    if g.n > MAX_ENUM_VERTICES:
        raise SizeCapError(f"predicate capped at {MAX_ENUM_VERTICES} vertices")
    comp = component_of(g, spec.k)
    for c in simple_cycles(g):
        if c[0] in comp and cycle_imbalance(spec, c) != 0:
            return True
    return False


# --- vectorised sweep helpers ----------------------------------------------------------

def cycle_incidence(g: Graph, cycles: Sequence[Sequence[int]]) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Signed incidence: entry +1 if the cycle walks the edge low->high, -1 if high->low."""
    edges = g.sorted_edges()
    pos = {e: i for i, e in enumerate(edges)}
    mat = np.zeros((len(cycles), len(edges)), dtype=np.int64)
    for r, c in enumerate(cycles):
        for i in range(len(c)):
            u, v = c[i], c[(i + 1) % len(c)]
            if u < v:
                mat[r, pos[(u, v)]] += 1
            else:
                mat[r, pos[(v, u)]] -= 1
    return mat, edges


def flip_signs(edges: Sequence[tuple[int, int]], k: int, colors: np.ndarray | None) -> np.ndarray:
    """+1 for edges keeping the canonical direction, -1 for edges flipped at ``k``."""
    out = np.ones(len(edges), dtype=np.int64)
    if colors is None:
        return out
    for i, (u, v) in enumerate(edges):
        if u == k and colors[v]:
            out[i] = -1
        elif v == k and colors[u]:
            out[i] = -1
    return out


# --- graph catalogs ---------------------------------------------------------------------

def all_pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(1, n + 1), 2))


def connected_graphs(n: int) -> Iterator[Graph]:
    """Every labeled connected graph on ``n`` vertices (no isomorphism reduction)."""
    pairs = all_pairs(n)
    m = len(pairs)
    for mask in range(1 << m):
        if bin(mask).count("1") < n - 1:
            continue
        edges = [pairs[i] for i in range(m) if mask >> i & 1]
        g = Graph(n, frozenset(edges))
        if is_connected(g):
            yield g


def random_connected_graphs(n: int, count: int, seed, p: float = 0.4) -> list[Graph]:
    """Rejection-sampled connected G(n, p) graphs."""
    rng = np.random.default_rng(seed)
    pairs = all_pairs(n)
    out = []
    while len(out) < count:
        keep = rng.random(len(pairs)) < p
        g = Graph(n, frozenset(e for e, k in zip(pairs, keep) if k))
        if is_connected(g):
            out.append(g)
    return out


def random_graph(n: int, rng, p: float = 0.4) -> Graph:
    pairs = all_pairs(n)
    keep = rng.random(len(pairs)) < p
    return Graph(n, frozenset(e for e, k in zip(pairs, keep) if k))


def random_forest(n: int, rng, keep_prob: float = 0.8) -> Graph:
    """Random recursive tree with some edges dropped; vertex labels shuffled."""
    perm = rng.permutation(n) + 1
    edges = []
    for i in range(1, n):
        if rng.random() < keep_prob:
            j = int(rng.integers(0, i))
            a, b = int(perm[i]), int(perm[j])
            edges.append((min(a, b), max(a, b)))
    return Graph(n, frozenset(edges))
