"""Graph representations and the implicit lifted graph used by the cycle reductions.

Vertices of an input graph are labelled ``1..n``.  The lifted graph ``H`` splits
every vertex ``v`` into ``s_mod`` copies ``v_b`` and adds two endpoints ``S`` and
``T`` hanging off the anchor copies ``k_0`` and ``k_1``.  ``H`` is never
materialised on the algorithm path: :func:`ancillary_edge_query` answers matrix
queries and :func:`ancillary_neighbors` answers array queries, each with at most
one query to the base graph.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

MAX_EXPLICIT_VERTICES = 2**12


class InvalidEdgeError(ValueError):
    pass


class SlotRangeError(IndexError):
    pass


class MalformedInputError(ValueError):
    pass


class SizeCapError(ValueError):
    pass


@dataclass
class QueryCounter:
    """Counts queries made to an input oracle."""

    queries: int = 0

    def tick(self, n: int = 1) -> None:
        self.queries += n


def _count(counter: QueryCounter | None) -> None:
    if counter is not None:
        counter.tick()


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``1..n``."""

    n: int
    edges: frozenset[tuple[int, int]]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        out = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise InvalidEdgeError(f"self-loop at vertex {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise InvalidEdgeError(f"edge ({u}, {v}) outside 1..{n}")
            key = (u, v) if u < v else (v, u)
            if key in out:
                raise InvalidEdgeError(f"duplicate edge {key}")
            out.add(key)
        return cls(n, frozenset(out))

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int, counter: QueryCounter | None = None) -> bool:
        _count(counter)
        return ((u, v) if u < v else (v, u)) in self.edges

    def neighbors(self, u: int) -> list[int]:
        return sorted(self._adj()[u])

    def degree(self, u: int) -> int:
        return len(self._adj()[u])

    def _adj(self) -> dict[int, set[int]]:
        adj = self.__dict__.get("_adj_cache")
        if adj is None:
            adj = {v: set() for v in range(1, self.n + 1)}
            for u, v in self.edges:
                adj[u].add(v)
                adj[v].add(u)
            object.__setattr__(self, "_adj_cache", adj)
        return adj

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.uint8)
        for u, v in self.edges:
            a[u - 1, v - 1] = a[v - 1, u - 1] = 1
        return a

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR neighbour arrays indexed by label (row 0 unused)."""
        adj = self._adj()
        indptr = np.zeros(self.n + 2, dtype=np.int64)
        for v in range(1, self.n + 1):
            indptr[v + 1] = indptr[v] + len(adj[v])
        indices = np.empty(int(indptr[-1]), dtype=np.int64)
        for v in range(1, self.n + 1):
            indices[indptr[v]:indptr[v + 1]] = sorted(adj[v])
        return indptr, indices


@dataclass(frozen=True)
class AdjacencyArray:
    """Adjacency-array model: degrees are free, neighbour slots cost one query each."""

    degrees: tuple[int, ...]
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.degrees)
        if len(self.neighbors) != n:
            raise MalformedInputError("need one neighbour array per vertex")
        for i, (d, f) in enumerate(zip(self.degrees, self.neighbors), start=1):
            if d != len(f):
                raise MalformedInputError(f"vertex {i}: degree {d} but {len(f)} neighbours")
            if len(set(f)) != len(f):
                raise MalformedInputError(f"vertex {i}: repeated neighbour (multigraph)")
            for v in f:
                if not 1 <= v <= n:
                    raise MalformedInputError(f"vertex {i}: neighbour {v} outside 1..{n}")
                if v == i:
                    raise MalformedInputError(f"vertex {i}: self-loop")
        for i, f in enumerate(self.neighbors, start=1):
            for v in f:
                if i not in self.neighbors[v - 1]:
                    raise MalformedInputError(f"asymmetric arrays: {v} in f_{i} but {i} not in f_{v}")

    @property
    def n(self) -> int:
        return len(self.degrees)

    @classmethod
    def from_graph(cls, g: Graph) -> "AdjacencyArray":
        nbrs = tuple(tuple(g.neighbors(v)) for v in range(1, g.n + 1))
        return cls(tuple(len(f) for f in nbrs), nbrs)

    def query(self, u: int, j: int, counter: QueryCounter | None = None) -> int:
        """``f_u(j)`` with 1-based slot ``j``."""
        if not 1 <= j <= self.degrees[u - 1]:
            raise SlotRangeError(f"slot {j} out of range for vertex {u}")
        _count(counter)
        return self.neighbors[u - 1][j - 1]

    def to_graph(self) -> Graph:
        edges = {(min(u, v), max(u, v)) for u, f in enumerate(self.neighbors, start=1) for v in f}
        return Graph(self.n, frozenset(edges))


def edge_count(arr: AdjacencyArray) -> tuple[int, bool]:
    """Edge count from the free degree data, and whether ``m >= n`` (guaranteed cycle)."""
    total = sum(arr.degrees)
    if total % 2:
        raise MalformedInputError(f"odd degree sum {total}")
    m = total // 2
    return m, m >= arr.n


# --- pairwise independent colouring -------------------------------------------------

@dataclass(frozen=True)
class VertexColoring:
    """``h(x) = <a, x> + b mod 2`` on ``m_bits``-bit labels; ``a`` is stored as a bitmask."""

    m_bits: int
    a: int
    b: int

    def color(self, x: int) -> int:
        return (bin(self.a & x).count("1") + self.b) & 1

    def colors(self, n: int) -> np.ndarray:
        """Colour of every label ``0..n`` as a uint8 array."""
        return np.array([self.color(x) for x in range(n + 1)], dtype=np.uint8)

    @staticmethod
    def family(m_bits: int) -> list["VertexColoring"]:
        return [VertexColoring(m_bits, a, b) for a in range(1 << m_bits) for b in (0, 1)]


@dataclass(frozen=True)
class FixedColoring:
    """Colouring given explicitly on a few labels (all others colour 0).

    Only the neighbours of the anchor are ever consulted, so the family can be
    simulated one induced pattern at a time.
    """

    m_bits: int
    assignment: tuple[tuple[int, int], ...]

    def color(self, x: int) -> int:
        return dict(self.assignment).get(x, 0)

    def colors(self, n: int) -> np.ndarray:
        out = np.zeros(n + 1, dtype=np.uint8)
        for v, c in self.assignment:
            out[v] = c
        return out


def coloring_bits(n: int) -> int:
    return max(1, math.ceil(math.log2(n + 1)))


def sample_coloring(n: int, seed) -> VertexColoring:
    if n < 1:
        raise ValueError("n must be positive")
    m_bits = coloring_bits(n)
    rng = np.random.default_rng(seed)
    a = int(rng.integers(0, 1 << m_bits))
    b = int(rng.integers(0, 2))
    return VertexColoring(m_bits, a, b)


def family_color_table(n: int) -> np.ndarray:
    """Colours of labels ``0..n`` under every family member, shape ``(2**(m+1), n+1)``."""
    m_bits = coloring_bits(n)
    x = np.arange(n + 1)
    a = np.repeat(np.arange(1 << m_bits), 2)
    b = np.tile([0, 1], 1 << m_bits)
    bits = np.bitwise_and(a[:, None], x[None, :])
    pop = np.zeros_like(bits)
    for i in range(m_bits):
        pop += (bits >> i) & 1
    return ((pop + b[:, None]) & 1).astype(np.uint8)


# --- lifted graph ---------------------------------------------------------------------

class HVertex(NamedTuple):
    """Vertex of ``H``; ``v == 0`` encodes the endpoints (``S`` has b=0, ``T`` has b=1)."""

    v: int
    b: int

    @property
    def tag(self) -> str:
        if self.v == 0:
            return "S" if self.b == 0 else "T"
        return "Lifted"

    def __str__(self) -> str:
        return self.tag if self.v == 0 else f"{self.v}_{self.b}"


S = HVertex(0, 0)
T = HVertex(0, 1)


@dataclass(frozen=True)
class AncillarySpec:
    base: Graph | AdjacencyArray
    s_mod: int
    k: int
    coloring: VertexColoring | FixedColoring | None = None
    counter: QueryCounter | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.s_mod not in (2, 3):
            raise ValueError("s_mod must be 2 or 3")
        if self.coloring is not None and self.s_mod != 3:
            raise ValueError("a colouring is only used with s_mod = 3")
        if not 1 <= self.k <= self.base.n:
            raise ValueError(f"anchor {self.k} outside 1..{self.base.n}")

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def num_vertices(self) -> int:
        return self.s_mod * self.base.n + 2

    def index(self, x: HVertex) -> int:
        """Dense 0-based index: S=0, T=1, v_b = 2 + (v-1)*s_mod + b."""
        if x.v == 0:
            return x.b
        return 2 + (x.v - 1) * self.s_mod + x.b

    def vertex(self, i: int) -> HVertex:
        if i < 2:
            return HVertex(0, i)
        v, b = divmod(i - 2, self.s_mod)
        return HVertex(v + 1, b)

    def vertices(self) -> list[HVertex]:
        return [self.vertex(i) for i in range(self.num_vertices)]

    def flips(self) -> np.ndarray:
        """Per-label flip bit for edges incident to ``k`` (all zero without a colouring)."""
        if self.coloring is None:
            return np.zeros(self.n + 1, dtype=np.uint8)
        return self.coloring.colors(self.n)


def orient_edge(spec: AncillarySpec, u: int, v: int) -> tuple[int, int]:
    """Direction ``(tail, head)`` of edge ``{u, v}``: low label to high, flipped at ``k`` by colour."""
    if u == v:
        raise InvalidEdgeError(f"degenerate edge ({u}, {u})")
    n = spec.n
    if not (1 <= u <= n and 1 <= v <= n):
        raise InvalidEdgeError(f"edge ({u}, {v}) outside 1..{n}")
    tail, head = (u, v) if u < v else (v, u)
    if spec.coloring is not None and spec.k in (u, v):
        other = v if u == spec.k else u
        if spec.coloring.color(other):
            tail, head = head, tail
    return tail, head


def _lift_residue(spec: AncillarySpec, u: int, b: int, v: int) -> int:
    tail, _ = orient_edge(spec, u, v)
    step = 1 if tail == u else -1
    return (b + step) % spec.s_mod


def ancillary_edge_query(spec: AncillarySpec, x: HVertex, y: HVertex) -> int:
    """Adjacency of ``x`` and ``y`` in ``H``, using at most one base matrix query."""
    if x.v == 0 or y.v == 0:
        if x.v == 0 and y.v == 0:
            return 0
        special, other = (x, y) if x.v == 0 else (y, x)
        return int(other == HVertex(spec.k, special.b))
    if x.v == y.v:
        return 0
    if _lift_residue(spec, x.v, x.b, y.v) != y.b:
        return 0
    return int(spec.base.has_edge(x.v, y.v, spec.counter))


def h_degree(spec: AncillarySpec, x: HVertex) -> int:
    if x.v == 0:
        return 1
    d = spec.base.degrees[x.v - 1] if isinstance(spec.base, AdjacencyArray) else spec.base.degree(x.v)
    return d + int(x.v == spec.k and x.b in (0, 1))


def ancillary_neighbors(spec: AncillarySpec, x: HVertex, j: int) -> HVertex:
    """``g_x(j)``: the ``j``-th neighbour of ``x`` in ``H`` (1-based slot)."""
    if not isinstance(spec.base, AdjacencyArray):
        raise TypeError("ancillary_neighbors needs an adjacency-array base")
    deg = h_degree(spec, x)
    if not 1 <= j <= deg:
        raise SlotRangeError(f"slot {j} out of range 1..{deg} for {x}")
    if x.v == 0:
        return HVertex(spec.k, x.b)
    d_u = spec.base.degrees[x.v - 1]
    if j == d_u + 1:
        # dangling special edge of k_0 / k_1
        return HVertex(0, x.b)
    v = spec.base.query(x.v, j, spec.counter)
    return HVertex(v, _lift_residue(spec, x.v, x.b, v))


def lifted_edges(spec: AncillarySpec) -> list[tuple[int, int]]:
    """All edges of ``H`` as pairs of dense indices ``(i, j)`` with ``i < j``."""
    g = spec.base.to_graph() if isinstance(spec.base, AdjacencyArray) else spec.base
    out = [(0, spec.index(HVertex(spec.k, 0))), (1, spec.index(HVertex(spec.k, 1)))]
    for u, v in g.sorted_edges():
        tail, head = orient_edge(spec, u, v)
        for b in range(spec.s_mod):
            i = spec.index(HVertex(tail, b))
            j = spec.index(HVertex(head, (b + 1) % spec.s_mod))
            out.append((min(i, j), max(i, j)))
    return sorted(out)


def build_ancillary_explicit(spec: AncillarySpec) -> Graph:
    """Materialise ``H`` (test oracle only); label of vertex ``x`` is ``spec.index(x) + 1``."""
    if spec.n > MAX_EXPLICIT_VERTICES:
        raise SizeCapError(f"base graph has {spec.n} > {MAX_EXPLICIT_VERTICES} vertices")
    edges = [(i + 1, j + 1) for i, j in lifted_edges(spec)]
    return Graph.from_edges(spec.num_vertices, edges)


def bipartite_double(h: Graph, s_vertex: int, t_vertex: int) -> tuple[Graph, int, int]:
    """Bipartite double cover: ``(x, side)`` gets label ``2(x-1) + side + 1``."""

    def lab(x: int, side: int) -> int:
        return 2 * (x - 1) + side + 1

    edges = []
    for u, v in h.edges:
        edges.append((lab(u, 0), lab(v, 1)))
        edges.append((lab(v, 0), lab(u, 1)))
    return Graph.from_edges(2 * h.n, edges), lab(s_vertex, 0), lab(t_vertex, 1)


def double_label(x: int, side: int) -> int:
    return 2 * (x - 1) + side + 1


# --- parity gadget --------------------------------------------------------------------

CYCLE_TEST = "cycle-test"
BIPARTITE_TEST = "bipartite-test"


def gadget_label(i: int, b: int) -> int:
    return 2 * i + b + 1


def parity_gadget(x: Sequence[int] | str, variant: str = CYCLE_TEST) -> AdjacencyArray:
    """Two-level permutation graph whose cycle structure encodes the parity of ``x``.

    Column ``i`` holds ``v_{i,0}, v_{i,1}``; ``v_{i,b}`` is joined to
    ``v_{i+1, b xor x_i}`` (columns wrap around).
    """
    bits = [int(c) for c in x]
    if any(c not in (0, 1) for c in bits):
        raise ValueError("x must be a bit string")
    p = len(bits)
    if p < 2:
        raise ValueError("need p >= 2")
    if variant == BIPARTITE_TEST:
        if p % 2 == 0:
            bits = bits + [0]
    elif variant == CYCLE_TEST:
        if p < 3:
            # p = 2 produces parallel edges when x has even parity
            raise ValueError("cycle-test gadget needs p >= 3")
    else:
        raise ValueError(f"unknown variant {variant!r}")
    q = len(bits)
    edges = set()
    for i, xi in enumerate(bits):
        for b in (0, 1):
            u, v = gadget_label(i, b), gadget_label((i + 1) % q, b ^ xi)
            edges.add((min(u, v), max(u, v)))
    if variant == CYCLE_TEST:
        u, v = gadget_label(0, 0), gadget_label(1, bits[0])
        edges.discard((min(u, v), max(u, v)))
    return AdjacencyArray.from_graph(Graph.from_edges(2 * q, edges))


def parity(x: Sequence[int] | str) -> int:
    return sum(int(c) for c in x) & 1


def _base_neighbors(spec: AncillarySpec, u: int) -> Sequence[int]:
    if isinstance(spec.base, AdjacencyArray):
        return spec.base.neighbors[u - 1]
    return spec.base.neighbors(u)


def lifted_component_edges(spec: AncillarySpec, roots: Iterable[HVertex] = (S, T)) -> list[tuple[int, int]]:
    """Edges of ``H`` reachable from ``roots``, as 1-based label pairs (label = index + 1).

    Walks ``H`` implicitly from the base neighbour lists; the rest of ``H`` is never built.
    """
    seen = set()
    q = deque()
    for r in roots:
        i = spec.index(r)
        if i not in seen:
            seen.add(i)
            q.append(r)
    edges = set()
    while q:
        x = q.popleft()
        i = spec.index(x)
        if x.v == 0:
            nb = [HVertex(spec.k, x.b)]
        else:
            nb = [HVertex(v, _lift_residue(spec, x.v, x.b, v)) for v in _base_neighbors(spec, x.v)]
            if x.v == spec.k and x.b in (0, 1):
                nb.append(HVertex(0, x.b))
        for y in nb:
            j = spec.index(y)
            edges.add((min(i, j) + 1, max(i, j) + 1))
            if j not in seen:
                seen.add(j)
                q.append(y)
    return sorted(edges)
