"""Span programs, with the st-connectivity program and its balanced factorisation.

Slot layout of the st-connectivity program on ``n`` vertices (``C(n,2) + 1``
slots): slot 0 is the scaled target ``st``, slot 1 the never-available ``s̄t``,
then one slot per unordered pair ``(x, y) != (s, t)`` in lexicographic order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .constants import RANK_TOL, ZERO_PHASE_TOL
from .graphs import Graph

ST_SLOT = 0
NEVER_SLOT = 1


class WitnessError(ValueError):
    pass


# --- generic span programs ---------------------------------------------------------

@dataclass
class SpanProgramInstance:
    """Target ``tau``, input vectors as columns, and an availability rule.

    ``available(x)`` returns a boolean mask over the columns for input ``x``.
    """

    target: np.ndarray
    vectors: np.ndarray
    available: Callable[[object], np.ndarray]

    def available_columns(self, x) -> np.ndarray:
        mask = np.asarray(self.available(x), dtype=bool)
        if mask.shape != (self.vectors.shape[1],):
            raise ValueError(f"availability mask has shape {mask.shape}, expected ({self.vectors.shape[1]},)")
        return self.vectors[:, mask]


def _in_span(cols: np.ndarray, target: np.ndarray) -> tuple[bool, np.ndarray]:
    if cols.shape[1] == 0:
        return bool(np.linalg.norm(target) <= RANK_TOL), np.zeros(0)
    coef, *_ = np.linalg.lstsq(cols, target, rcond=None)
    resid = np.linalg.norm(cols @ coef - target)
    scale = max(1.0, np.linalg.norm(target))
    return bool(resid <= RANK_TOL * scale * 1e3), coef


def evaluate(p: "SpanProgramInstance | STProgram", x) -> bool:
    """Accept iff the target is in the span of the available vectors."""
    if isinstance(p, STProgram):
        p = p.span_program()
    cols = p.available_columns(x)
    if cols.shape[0] != p.target.shape[0]:
        raise ValueError("dimension mismatch between target and input vectors")
    return _in_span(cols, p.target)[0]


def min_norm_witness(p: "SpanProgramInstance | STProgram", x) -> np.ndarray | None:
    """Least-norm positive witness over the full column set (zeros on unavailable slots)."""
    if isinstance(p, STProgram):
        p = p.span_program()
    mask = np.asarray(p.available(x), dtype=bool)
    ok, coef = _in_span(p.vectors[:, mask], p.target)
    if not ok:
        return None
    w = np.zeros(p.vectors.shape[1])
    w[mask] = coef
    return w


# --- st-connectivity ---------------------------------------------------------------

@dataclass(frozen=True)
class WitnessPair:
    positive: np.ndarray | None = None
    negative: np.ndarray | None = None
    W1: float | None = None
    W0: float | None = None

    def __post_init__(self):
        if (self.positive is None) == (self.negative is None):
            raise WitnessError("exactly one of positive/negative must be present")


@dataclass(frozen=True)
class STProgram:
    n: int
    s_vertex: int
    t_vertex: int
    alpha: float = 1.0
    slots: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        if self.s_vertex == self.t_vertex:
            raise ValueError("s and t must differ")
        if not (1 <= self.s_vertex <= self.n and 1 <= self.t_vertex <= self.n):
            raise ValueError("s, t outside 1..n")
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        st = self.st_pair
        pairs = [(x, y) for x in range(1, self.n + 1) for y in range(x + 1, self.n + 1) if (x, y) != st]
        object.__setattr__(self, "slots", (("st",), ("nst",)) + tuple(pairs))

    @property
    def st_pair(self) -> tuple[int, int]:
        return (min(self.s_vertex, self.t_vertex), max(self.s_vertex, self.t_vertex))

    @property
    def num_slots(self) -> int:
        return math.comb(self.n, 2) + 1

    def slot_index(self) -> dict[tuple[int, int], int]:
        return {pair: i for i, pair in enumerate(self.slots) if len(pair) == 2}

    def target(self) -> np.ndarray:
        tau = np.zeros(self.n)
        tau[self.t_vertex - 1] += 1.0
        tau[self.s_vertex - 1] -= 1.0
        return tau

    def check_input(self, x: Graph) -> None:
        if x.n != self.n:
            raise ValueError(f"input graph has {x.n} vertices, program has {self.n}")
        if self.st_pair in x.edges:
            raise ValueError("s and t must not be adjacent")

    def availability(self, x: Graph) -> np.ndarray:
        """Mask over all ``C(n,2)+1`` slots; the ``st`` slot counts as available."""
        self.check_input(x)
        mask = np.zeros(self.num_slots, dtype=bool)
        mask[ST_SLOT] = True
        idx = self.slot_index()
        for e in x.edges:
            mask[idx[e]] = True
        return mask

    def pair_vectors(self) -> np.ndarray:
        """``|y> - |x>`` for every pair slot (st slots zero), shape ``(n, slots)``."""
        m = np.zeros((self.n, self.num_slots))
        for j, pair in enumerate(self.slots):
            if len(pair) == 2:
                x, y = pair
                m[y - 1, j] = 1.0
                m[x - 1, j] = -1.0
        return m

    def span_program(self) -> SpanProgramInstance:
        """The plain program: pair vectors plus the never-available vector."""
        vecs = self.pair_vectors()
        vecs[:, NEVER_SLOT] = math.sqrt(1 - 1 / self.alpha**2) * self.target()

        def avail(x):
            mask = self.availability(x)
            mask[ST_SLOT] = False
            return mask

        return SpanProgramInstance(self.target(), vecs, avail)


def build_M_tilde(p: STProgram) -> np.ndarray:
    if p.alpha < 1:
        raise ValueError("alpha must be >= 1")
    m = p.pair_vectors()
    tau = p.target()
    m[:, ST_SLOT] = tau / p.alpha
    m[:, NEVER_SLOT] = math.sqrt(1 - 1 / p.alpha**2) * tau
    return m


def _path_edges(path: Sequence[int]) -> list[tuple[int, int]]:
    return [(path[i], path[i + 1]) for i in range(len(path) - 1)]


def positive_witness_from_path(p: STProgram, path: Sequence[int], x: Graph | None = None) -> WitnessPair:
    """Unit-weight witness along an s-t path; ``W1`` equals the path length."""
    if len(path) < 2 or path[0] != p.s_vertex or path[-1] != p.t_vertex:
        raise WitnessError("path must run from s to t")
    if len(set(path)) != len(path):
        raise WitnessError("path repeats a vertex")
    idx = p.slot_index()
    w = np.zeros(p.num_slots)
    for u, v in _path_edges(path):
        key = (min(u, v), max(u, v))
        if key not in idx:
            raise WitnessError(f"step {u}-{v} is not an input pair")
        if x is not None and key not in x.edges:
            raise WitnessError(f"edge {key} is not available")
        w[idx[key]] = 1.0 if u < v else -1.0
    return WitnessPair(positive=w, W1=float(w @ w))


def negative_witness_from_components(p: STProgram, x: Graph) -> WitnessPair:
    """Indicator of t's component; ``W0`` is the squared norm of ``M^T w'`` over all pairs."""
    from .oracles import component_of

    p.check_input(x)
    comp = component_of(x, p.t_vertex)
    if p.s_vertex in comp:
        raise WitnessError("input accepts: s and t are connected")
    wneg = np.zeros(p.n)
    wneg[[v - 1 for v in comp]] = 1.0
    tau = p.target()
    if abs(wneg @ tau - 1) > 1e-12:
        raise WitnessError("negative witness does not satisfy <w'|tau> = 1")
    avail = p.availability(x)
    vecs = p.pair_vectors()
    if np.any(np.abs(wneg @ vecs[:, avail]) > 1e-12):
        raise WitnessError("negative witness is not orthogonal to an available vector")
    # full program over all C(n,2) pairs, the st pair included as an unavailable vector
    full = np.column_stack([vecs[:, 2:], tau]) if p.num_slots > 2 else tau[:, None]
    W0 = float(np.sum((wneg @ full) ** 2))
    return WitnessPair(negative=wneg, W0=W0)


def factorize(p: STProgram) -> tuple[np.ndarray, np.ndarray]:
    """Isometries ``A`` (n columns) and ``B`` (one column per slot) with ``A^T B = M~ / sqrt(2(n-1))``.

    Both live in ``R^n (x) R^slots`` with index ``vertex * slots + slot``.
    """
    n, ns = p.n, p.num_slots
    if n < 3:
        raise ValueError("factorisation needs n >= 3")
    dim = n * ns
    A = np.zeros((dim, n))
    B = np.zeros((dim, ns))
    r = 1 / math.sqrt(n - 1)
    h = 1 / math.sqrt(2)
    s, t = p.s_vertex - 1, p.t_vertex - 1
    for j, pair in enumerate(p.slots):
        if len(pair) == 2:
            x, y = pair[0] - 1, pair[1] - 1
            A[x * ns + j, x] = r
            A[y * ns + j, y] = r
            B[x * ns + j, j] = -h
            B[y * ns + j, j] = h
    weights = {ST_SLOT: r / p.alpha, NEVER_SLOT: r * math.sqrt(1 - 1 / p.alpha**2)}
    for j, wgt in weights.items():
        A[s * ns + j, s] = wgt
        A[t * ns + j, t] = wgt
        B[s * ns + j, j] = -h
        B[t * ns + j, j] = h
    return A, B


def m_prime(p: STProgram) -> np.ndarray:
    return build_M_tilde(p) / math.sqrt(2 * (p.n - 1))


def delta_spectrum(p: STProgram) -> np.ndarray:
    """Sorted eigenvalues of ``Delta = M' M'^T``."""
    if p.n < 3:
        raise ValueError("need n >= 3")
    mp = m_prime(p)
    return np.sort(np.linalg.eigvalsh(mp @ mp.T))


def spectrum_report(p: STProgram) -> dict:
    ev = delta_spectrum(p)
    A, B = factorize(p)
    mp = m_prime(p)
    sv = np.linalg.svd(mp, compute_uv=False)
    nonzero = sv[sv > 1e-9]
    vals, counts = np.unique(np.round(ev, 9) + 0.0, return_counts=True)
    return {
        "n": p.n,
        "alpha": p.alpha,
        "eigenvalues": ev.tolist(),
        "multiplicities": {f"{v:.9f}": int(c) for v, c in zip(vals, counts)},
        "gap": float(ev[ev > 1e-9].min()),
        "expected_nonzero": p.n / (2 * (p.n - 1)),
        "min_nonzero_singular_value": float(nonzero.min()),
        "factorization_residual": float(np.abs(A.T @ B - mp).max()),
    }


# --- theta-window acceptance without the dense walk --------------------------------

def alpha_for(w1_bound: float, factor: float) -> float:
    return max(1.0, factor * math.sqrt(w1_bound))


def theta_for(w0_bound: float, w1_bound: float, c_prime: float) -> float:
    return 1.0 / (c_prime * math.sqrt(w0_bound * w1_bound))


def acceptance_from_edges(n: int, s: int, t: int, edges: Iterable[tuple[int, int]], alpha: float,
                          theta: float) -> float:
    """Weight of the ``st`` slot on eigenphases within ``[-theta, theta]`` of ``U = (2Λ - I)(2Π_x - I)``.

    Uses that ``M~ M~^T = n I - J``: the compression of the row-space projector to
    the available slots is ``M_sub^T M_sub / n`` and each of its eigenvalues ``mu``
    carries phases ``±2 arcsin(sqrt(mu))``.  Only edges in the components of
    ``s`` or ``t`` couple to the ``st`` slot, so passing just those is exact.
    """
    edges = list(edges)
    verts = sorted({s, t} | {v for e in edges for v in e})
    pos = {v: i for i, v in enumerate(verts)}
    cols = np.zeros((len(verts), len(edges) + 1))
    cols[pos[t], 0] = 1 / alpha
    cols[pos[s], 0] = -1 / alpha
    for j, (x, y) in enumerate(edges, start=1):
        cols[pos[y], j] = 1.0
        cols[pos[x], j] = -1.0
    gram = cols.T @ cols / n
    mu, vec = np.linalg.eigh(gram)
    mu = np.clip(mu, 0.0, 1.0)
    phase = 2 * np.arcsin(np.sqrt(mu))
    keep = phase <= theta + ZERO_PHASE_TOL
    return float(np.sum(vec[0, keep] ** 2))
