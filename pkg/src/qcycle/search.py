"""Outer algorithms: QSearch, the doubling schedule, majority amplification and the
three end-to-end deciders.

Quantum subroutines are simulated exactly at the level of their acceptance
probabilities: for each (anchor ``k``, length guess ``d``) the single-run
acceptance probability is computed from the exact spectrum, averaged over the
whole colouring family when a colouring is drawn, and then boosted by the
majority rule with an exact binomial tail.  Grover search dynamics use the
closed-form rotation.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.stats import binom

from . import oracles
from .constants import C_GEO, resolve
from .graphs import (AdjacencyArray, AncillarySpec, FixedColoring, Graph, QueryCounter,
                     coloring_bits, edge_count, family_color_table, lifted_component_edges)
from .spanprog import acceptance_from_edges, alpha_for, theta_for
from .walk import queries_per_step, steps_for, walk_from_spec, zero_outcome_probability

FOREST = "forest"
HAS_CYCLE = "has-cycle"
BIPARTITE = "bipartite"
ODD_CYCLE = "odd-cycle"


# --- bookkeeping ------------------------------------------------------------------

@dataclass
class OracleCounter:
    queries: int = 0
    grover_iterations: int = 0
    walk_steps: int = 0
    a_calls: int = 0
    seed: int | None = None

    def merge(self, other: "OracleCounter") -> None:
        self.queries += other.queries
        self.grover_iterations += other.grover_iterations
        self.walk_steps += other.walk_steps
        self.a_calls += other.a_calls


@dataclass
class DecisionReport:
    verdict: str
    vertex: int | None = None
    witness: object = None
    counters: OracleCounter = field(default_factory=OracleCounter)
    trace: list = field(default_factory=list)
    seed: int | None = None
    model: str = "matrix"
    note: str = ""

    @property
    def property_holds(self) -> bool:
        return self.verdict in (FOREST, BIPARTITE)

    def to_dict(self) -> dict:
        w = self.witness
        if isinstance(w, oracles.CycleWitness):
            w = {"cycle": list(w.vertices), "length": len(w)}
        elif isinstance(w, dict):
            w = {"coloring": {str(k): v for k, v in sorted(w.items())}}
        return {
            "verdict": self.verdict,
            "vertex": self.vertex,
            "witness": w,
            "counters": asdict(self.counters),
            "trace": self.trace,
            "seed": self.seed,
            "model": self.model,
            "note": self.note,
        }


# --- QSearch ---------------------------------------------------------------------

def grover_success_closed(N: int, t: int, j: int) -> float:
    if t == 0:
        return 0.0
    theta = math.asin(math.sqrt(t / N))
    return math.sin((2 * j + 1) * theta) ** 2


def grover_success_statevector(N: int, marked, j: int) -> float:
    """Probability of measuring a marked index after ``j`` Grover iterations, by statevector."""
    if N > 1024:
        raise ValueError("statevector mode is limited to N <= 1024")
    mask = np.zeros(N, dtype=bool)
    mask[list(marked)] = True
    psi = np.full(N, 1 / math.sqrt(N))
    for _ in range(j):
        psi[mask] *= -1
        psi = 2 * psi.mean() - psi
    return float(np.sum(psi[mask] ** 2))


@dataclass
class QSearchResult:
    index: int | None
    iterations: int
    measurements: int


def qsearch(f: Callable[[int], bool] | np.ndarray, N: int, seed=None, lam: float = 6 / 5,
            iteration_budget: float = math.inf, mode: str = "closed", rng=None,
            counter: OracleCounter | None = None, max_measurements: int | None = None,
            probs: np.ndarray | None = None) -> QSearchResult:
    """Search with an unknown number of solutions.

    Each round evaluates ``f`` on every index (a fresh sample when ``f`` is
    random), draws ``j`` uniformly from ``[0, m)``, simulates ``j`` Grover
    iterations and measures.  Stops once the iteration count reaches the budget.
    With ``probs`` given, index ``i`` is a solution in a round with probability
    ``probs[i]`` (a randomised predicate).
    """
    if not 1 < lam < 4 / 3:
        raise ValueError("lambda must lie in (1, 4/3)")
    if N < 1:
        raise ValueError("N must be positive")
    if iteration_budget is None:
        raise ValueError("an iteration budget is mandatory")
    rng = rng if rng is not None else np.random.default_rng(seed)
    if max_measurements is None:
        # guards the N <= 2 case where j can stay 0 forever
        max_measurements = 64 + 4 * int(min(iteration_budget, 1e6))
    m = 1.0
    iters = meas = 0
    sqrtN = math.sqrt(N)
    while iters < iteration_budget and meas < max_measurements:
        if probs is not None:
            mask = rng.random(N) < probs
        elif isinstance(f, np.ndarray):
            mask = f.astype(bool)
        else:
            mask = np.fromiter((bool(f(i)) for i in range(N)), dtype=bool, count=N)
        sol = np.flatnonzero(mask)
        j = int(rng.integers(0, int(math.ceil(m)))) if m > 1 else 0
        if mode == "statevector":
            p = grover_success_statevector(N, sol, j)
        else:
            p = grover_success_closed(N, len(sol), j)
        iters += j
        meas += 1
        if counter is not None:
            counter.grover_iterations += j
            counter.a_calls += 2 * j + 1
        if rng.random() < p:
            return QSearchResult(int(rng.choice(sol)), iters, meas)
        m = min(lam * m, sqrtN)
    return QSearchResult(None, iters, meas)


# --- majority amplification ------------------------------------------------------

def _kl(a: float, b: float) -> float:
    return a * math.log(a / b) + (1 - a) * math.log((1 - a) / (1 - b))


def repetitions(epsilon: float, p_yes: float = 0.45, p_no: float = 0.10, threshold: float = 0.30) -> int:
    """Repetitions so that both one-sided Chernoff tails are at most ``epsilon``."""
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    rate = min(_kl(threshold, p_yes), _kl(threshold, p_no))
    return int(math.ceil(math.log(1 / epsilon) / rate))


def boosted_accept(p: float, r: int, threshold: float = 0.30) -> float:
    """Probability that at least ``ceil(threshold * r)`` of ``r`` runs accept."""
    need = int(math.ceil(threshold * r))
    return float(binom.sf(need - 1, r, min(max(p, 0.0), 1.0)))


def amplify_majority(A: Callable[[np.random.Generator], bool], epsilon: float, threshold: float = 0.30,
                     p_yes: float = 0.45, p_no: float = 0.10) -> Callable[[np.random.Generator], bool]:
    """Run ``A`` ``r`` times and accept on at least ``threshold * r`` positives."""
    r = repetitions(epsilon, p_yes, p_no, threshold)
    need = int(math.ceil(threshold * r))

    def boosted(rng):
        return sum(bool(A(rng)) for _ in range(r)) >= need

    boosted.repetitions = r
    return boosted


# --- doubling schedule -----------------------------------------------------------

def doubling_search(n: int, accept_prob: Callable[[int, int], float], C2: float = 16.0, seed=None,
                    lam: float = 6 / 5, counter: OracleCounter | None = None, trace: list | None = None,
                    rng=None) -> int | None:
    """Guess ``d = 2^i`` for ``i = 1..ceil(log2 n)`` and search each with budget ``C2 sqrt(n/2^i)``.

    ``accept_prob(k, d)`` is the boosted acceptance probability of vertex ``k``
    (1-based); each search round samples every vertex's verdict from it.
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    counter = counter if counter is not None else OracleCounter()
    rounds = int(math.ceil(math.log2(n))) if n > 1 else 0
    for i in range(1, rounds + 1):
        d = 2**i
        probs = np.array([accept_prob(k, d) for k in range(1, n + 1)])
        budget = C2 * math.sqrt(n / d)
        before = counter.grover_iterations
        res = qsearch(None, n, lam=lam, iteration_budget=budget, rng=rng, counter=counter, probs=probs)
        if trace is not None:
            trace.append({"i": i, "d": d, "budget": budget, "iterations": counter.grover_iterations - before,
                          "found": None if res.index is None else res.index + 1})
        if res.index is not None:
            return res.index + 1
    return None


def iteration_cap(n: int, C2: float = 16.0) -> float:
    return C2 * C_GEO * math.sqrt(n)


# --- single-run acceptance models ------------------------------------------------

def _patterns(n: int, k: int, nbrs) -> list[tuple[tuple[int, ...], float]]:
    """Distinct colour patterns on ``k``'s neighbours with their family frequencies."""
    if not nbrs:
        return [((), 1.0)]
    table = family_color_table(n)[:, list(nbrs)]
    rows, counts = np.unique(table, axis=0, return_counts=True)
    return [(tuple(int(c) for c in r), cnt / table.shape[0]) for r, cnt in zip(rows, counts)]


def _pattern_spec(base, k: int, nbrs, pattern, counter=None) -> AncillarySpec:
    """Spec whose colouring reproduces ``pattern`` on ``k``'s neighbours."""
    col = FixedColoring(coloring_bits(base.n), tuple(zip(nbrs, pattern)))
    return AncillarySpec(base, 3, k, col, counter)


def span_program_accept(spec: AncillarySpec, d: int, alpha_factor: float, c_prime: float) -> float:
    """Single-run acceptance of the st-connectivity span program on ``H`` at guess ``d``."""
    NH = spec.num_vertices
    w1 = 2 * d + 2
    alpha = alpha_for(w1, alpha_factor)
    theta = theta_for(math.comb(NH, 2), w1, c_prime)
    edges = lifted_component_edges(spec)
    return acceptance_from_edges(NH, 1, 2, edges, alpha, theta)


def walk_accept(spec: AncillarySpec, d: int, C: float, cw: float) -> tuple[float, int, int]:
    """Single-run path probability of the walk on ``H'``; also its steps and per-step queries."""
    dw = 2 * d + 2
    w = walk_from_spec(spec, C=C, d=dw)
    steps = steps_for(dw, w.n_vertices, cw)
    d_m = max(len(w.block(v)) for v in w.nbrs)
    return zero_outcome_probability(w, steps), steps, queries_per_step(d_m) + w.queries


@lru_cache(maxsize=200_000)
def _single_matrix(g: Graph, k: int, d: int, s_mod: int, af: float, cp: float) -> float:
    if s_mod == 2:
        return span_program_accept(AncillarySpec(g, 2, k), d, af, cp)
    nbrs = g.neighbors(k)
    return sum(w * span_program_accept(_pattern_spec(g, k, nbrs, pat), d, af, cp)
               for pat, w in _patterns(g.n, k, nbrs))


@lru_cache(maxsize=200_000)
def _single_array(arr: AdjacencyArray, k: int, d: int, C: float, cw: float) -> tuple[float, int, int]:
    nbrs = list(arr.neighbors[k - 1])
    total, steps, q = 0.0, 0, 0
    for pat, w in _patterns(arr.n, k, nbrs):
        spec = _pattern_spec(arr, k, nbrs, pat, QueryCounter())
        p, steps, q = walk_accept(spec, d, C, cw)
        total += w * p
    return total, steps, q


# --- deciders ----------------------------------------------------------------------

def _seed_of(seed) -> int:
    if seed is None:
        return int(np.random.SeedSequence().entropy % (2**32))
    return int(seed)


def _rounds(n: int) -> int:
    return max(1, int(math.ceil(math.log2(max(n, 2)))))


def _run(n: int, single: Callable[[int, int], float], cost: Callable[[int, int], tuple[int, int]],
         epsilon: float, consts: dict, seed: int, counter: OracleCounter, trace: list) -> int | None:
    rounds = _rounds(n)
    eps_vertex = epsilon / (n * rounds)
    r = repetitions(eps_vertex, consts["AMPLIFY_P_YES"], consts["AMPLIFY_P_NO"], consts["AMPLIFY_THRESHOLD"])
    thr = consts["AMPLIFY_THRESHOLD"]

    def boosted(k, d):
        return boosted_accept(single(k, d), r, thr)

    rng = np.random.default_rng(seed)
    before_calls = counter.a_calls
    found = doubling_search(n, boosted, consts["C_DOUBLE_PRIME"], lam=consts["LAMBDA"], counter=counter,
                            trace=trace, rng=rng)
    # each oracle call of the search is one boosted decider: r runs at the largest d reached
    calls = counter.a_calls - before_calls
    d_last = trace[-1]["d"] if trace else 2
    q, steps = cost(n, d_last)
    counter.queries += calls * r * q
    counter.walk_steps += calls * r * steps
    for row in trace:
        row["repetitions"] = r
    return found


def decide_forest_matrix(g: Graph, seed=None, epsilon: float = 0.05, consts: dict | None = None) -> DecisionReport:
    consts = resolve(consts)
    g = _as_graph(g)
    seed = _seed_of(seed)
    counter = OracleCounter(seed=seed)
    rep = DecisionReport(FOREST, counters=counter, seed=seed, model="matrix")
    if g.n <= 2:
        rep.note = "n <= 2: trivially a forest"
        return rep
    af, cp = consts["ALPHA_FACTOR"], consts["C_PRIME"]

    def single(k, d):
        return _single_matrix(g, k, d, 3, af, cp)

    def cost(n, d):
        NH = 3 * n + 2
        th = theta_for(math.comb(NH, 2), 2 * d + 2, cp)
        return 2 * int(math.ceil(1 / th)), 0

    k = _run(g.n, single, cost, epsilon, consts, seed, counter, rep.trace)
    if k is not None:
        rep.verdict, rep.vertex = HAS_CYCLE, k
        rep.witness = _cycle_witness(g, k)
    return rep


def decide_bipartite_matrix(g: Graph, seed=None, epsilon: float = 0.05, consts: dict | None = None) -> DecisionReport:
    consts = resolve(consts)
    g = _as_graph(g)
    seed = _seed_of(seed)
    counter = OracleCounter(seed=seed)
    rep = DecisionReport(BIPARTITE, counters=counter, seed=seed, model="matrix")
    if g.n <= 2:
        rep.note = "n <= 2: trivially bipartite"
        rep.witness = _two_coloring(g)
        return rep
    af, cp = consts["ALPHA_FACTOR"], consts["C_PRIME"]

    def single(k, d):
        return _single_matrix(g, k, d, 2, af, cp)

    def cost(n, d):
        NH = 2 * n + 2
        th = theta_for(math.comb(NH, 2), 2 * d + 2, cp)
        return 2 * int(math.ceil(1 / th)), 0

    k = _run(g.n, single, cost, epsilon, consts, seed, counter, rep.trace)
    if k is not None:
        rep.verdict, rep.vertex = ODD_CYCLE, k
        w = oracles.is_bipartite(g)
        rep.witness = w if isinstance(w, oracles.CycleWitness) else None
    else:
        rep.witness = _two_coloring(g)
    return rep


def decide_forest_array(arr: AdjacencyArray, seed=None, epsilon: float = 0.05,
                        consts: dict | None = None) -> DecisionReport:
    consts = resolve(consts)
    seed = _seed_of(seed)
    counter = OracleCounter(seed=seed)
    rep = DecisionReport(FOREST, counters=counter, seed=seed, model="array")
    m, dense = edge_count(arr)
    if dense:
        rep.verdict = HAS_CYCLE
        rep.note = f"m = {m} >= n = {arr.n}: a cycle must exist"
        rep.witness = oracles.has_cycle(arr)
        return rep
    if arr.n <= 2:
        rep.note = "n <= 2: trivially a forest"
        return rep
    C, cw = consts["WALK_C"], consts["WALK_CW"]

    def single(k, d):
        return _single_array(arr, k, d, C, cw)[0]

    def cost(n, d):
        _, steps, q = _single_array(arr, 1, d, C, cw)
        return steps * q, steps

    k = _run(arr.n, single, cost, epsilon, consts, seed, counter, rep.trace)
    if k is not None:
        rep.verdict, rep.vertex = HAS_CYCLE, k
        rep.witness = _cycle_witness(arr.to_graph(), k)
    return rep


def _as_graph(g) -> Graph:
    return g.to_graph() if isinstance(g, AdjacencyArray) else g


def _cycle_witness(g: Graph, k: int):
    """A classical cycle in ``k``'s component, if one exists (attached only when consistent)."""
    comp = oracles.component_of(g, k)
    sub_edges = [e for e in g.edges if e[0] in comp]
    return oracles.has_cycle(Graph(g.n, frozenset(sub_edges)))


def _two_coloring(g: Graph):
    w = oracles.is_bipartite(g)
    return w if isinstance(w, dict) else None


def clear_caches() -> None:
    _single_matrix.cache_clear()
    _single_array.cache_clear()
