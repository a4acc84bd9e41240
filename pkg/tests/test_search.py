import json
import math

import numpy as np
import pytest

from conftest import cycle_graph, path_graph
from qcycle.graphs import AdjacencyArray, BIPARTITE_TEST, CYCLE_TEST, Graph, parity, parity_gadget
from qcycle.search import (BIPARTITE, FOREST, HAS_CYCLE, ODD_CYCLE, OracleCounter, amplify_majority,
                           boosted_accept, clear_caches, decide_bipartite_matrix, decide_forest_array,
                           decide_forest_matrix, doubling_search, grover_success_closed,
                           grover_success_statevector, iteration_cap, qsearch, repetitions)


class TestGrover:
    @pytest.mark.parametrize("t", [1, 2, 5, 16])
    def test_statevector_matches_closed(self, t):
        N = 64
        marked = list(range(0, 4 * t, 4))
        for j in range(12):
            assert math.isclose(grover_success_statevector(N, marked, j), grover_success_closed(N, t, j),
                                abs_tol=1e-12)

    def test_no_solutions(self):
        assert grover_success_closed(16, 0, 3) == 0.0

    def test_statevector_cap(self):
        with pytest.raises(ValueError):
            grover_success_statevector(2048, [0], 1)


class TestQSearch:
    def test_finds_single_solution(self):
        f = np.zeros(256, dtype=bool)
        f[17] = True
        res = qsearch(f, 256, seed=3)
        assert res.index == 17

    def test_no_solution_respects_budget(self):
        res = qsearch(np.zeros(64, dtype=bool), 64, seed=1, iteration_budget=40)
        assert res.index is None
        # the last round can overshoot by at most sqrt(N)
        assert 40 <= res.iterations < 40 + 8

    def test_all_marked(self):
        res = qsearch(np.ones(8, dtype=bool), 8, seed=0)
        assert res.index is not None and res.iterations == 0

    def test_callable_and_statevector(self):
        res = qsearch(lambda i: i == 5, 32, seed=11, mode="statevector")
        assert res.index == 5

    def test_lambda_range(self):
        with pytest.raises(ValueError):
            qsearch(np.ones(4, dtype=bool), 4, lam=1.5)

    def test_budget_mandatory(self):
        with pytest.raises(ValueError):
            qsearch(np.ones(4, dtype=bool), 4, iteration_budget=None)

    def test_randomised_predicate(self):
        probs = np.zeros(64)
        probs[9] = 0.5
        hits = [qsearch(None, 64, seed=s, probs=probs, iteration_budget=200).index for s in range(20)]
        assert set(hits) <= {9, None} and hits.count(9) >= 15

    def test_mean_iterations(self):
        N, t = 64, 2
        f = np.zeros(N, dtype=bool)
        f[:t] = True
        its = [qsearch(f, N, seed=s).iterations for s in range(300)]
        assert np.mean(its) <= 4 * math.sqrt(N / t)

    def test_counter(self):
        c = OracleCounter()
        f = np.zeros(32, dtype=bool)
        f[3] = True
        res = qsearch(f, 32, seed=2, counter=c)
        assert c.grover_iterations == res.iterations
        assert c.a_calls == 2 * res.iterations + res.measurements


class TestAmplification:
    def test_repetitions_small(self):
        assert repetitions(0.05) <= 200

    @pytest.mark.parametrize("eps", [0.0, 0.5, 0.7])
    def test_repetitions_domain(self, eps):
        with pytest.raises(ValueError):
            repetitions(eps)

    def test_boosted_tails(self):
        for eps in (0.2, 0.05, 0.01, 1e-4):
            r = repetitions(eps)
            assert boosted_accept(0.45, r) >= 1 - eps
            assert boosted_accept(0.10, r) <= eps

    def test_boosted_monotone(self):
        r = repetitions(0.01)
        vals = [boosted_accept(p, r) for p in np.linspace(0, 1, 21)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_majority_wrapper(self):
        rng = np.random.default_rng(0)
        yes = amplify_majority(lambda g: g.random() < 0.45, 0.01)
        no = amplify_majority(lambda g: g.random() < 0.10, 0.01)
        assert sum(yes(rng) for _ in range(200)) >= 196
        assert sum(no(rng) for _ in range(200)) <= 4
        assert yes.repetitions == repetitions(0.01)


class TestDoubling:
    def test_trace_schedule(self):
        trace = []
        doubling_search(16, lambda k, d: 0.0, C2=16, seed=0, trace=trace)
        assert [row["d"] for row in trace] == [2, 4, 8, 16]
        for row in trace:
            assert math.isclose(row["budget"], 16 * math.sqrt(16 / row["d"]))
            assert row["found"] is None

    def test_finds_when_d_large_enough(self):
        found = doubling_search(32, lambda k, d: 1.0 if (k == 7 and d >= 8) else 0.0, seed=5)
        assert found == 7

    def test_total_iterations_capped(self):
        for n in (4, 16, 64, 256):
            c = OracleCounter()
            doubling_search(n, lambda k, d: 0.0, seed=n, counter=c)
            assert c.grover_iterations <= iteration_cap(n)


class TestDeciders:
    def setup_method(self):
        clear_caches()

    def test_forest_examples(self):
        assert decide_forest_matrix(path_graph(5), seed=1).verdict == FOREST
        rep = decide_forest_matrix(cycle_graph([1, 2, 3, 4]), seed=1)
        assert rep.verdict == HAS_CYCLE
        assert rep.witness is not None and len(rep.witness) == 4

    def test_bipartite_examples(self):
        rep = decide_bipartite_matrix(cycle_graph([1, 2, 3, 4]), seed=2)
        assert rep.verdict == BIPARTITE
        assert all(rep.witness[u] != rep.witness[v] for u, v in cycle_graph([1, 2, 3, 4]).edges)
        rep = decide_bipartite_matrix(cycle_graph([1, 2, 3, 4, 5]), seed=2)
        assert rep.verdict == ODD_CYCLE and len(rep.witness) == 5

    def test_array_examples(self):
        tree = AdjacencyArray.from_graph(Graph.from_edges(5, [(1, 2), (2, 3), (3, 4)]))
        assert decide_forest_array(tree, seed=0).verdict == FOREST
        cyc = AdjacencyArray.from_graph(Graph.from_edges(6, [(1, 2), (2, 3), (1, 3), (4, 5)]))
        assert decide_forest_array(cyc, seed=0).verdict == HAS_CYCLE

    def test_dense_array_rejected_without_walk(self):
        rep = decide_forest_array(AdjacencyArray.from_graph(cycle_graph([1, 2, 3, 4])), seed=0)
        assert rep.verdict == HAS_CYCLE
        assert rep.counters.walk_steps == 0 and rep.counters.queries == 0

    def test_gadgets(self):
        for x in ("101", "110", "1110", "1000"):
            even = parity(x) == 0
            rep = decide_forest_matrix(parity_gadget(x, CYCLE_TEST), seed=4)
            assert rep.verdict == (HAS_CYCLE if even else FOREST)
            rep = decide_bipartite_matrix(parity_gadget(x, BIPARTITE_TEST), seed=4)
            assert rep.verdict == (ODD_CYCLE if even else BIPARTITE)

    def test_tiny_inputs(self):
        assert decide_forest_matrix(Graph(2, frozenset({(1, 2)})), seed=0).verdict == FOREST
        assert decide_bipartite_matrix(Graph(1, frozenset()), seed=0).verdict == BIPARTITE

    def test_report_determinism(self):
        g = cycle_graph([1, 3, 2, 5, 4])
        a = json.dumps(decide_forest_matrix(g, seed=99).to_dict(), sort_keys=True)
        clear_caches()
        b = json.dumps(decide_forest_matrix(g, seed=99).to_dict(), sort_keys=True)
        assert a == b

    def test_iteration_cap_respected(self):
        for g in (path_graph(7), cycle_graph([1, 2, 3, 4, 5, 6])):
            rep = decide_forest_matrix(g, seed=3)
            assert rep.counters.grover_iterations <= iteration_cap(g.n)

    def test_trace_rows(self):
        rep = decide_forest_matrix(path_graph(6), seed=8)
        assert len(rep.trace) == math.ceil(math.log2(7))
        assert all(row["repetitions"] == rep.trace[0]["repetitions"] for row in rep.trace)
