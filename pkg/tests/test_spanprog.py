import itertools
import math

import numpy as np
import pytest

from qcycle import oracles
from qcycle.graphs import Graph
from qcycle.qsim import acceptance_probability, build_U
from qcycle.spanprog import (STProgram, WitnessError, WitnessPair, acceptance_from_edges, build_M_tilde,
                             delta_spectrum, evaluate, factorize, m_prime, min_norm_witness,
                             negative_witness_from_components, positive_witness_from_path, spectrum_report)


def st_inputs(n, s=1, t=None):
    """Every labeled graph on n vertices without the s-t edge."""
    t = t or n
    pairs = [p for p in itertools.combinations(range(1, n + 1), 2) if p != (s, t)]
    for mask in range(1 << len(pairs)):
        yield Graph(n, frozenset(p for i, p in enumerate(pairs) if mask >> i & 1))


class TestEvaluate:
    def test_p3(self):
        p = STProgram(3, 1, 3)
        assert evaluate(p, Graph.from_edges(3, [(1, 2), (2, 3)]))

    def test_no_edges(self):
        assert not evaluate(STProgram(4, 1, 4), Graph(4, frozenset()))

    def test_st_edge_refused(self):
        with pytest.raises(ValueError):
            evaluate(STProgram(3, 1, 3), Graph.from_edges(3, [(1, 3)]))

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_agrees_with_bfs(self, n):
        p = STProgram(n, 1, n, alpha=2.0)
        for x in st_inputs(n):
            assert evaluate(p, x) == (oracles.st_connected(x, 1, n) is not None)


class TestWitnesses:
    def test_path_witness(self):
        p = STProgram(3, 1, 3)
        w = positive_witness_from_path(p, [1, 2, 3])
        assert w.W1 == 2

    @pytest.mark.parametrize("d", range(2, 8))
    def test_path_witness_length_d(self, d):
        n = d + 2
        # s = 1, t = n, path 1 - 2 - ... - (d) - n; vertex d+1 unused
        verts = list(range(1, d + 1)) + [n]
        x = Graph.from_edges(n, [(verts[i], verts[i + 1]) for i in range(d)])
        p = STProgram(n, 1, n)
        w = positive_witness_from_path(p, verts, x)
        assert w.W1 == d
        M = build_M_tilde(p)
        M[:, :2] = 0
        assert np.allclose(M @ w.positive, p.target())
        best = min_norm_witness(p, x)
        assert best @ best <= d + 1e-9

    def test_invalid_path(self):
        p = STProgram(4, 1, 4)
        with pytest.raises(WitnessError):
            positive_witness_from_path(p, [1, 2, 1, 4])
        with pytest.raises(WitnessError):
            positive_witness_from_path(p, [1, 4])

    def test_two_isolated(self):
        w = negative_witness_from_components(STProgram(2, 1, 2), Graph(2, frozenset()))
        assert w.W0 == 1

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_two_cliques(self, m):
        n = 2 * m
        edges = [e for e in itertools.combinations(range(1, m + 1), 2)]
        edges += [e for e in itertools.combinations(range(m + 1, n + 1), 2)]
        w = negative_witness_from_components(STProgram(n, 1, n), Graph.from_edges(n, edges))
        # brute force: count pairs crossing the cut, including the st pair
        cut = sum(1 for x, y in itertools.combinations(range(1, n + 1), 2) if (x <= m) != (y <= m))
        assert w.W0 == cut == m * m

    def test_negative_on_accepting_input(self):
        with pytest.raises(WitnessError):
            negative_witness_from_components(STProgram(3, 1, 3), Graph.from_edges(3, [(1, 2), (2, 3)]))

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_duality(self, n):
        p = STProgram(n, 1, n)
        for x in st_inputs(n):
            d = oracles.st_connected(x, 1, n)
            w = min_norm_witness(p, x)
            if d is None:
                assert w is None
                neg = negative_witness_from_components(p, x)
                assert neg.W0 <= math.comb(n, 2)
                assert abs(neg.negative @ p.target() - 1) < 1e-12
            else:
                assert w is not None and w @ w <= d + 1e-9
                with pytest.raises(WitnessError):
                    negative_witness_from_components(p, x)

    def test_exactly_one_side(self):
        with pytest.raises(WitnessError):
            WitnessPair()

    @pytest.mark.parametrize("alpha", [1.0, 2.0, 5.0])
    def test_never_available_changes_nothing(self, alpha):
        n = 5
        p = STProgram(n, 1, n, alpha)
        plain = p.span_program()
        no_never = STProgram(n, 1, n, 1.0).span_program()  # sqrt(1 - 1/alpha^2) = 0 column
        for x in itertools.islice(st_inputs(n), 0, None, 7):
            assert evaluate(plain, x) == evaluate(no_never, x)
            a, b = min_norm_witness(plain, x), min_norm_witness(no_never, x)
            assert (a is None) == (b is None)
            if a is not None:
                assert abs(a @ a - b @ b) < 1e-9


class TestMatrices:
    def test_column_count(self):
        assert build_M_tilde(STProgram(3, 1, 3, 2.0)).shape == (3, 4)

    @pytest.mark.parametrize("alpha", [1.0, 1.5, 4.0])
    def test_st_columns(self, alpha):
        M = build_M_tilde(STProgram(5, 2, 4, alpha))
        assert np.isclose(np.linalg.norm(M[:, 0]), math.sqrt(2) / alpha)
        assert np.isclose(np.linalg.norm(M[:, 0]) ** 2 + np.linalg.norm(M[:, 1]) ** 2, 2)

    def test_alpha_below_one(self):
        with pytest.raises(ValueError):
            STProgram(3, 1, 3, 0.5)

    @pytest.mark.parametrize("n", range(3, 9))
    @pytest.mark.parametrize("alpha", [1.0, 3.0])
    def test_factorization(self, n, alpha):
        p = STProgram(n, 1, n, alpha)
        A, B = factorize(p)
        assert np.abs(A.T @ A - np.eye(n)).max() < 1e-12
        assert np.abs(B.T @ B - np.eye(p.num_slots)).max() < 1e-12
        assert np.abs(A.T @ B - m_prime(p)).max() < 1e-12
        # the row rescale keeps the kernel
        M = build_M_tilde(p)
        assert np.linalg.matrix_rank(M) == np.linalg.matrix_rank(m_prime(p))

    def test_a_norm_weights(self):
        n, alpha = 6, 2.5
        w = 1 / (alpha**2 * (n - 1)) + (1 - 1 / alpha**2) / (n - 1) + (n - 2) / (n - 1)
        assert math.isclose(w, 1.0)

    @pytest.mark.parametrize("n, val", [(3, 0.75), (4, 2 / 3)])
    def test_small_spectra(self, n, val):
        ev = delta_spectrum(STProgram(n, 1, n, 2.0))
        assert np.allclose(ev, [0] + [val] * (n - 1), atol=1e-12)

    def test_delta_entries(self):
        n = 7
        mp = m_prime(STProgram(n, 1, n, 3.0))
        D = mp @ mp.T
        assert np.allclose(np.diag(D), 0.5)
        off = D[~np.eye(n, dtype=bool)]
        assert np.allclose(off, -1 / (2 * (n - 1)))

    def test_report(self):
        rep = spectrum_report(STProgram(4, 1, 4))
        assert rep["multiplicities"] == {"0.000000000": 1, "0.666666667": 3}
        assert rep["factorization_residual"] < 1e-12


class TestAcceptanceRoutes:
    """The reduced route used by the driver against the dense eigendecomposition."""

    @pytest.mark.parametrize("n", [4, 5])
    def test_routes_agree(self, n, rng):
        for trial in range(6):
            x = oracles.random_graph(n, rng, p=0.5)
            x = Graph(n, frozenset(e for e in x.edges if e != (1, n)))
            alpha = float(rng.uniform(1, 4))
            p = STProgram(n, 1, n, alpha)
            U = build_U(p, x).U
            for theta in (0.02, 0.3, 1.0, math.pi):
                dense = acceptance_probability(U, theta)
                comp = oracles.component_of(x, 1) | oracles.component_of(x, n)
                edges = [e for e in x.edges if e[0] in comp]
                assert abs(dense - acceptance_from_edges(n, 1, n, edges, alpha, theta)) < 1e-9

    def test_full_theta_is_one(self):
        assert math.isclose(acceptance_from_edges(4, 1, 4, [(1, 2)], 2.0, math.pi), 1.0)
