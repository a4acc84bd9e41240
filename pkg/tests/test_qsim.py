import math

import numpy as np
import pytest
import scipy.linalg as sla
from scipy.stats import unitary_group

from qcycle import oracles
from qcycle.graphs import Graph, SizeCapError
from qcycle.qsim import (DenseOperator, StateVector, acceptance_probability, aa_iterations, approx_reflection,
                         build_U, diffusion_from_phi, effective_gap_check, exact_amplitude_amplification,
                         householder_to, local_block, local_reflection, negated_swap_RB, phase_estimation,
                         qpe_window_mass, reflect_about_columns, spectral_lemma_check, unitary_eig)
from qcycle.spanprog import STProgram, acceptance_from_edges, alpha_for, factorize, theta_for


def random_isometry(rng, N, k, complex_=True):
    X = rng.normal(size=(N, k))
    if complex_:
        X = X + 1j * rng.normal(size=(N, k))
    q, _ = np.linalg.qr(X)
    return q


def unitary_with_fixed_vector(rng, dim):
    """A unitary whose only eigenvalue 1 belongs to a random vector."""
    Q = unitary_group.rvs(dim, random_state=rng)
    phases = rng.uniform(0.3, 2 * np.pi - 0.3, size=dim)
    phases[0] = 0.0
    return Q @ np.diag(np.exp(1j * phases)) @ Q.conj().T, Q[:, 0]


def op(m):
    return DenseOperator(list(range(m.shape[0])), m)


class TestTypes:
    def test_state_normalised(self):
        with pytest.raises(ValueError):
            StateVector([0, 1], np.array([1.0, 1.0]))

    def test_reflection_flags(self):
        R = reflect_about_columns(np.eye(4)[:, :2])
        o = op(R)
        assert o.is_unitary() and o.is_reflection()
        assert not op(np.diag([1, 1j])).is_reflection()

    def test_nonorthonormal_columns(self):
        with pytest.raises(ValueError):
            reflect_about_columns(np.ones((3, 1)))


class TestBuildU:
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_routes_agree(self, n, rng):
        for _ in range(4):
            x = oracles.random_graph(n, rng, p=0.5)
            x = Graph(n, frozenset(e for e in x.edges if e != (1, n)))
            w = build_U(STProgram(n, 1, n, float(rng.uniform(1, 3))), x)
            assert w.route_gap < 1e-8
            assert op(w.U).is_unitary()

    def test_p3_fixed_vector(self):
        # s - 2 - t: the +1 eigenvector is alpha|0> - w for the path witness
        alpha = 2.0
        p = STProgram(3, 1, 3, alpha)
        x = Graph.from_edges(3, [(1, 2), (2, 3)])
        U = build_U(p, x).U
        w = np.zeros(p.num_slots)
        idx = p.slot_index()
        # with positive witness w: M~ w = tau, and alpha|0> has M~ image tau too
        w[idx[(1, 2)]] = 1.0
        w[idx[(2, 3)]] = 1.0
        tau_pre = np.zeros(p.num_slots)
        tau_pre[0] = alpha
        from qcycle.spanprog import build_M_tilde
        M = build_M_tilde(p)
        assert np.allclose(M @ tau_pre, M @ w)
        v = tau_pre - w
        assert np.allclose(U @ v, v)

    def test_acceptance_bounds_on_paths(self):
        for L in range(2, 6):
            n = L + 2
            verts = list(range(1, L + 1)) + [n]
            edges = list(zip(verts, verts[1:]))
            for d in (L, 2 * L):
                a = alpha_for(d, 3)
                th = theta_for(math.comb(n, 2), d, 10)
                pos = acceptance_from_edges(n, 1, n, edges, a, th)
                neg = acceptance_from_edges(n, 1, n, edges[:-1], a, th)
                assert pos >= 0.9 - 1e-9
                assert neg <= 0.1

    def test_dense_matches_reduced_on_small_lift(self, rng):
        n = 5
        for _ in range(5):
            x = oracles.random_graph(n, rng, p=0.6)
            x = Graph(n, frozenset(e for e in x.edges if e != (1, n)))
            alpha = 3 * math.sqrt(2 * 3 + 2)
            U = build_U(STProgram(n, 1, n, alpha), x).U
            th = theta_for(math.comb(n, 2), 8, 10)
            comp = oracles.component_of(x, 1) | oracles.component_of(x, n)
            edges = [e for e in x.edges if e[0] in comp]
            assert math.isclose(acceptance_probability(U, th), acceptance_from_edges(n, 1, n, edges, alpha, th),
                                abs_tol=1e-9)


class TestSpectralLemmas:
    def test_random_pairs(self, rng):
        for _ in range(40):
            N = int(rng.integers(2, 9))
            a, b = int(rng.integers(0, N + 1)), int(rng.integers(0, N + 1))
            rep = spectral_lemma_check(random_isometry(rng, N, a), random_isometry(rng, N, b))
            assert rep.ok, rep.failures

    def test_shared_columns(self, rng):
        # force a nontrivial intersection of the column spaces
        Q = random_isometry(rng, 6, 6)
        A, B = Q[:, [0, 1, 2]], np.column_stack([Q[:, 0], (Q[:, 1] + Q[:, 3]) / math.sqrt(2)])
        assert spectral_lemma_check(A, B).ok

    def test_span_program_factors(self):
        for n in (3, 4, 5):
            A, B = factorize(STProgram(n, 1, n, 2.0))
            assert spectral_lemma_check(A, B).ok

    def test_effective_gap(self, rng):
        for _ in range(40):
            N = int(rng.integers(3, 9))
            A = random_isometry(rng, N, int(rng.integers(1, N)))
            B = random_isometry(rng, N, int(rng.integers(1, N + 1)))
            comp = sla.null_space(A.conj().T)
            w = comp @ (rng.normal(size=comp.shape[1]) + 1j * rng.normal(size=comp.shape[1]))
            for theta in (0.01, 0.2, 1.0, 2.5):
                assert effective_gap_check(A, B, w, theta)

    def test_effective_gap_precondition(self):
        A = np.eye(3)[:, :1]
        with pytest.raises(ValueError):
            effective_gap_check(A, A, np.array([1.0, 0, 0]), 0.1)


class TestPhaseEstimation:
    def test_exact_phase(self):
        U = np.diag(np.exp(2j * np.pi * np.array([0, 3 / 8])))
        probs = phase_estimation(U, np.array([0, 1.0]), 3)
        assert math.isclose(probs[3], 1.0, abs_tol=1e-12)

    def test_halfway_phase(self):
        t = 5
        phi = 2 * np.pi * 6.5 / 2**t
        U = np.diag([np.exp(1j * phi)])
        probs = phase_estimation(U, np.array([1.0]), t)
        assert qpe_window_mass(probs, phi, 1) < 0.9  # one bin is not enough
        assert qpe_window_mass(probs, phi, 6) >= 0.9

    def test_circuit_vs_eigen(self, rng):
        for _ in range(10):
            d = int(rng.integers(2, 6))
            U = unitary_group.rvs(d, random_state=rng)
            psi = rng.normal(size=d) + 1j * rng.normal(size=d)
            psi /= np.linalg.norm(psi)
            t = int(rng.integers(2, 7))
            a = phase_estimation(U, psi, t, "circuit")
            b = phase_estimation(U, psi, t, "eigen")
            assert np.allclose(a, b, atol=1e-10)
            assert math.isclose(a.sum(), 1.0)

    def test_window_bound_random_phases(self, rng):
        for phi in rng.uniform(0, 2 * np.pi, size=50):
            probs = phase_estimation(np.diag([np.exp(1j * phi)]), np.array([1.0]), 6)
            assert qpe_window_mass(probs, phi, 6) >= 0.9

    def test_size_cap(self):
        with pytest.raises(SizeCapError):
            phase_estimation(np.eye(64), np.eye(64)[0], 15)


class TestApproxReflection:
    def test_fixes_target(self, rng):
        U, v = unitary_with_fixed_vector(rng, 3)
        R = approx_reflection(U, 2, s=2)
        out = R.dense() @ R.embed(v)
        assert np.allclose(out, R.embed(v))

    def test_residual_decays(self, rng):
        U, v = unitary_with_fixed_vector(rng, 4)
        R0 = approx_reflection(U, 1)
        phi = sla.null_space(v.conj()[None, :])[:, 0]
        res = [approx_reflection(U, k, R0.s).residual(phi) for k in range(1, 7)]
        assert all(b <= a + 1e-15 for a, b in zip(res, res[1:]))
        assert res[0] <= 2.0 * 2**-1 + 1e-12
        for k, r in enumerate(res, start=1):
            assert r <= 2.0 * 2 ** (-k) + 1e-12

    def test_dense_residual(self, rng):
        U, v = unitary_with_fixed_vector(rng, 3)
        phi = sla.null_space(v.conj()[None, :])[:, 1]
        for k in (1, 2):
            R = approx_reflection(U, k, s=2)
            dense = np.linalg.norm(R.dense() @ R.embed(phi) + R.embed(phi))
            assert math.isclose(dense, R.residual(phi), abs_tol=1e-10)

    def test_requires_unique_fixed_vector(self):
        with pytest.raises(ValueError):
            approx_reflection(np.eye(2), 1)


class TestLocalReflections:
    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_all_vertices(self, n):
        p = STProgram(n, 1, n, 2.5)
        for v in range(1, n + 1):
            R, parts = local_reflection(p, v)
            a = local_block(p, v)
            assert np.allclose(R, 2 * np.outer(a, a) - np.eye(len(a)), atol=1e-12)
            assert op(parts["F"]).is_unitary()

    def test_sign_relative_to_householder_form(self):
        p = STProgram(4, 1, 4, 2.0)
        a = local_block(p, 1)
        R, _ = local_reflection(p, 1)
        assert np.allclose(-R, np.eye(len(a)) - 2 * np.outer(a, a))

    def test_alpha_one_k_trivial(self):
        p = STProgram(4, 1, 4, 1.0)
        _, parts = local_reflection(p, 1)
        assert np.allclose(parts["K"], np.eye(p.num_slots))
        assert abs(local_block(p, 1)[1]) < 1e-15  # no weight on the never-available slot

    def test_negated_swap(self):
        for n in (3, 4, 5):
            p = STProgram(n, 1, n, 2.0)
            _, B = factorize(p)
            assert np.allclose(negated_swap_RB(p), reflect_about_columns(B))


class TestAmplitudeAmplification:
    @pytest.mark.parametrize("D", range(1, 25))
    def test_uniform(self, D):
        res = exact_amplitude_amplification(np.ones(D))
        assert res.fidelity > 1 - 1e-10
        assert res.iterations == aa_iterations(D)

    def test_weighted(self, rng):
        for _ in range(20):
            D = int(rng.integers(2, 12))
            a = rng.uniform(0.1, 3, size=D)
            res = exact_amplitude_amplification(a)
            assert res.fidelity > 1 - 1e-10
            assert np.allclose(res.phi, a / np.linalg.norm(a), atol=1e-8)

    def test_iteration_scaling(self):
        for D in (4, 16, 64, 256, 1024):
            assert aa_iterations(D) <= math.pi / 4 * math.sqrt(D) + 1

    def test_householder_and_diffusion(self, rng):
        for D in (1, 2, 5):
            phi = rng.normal(size=D) + 1j * rng.normal(size=D)
            phi /= np.linalg.norm(phi)
            V = householder_to(phi)
            assert np.allclose(V[:, 0], phi)
            Dv = diffusion_from_phi(phi)
            assert np.allclose(Dv, np.eye(D) - 2 * np.outer(phi, phi.conj()))


def test_unitary_eig_reconstructs(rng):
    U = unitary_group.rvs(6, random_state=rng)
    ev, Z = unitary_eig(U)
    assert np.allclose(Z @ np.diag(ev) @ Z.conj().T, U)
