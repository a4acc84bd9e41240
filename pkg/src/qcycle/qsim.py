"""Exact dense simulation: reflections, the span-program walk ``U``, spectral lemmas,
phase estimation, reflection via phase estimation, local reflections and exact
amplitude amplification."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .constants import ZERO_PHASE_TOL
from .graphs import Graph, SizeCapError
from .spanprog import NEVER_SLOT, ST_SLOT, STProgram, build_M_tilde, factorize

ORTHO_TOL = 1e-10
MAX_QPE_SIZE = 2**20
MAX_REFLECTION_DIM = 2**12


class InternalConsistencyError(RuntimeError):
    pass


@dataclass
class StateVector:
    basis: list
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if len(self.basis) != self.amps.shape[0]:
            raise ValueError("basis and amplitude lengths differ")
        if abs(np.linalg.norm(self.amps) - 1) > 1e-12:
            raise ValueError("state is not normalised")


@dataclass
class DenseOperator:
    basis: list
    matrix: np.ndarray

    def is_unitary(self, tol: float = 1e-10) -> bool:
        m = self.matrix
        return np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=tol)

    def is_reflection(self, tol: float = 1e-10) -> bool:
        m = self.matrix
        return np.allclose(m @ m, np.eye(m.shape[0]), atol=tol) and np.allclose(m, m.conj().T, atol=tol)


# --- reflections -------------------------------------------------------------------

def _check_orthonormal(M: np.ndarray, tol: float = ORTHO_TOL) -> None:
    gram = M.conj().T @ M
    if not np.allclose(gram, np.eye(M.shape[1]), atol=tol):
        raise ValueError("columns are not orthonormal")


def reflect_about_columns(M: np.ndarray) -> np.ndarray:
    """``2 M M^† - I`` for a matrix with orthonormal columns."""
    M = np.asarray(M)
    _check_orthonormal(M)
    return 2 * (M @ M.conj().T) - np.eye(M.shape[0])


def unitary_eig(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and an orthonormal eigenbasis of a unitary via complex Schur form."""
    T, Z = sla.schur(np.asarray(U, dtype=complex), output="complex")
    return np.diag(T).copy(), Z


def null_space(M: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    return sla.null_space(M, rcond=tol)


# --- span-program walk --------------------------------------------------------------

@dataclass
class WalkOperator:
    U: np.ndarray
    Lam: np.ndarray
    Pi: np.ndarray
    route_gap: float


def availability_projector(p: STProgram, x: Graph) -> np.ndarray:
    return np.diag(p.availability(x).astype(float))


def build_U(p: STProgram, x: Graph, tol: float = 1e-8) -> WalkOperator:
    """``U = (2Λ - I)(2Π_x - I)`` with ``Λ`` computed along two independent routes."""
    mt = build_M_tilde(p)
    K = null_space(mt)
    lam_direct = K @ K.T
    # second route: the -1 eigenspace of R_B R_A, pulled back through B
    A, B = factorize(p)
    W = reflect_about_columns(B) @ reflect_about_columns(A)
    P = null_space(W + np.eye(W.shape[0]))
    lam_walk = B.T @ (P @ P.T) @ B
    gap = float(np.abs(lam_direct - lam_walk).max())
    if gap > tol:
        raise InternalConsistencyError(f"Lambda routes disagree by {gap:.3e}")
    Pi = availability_projector(p, x)
    eye = np.eye(p.num_slots)
    U = (2 * lam_direct - eye) @ (2 * Pi - eye)
    return WalkOperator(U, lam_direct, Pi, gap)


def acceptance_probability(U: np.ndarray, theta: float, state: np.ndarray | None = None) -> float:
    """``||P_Θ |0>||^2``: weight of eigenphases ``|φ| <= Θ``."""
    ev, Z = unitary_eig(U)
    if state is None:
        state = np.zeros(U.shape[0])
        state[0] = 1.0
    c = Z.conj().T @ state
    phase = np.abs(np.angle(ev))
    return float(np.sum(np.abs(c[phase <= theta + ZERO_PHASE_TOL]) ** 2))


# --- spectral lemmas ----------------------------------------------------------------

@dataclass
class SpectralReport:
    ok: bool
    max_error: float
    failures: list


def _orth_complement(M: np.ndarray) -> np.ndarray:
    return null_space(M.conj().T)


def _intersection(P: np.ndarray, Q: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    if P.shape[1] == 0 or Q.shape[1] == 0:
        return np.zeros((P.shape[0], 0))
    u, sv, _ = np.linalg.svd(P.conj().T @ Q)
    return P @ u[:, :len(sv)][:, sv > 1 - tol]


def _match_spectra(pred: np.ndarray, got: np.ndarray) -> float:
    cost = np.abs(pred[:, None] - got[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max()) if len(r) else 0.0


def spectral_lemma_check(A: np.ndarray, B: np.ndarray, tol: float = 1e-8) -> SpectralReport:
    """Check every clause of the two-reflection spectral lemma for ``U = R_B R_A``."""
    _check_orthonormal(A)
    _check_orthonormal(B)
    N = A.shape[0]
    U = reflect_about_columns(B) @ reflect_about_columns(A)
    failures, errs = [], []
    plus = np.hstack([_intersection(A, B), _intersection(_orth_complement(A), _orth_complement(B))])
    if plus.shape[1]:
        e = float(np.abs(U @ plus - plus).max())
        errs.append(e)
        if e > tol:
            failures.append(("+1 space", e))
    kerAB = null_space(A.conj().T @ B)
    if kerAB.shape[1]:
        v = B @ kerAB
        e = float(np.abs(U @ v + v).max())
        errs.append(e)
        if e > tol:
            failures.append(("-1 space", e))
    # full spectrum predicted from the singular values of A^† B
    sv = np.linalg.svd(A.conj().T @ B, compute_uv=False)
    sv = np.clip(sv, 0, 1)
    a, b = A.shape[1], B.shape[1]
    k1 = int(np.sum(sv > 1 - 1e-9))
    rank = int(np.sum(sv > 1e-9))
    mid = sv[(sv <= 1 - 1e-9) & (sv > 1e-9)]
    th = np.arccos(mid)
    pred = np.concatenate([
        np.ones(k1 + (N - a - b + k1)),
        -np.ones((a - rank) + (b - rank)),
        np.exp(2j * th), np.exp(-2j * th),
    ])
    got, _ = unitary_eig(U)
    if len(pred) != len(got):
        failures.append(("dimension count", float(abs(len(pred) - len(got)))))
        e = float("inf")
    else:
        e = _match_spectra(pred, got)
    errs.append(e)
    if e > tol:
        failures.append(("phases", e))
    return SpectralReport(not failures, max(errs), failures)


def theta_projector(U: np.ndarray, theta: float) -> np.ndarray:
    ev, Z = unitary_eig(U)
    keep = np.abs(np.angle(ev)) <= theta + ZERO_PHASE_TOL
    Zk = Z[:, keep]
    return Zk @ Zk.conj().T


def effective_gap_check(A: np.ndarray, B: np.ndarray, w: np.ndarray, theta: float,
                        U: np.ndarray | None = None, tol: float = 1e-8) -> bool:
    """``||P_Θ Π_B w|| <= (Θ/2) ||w||`` for ``w`` with ``Π_A w = 0``."""
    if np.linalg.norm(A.conj().T @ w) > 1e-9 * max(1.0, np.linalg.norm(w)):
        raise ValueError("precondition violated: Π_A w != 0")
    if U is None:
        U = reflect_about_columns(B) @ reflect_about_columns(A)
    lhs = np.linalg.norm(theta_projector(U, theta) @ (B @ (B.conj().T @ w)))
    return bool(lhs <= theta / 2 * np.linalg.norm(w) + tol)


# --- phase estimation ---------------------------------------------------------------

def qpe_kernel(phases: np.ndarray, T: int) -> np.ndarray:
    """``|(1/T) sum_y e^{i y (φ - 2πk/T)}|^2`` for every phase (rows) and outcome ``k`` (cols)."""
    k = np.arange(T)
    delta = np.asarray(phases)[:, None] - 2 * np.pi * k[None, :] / T
    y = np.arange(T)
    amp = np.exp(1j * delta[..., None] * y).sum(axis=-1) / T
    return np.abs(amp) ** 2


def phase_estimation(U: np.ndarray, state: np.ndarray, t_ancillas: int, method: str = "circuit") -> np.ndarray:
    """Outcome distribution over ``k in [0, 2^t)``; outcome ``k`` estimates phase ``2πk/2^t``."""
    dim = U.shape[0]
    T = 2**t_ancillas
    if dim * T > MAX_QPE_SIZE:
        raise SizeCapError(f"phase estimation size {dim}*{T} exceeds {MAX_QPE_SIZE}")
    state = np.asarray(state, dtype=complex)
    if method == "circuit":
        # register in uniform superposition; branch y applies U^y; inverse QFT along the register
        branches = np.empty((T, dim), dtype=complex)
        v = state.copy()
        for y in range(T):
            branches[y] = v
            v = U @ v
        amps = np.fft.fft(branches, axis=0) / T
        return np.sum(np.abs(amps) ** 2, axis=1).real
    ev, Z = unitary_eig(U)
    c = np.abs(Z.conj().T @ state) ** 2
    return c @ qpe_kernel(np.angle(ev) % (2 * np.pi), T)


def qpe_window_mass(probs: np.ndarray, phase: float, bins: int) -> float:
    """Probability of outcomes within ``bins`` register steps (cyclically) of ``phase``."""
    T = len(probs)
    centre = phase * T / (2 * np.pi)
    k = np.arange(T)
    dist = np.abs((k - centre + T / 2) % T - T / 2)
    return float(probs[dist <= bins].sum())


# --- reflection via phase estimation ------------------------------------------------

@dataclass
class ApproxReflection:
    eigvals: np.ndarray
    eigvecs: np.ndarray
    k: int
    s: int

    def beta0(self) -> np.ndarray:
        S = 2**self.s
        phi = np.angle(self.eigvals)
        y = np.arange(S)
        return np.exp(1j * phi[:, None] * y).sum(axis=1) / S

    def residual(self, phi: np.ndarray) -> float:
        """``||(R + I)|φ>|0>||`` computed exactly in the eigenbasis."""
        c = self.eigvecs.conj().T @ np.asarray(phi, dtype=complex)
        return float(2 * np.sqrt(np.sum(np.abs(c) ** 2 * np.abs(self.beta0()) ** (2 * self.k))))

    def register_state(self, j: int) -> np.ndarray:
        """``ω_j = (W_j^† |0>)^{⊗k}`` for eigenvector ``j``."""
        S = 2**self.s
        y = np.arange(S)
        one = sla.hadamard(S) / math.sqrt(S) @ (np.exp(-1j * np.angle(self.eigvals[j]) * y) / math.sqrt(S))
        out = np.ones(1, dtype=complex)
        for _ in range(self.k):
            out = np.kron(out, one)
        return out

    def dense(self) -> np.ndarray:
        d = len(self.eigvals)
        R = 2**(self.k * self.s)
        if d * R > MAX_REFLECTION_DIM:
            raise SizeCapError(f"dense reflection of size {d * R} exceeds {MAX_REFLECTION_DIM}")
        acc = np.zeros((d * R, d * R), dtype=complex)
        for j in range(d):
            v = np.kron(self.eigvecs[:, j], self.register_state(j))
            acc += np.outer(v, v.conj())
        return 2 * acc - np.eye(d * R)

    def embed(self, phi: np.ndarray) -> np.ndarray:
        zero = np.zeros(2**(self.k * self.s))
        zero[0] = 1
        return np.kron(phi, zero)


def approx_reflection(U: np.ndarray, k: int, s: int | None = None) -> ApproxReflection:
    """Reflection about the 1-eigenvector of ``U`` built from ``k`` phase-estimation registers."""
    ev, Z = unitary_eig(U)
    phase = np.abs(np.angle(ev))
    zero = phase < 1e-9
    if zero.sum() != 1:
        raise ValueError(f"need a unique 1-eigenvector, found {int(zero.sum())}")
    sigma = phase[~zero].min() if (~zero).any() else np.pi
    if s is None:
        s = int(math.ceil(math.log2(2 * np.pi / sigma))) + 1
    return ApproxReflection(ev, Z, k, s)


# --- local reflections --------------------------------------------------------------

def local_block(p: STProgram, vertex: int) -> np.ndarray:
    """``|a_vertex>`` restricted to its slot block."""
    A, _ = factorize(p)
    ns = p.num_slots
    return A[(vertex - 1) * ns:vertex * ns, vertex - 1]


def local_reflection(p: STProgram, vertex: int) -> tuple[np.ndarray, dict]:
    """``K F L F^{-1} K^{-1}`` on a vertex's slot block, with its factors.

    ``F`` sends ``|st>`` to the uniform state over the ``n-1`` slots touching the
    vertex (a DFT on those slots), ``K`` splits ``|st>`` into the scaled and
    never-available slots, and ``L = 2|st><st| - I``.  The product equals
    ``2|a><a| - I``, the vertex's block of ``R_A``.
    """
    if p.n < 3:
        raise ValueError("need n >= 3")
    ns = p.num_slots
    if vertex in (p.s_vertex, p.t_vertex):
        touch = [ST_SLOT] + [j for j, pr in enumerate(p.slots) if len(pr) == 2 and vertex in pr]
    else:
        touch = [j for j, pr in enumerate(p.slots) if len(pr) == 2 and vertex in pr]
        touch.sort()
    m = len(touch)
    F = np.eye(ns, dtype=complex)
    dft = np.fft.fft(np.eye(m)) / math.sqrt(m)
    F[np.ix_(touch, touch)] = dft.conj()
    K = np.eye(ns)
    if vertex in (p.s_vertex, p.t_vertex):
        c, s = 1 / p.alpha, math.sqrt(1 - 1 / p.alpha**2)
        K[np.ix_([ST_SLOT, NEVER_SLOT], [ST_SLOT, NEVER_SLOT])] = [[c, -s], [s, c]]
    e0 = np.zeros(ns)
    e0[touch[0]] = 1
    L = 2 * np.outer(e0, e0) - np.eye(ns)
    V = K @ F
    R = V @ L @ V.conj().T
    return R, {"F": F, "K": K, "L": L}


def local_reflection_s(p: STProgram) -> np.ndarray:
    return local_reflection(p, p.s_vertex)[0]


def negated_swap_RB(p: STProgram) -> np.ndarray:
    """``R_B`` written as a negated swap on each pair ``(|u>|j>, |v>|j>)`` and ``-I`` elsewhere."""
    n, ns = p.n, p.num_slots
    R = -np.eye(n * ns)
    for j, pair in enumerate(p.slots):
        u, v = pair if len(pair) == 2 else (p.s_vertex, p.t_vertex)
        a, b = (u - 1) * ns + j, (v - 1) * ns + j
        R[a, a] = R[b, b] = 0.0
        R[a, b] = R[b, a] = -1.0
    return R


# --- exact amplitude amplification --------------------------------------------------

@dataclass
class AAResult:
    state: np.ndarray  # D x D amplitudes, first index = control register
    phi: np.ndarray  # second-register state once the control is |+>
    iterations: int
    final_step: bool
    fidelity: float


def _final_angles(theta: float, beta: float) -> tuple[float, float]:
    """Phases (φ, ϕ) for ``-S_ψ(φ) S_+(ϕ)`` mapping ``sinβ|g> + cosβ|b>`` exactly onto ``|g>``."""
    cphi = -1 / (math.tan(2 * theta) * math.tan(beta)) if abs(math.tan(2 * theta)) > 1e-15 else 0.0
    cphi = min(1.0, max(-1.0, cphi))
    vphi = math.acos(cphi)
    z = math.sin(theta) * math.sin(beta) * complex(math.cos(vphi), math.sin(vphi)) + math.cos(theta) * math.cos(beta)
    w = math.cos(beta) / (math.cos(theta) * z)
    return float(np.angle(1 - w)), vphi


def exact_amplitude_amplification(a: np.ndarray) -> AAResult:
    """Prepare ``|+>|a>`` from ``ψ = sum_i a_i |i>|i>`` with zero error."""
    a = np.asarray(a, dtype=float)
    a = a / np.linalg.norm(a)
    D = len(a)
    u = np.full(D, 1 / math.sqrt(D))
    psi = np.diag(a).astype(complex)
    target = np.outer(u, a)

    def s_psi(X, ang):
        return X - (1 - np.exp(1j * ang)) * np.vdot(psi, X) * psi

    def s_plus(X, ang):
        return X - (1 - np.exp(1j * ang)) * np.outer(u, u @ X)

    theta = math.asin(1 / math.sqrt(D))
    m = int(math.floor(math.pi / (4 * theta) - 0.5 + 1e-12))
    X = psi.copy()
    for _ in range(m):
        X = -s_psi(s_plus(X, math.pi), math.pi)
    beta = (2 * m + 1) * theta
    final = abs(math.cos(beta)) > 1e-12
    if final:
        ph, vph = _final_angles(theta, beta)
        X = -s_psi(s_plus(X, vph), ph)
    overlap = np.vdot(target, X)
    X = X * (abs(overlap) / overlap)  # drop the global phase
    fid = float(abs(overlap) ** 2)
    phi = u @ X  # contract the control with <+|
    phi = phi / np.linalg.norm(phi)
    return AAResult(X, phi, m + int(final), final, fid)


def aa_iterations(D: int) -> int:
    theta = math.asin(1 / math.sqrt(D))
    m = int(math.floor(math.pi / (4 * theta) - 0.5 + 1e-12))
    return m + int(abs(math.cos((2 * m + 1) * theta)) > 1e-12)


def householder_to(phi: np.ndarray) -> np.ndarray:
    """Unitary ``V`` with ``V|0> = |φ>``."""
    phi = np.asarray(phi, dtype=complex)
    D = len(phi)
    e0 = np.zeros(D, dtype=complex)
    e0[0] = 1
    # align phases so the reflection is well defined
    g = phi[0] / abs(phi[0]) if abs(phi[0]) > 1e-15 else 1.0
    v = e0 - phi / g
    nv = np.linalg.norm(v)
    if nv < 1e-15:
        return np.eye(D, dtype=complex) * g
    v /= nv
    return (np.eye(D) - 2 * np.outer(v, v.conj())) * g


def diffusion_from_phi(phi: np.ndarray) -> np.ndarray:
    """``D = V S_0 V^†`` with ``S_0 = I - 2|0><0|``."""
    V = householder_to(phi)
    S0 = np.eye(len(phi))
    S0[0, 0] = -1
    return V @ S0 @ V.conj().T
