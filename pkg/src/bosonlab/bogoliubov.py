"""Quadratic bosonic Hamiltonians, quasi-free states and the GP pair kernel.

The quadratic Hamiltonian of a pair ``(H, K)`` is

    sum_{nm} H_nm a+_n a_m + (1/2) sum_{nm} (K_nm a+_n a+_m + conj(K_nm) a_m a_n).

Quasi-free states are described by ``gamma_ij = <a+_j a_i>`` and
``alpha_ij = <a+_i a+_j>``, so that ``<a_i a_j> = conj(alpha_ij)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import LadderMonomial, TruncatedFock, as_word

EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class QuadraticHamiltonian:
    H: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=complex))
        K = np.atleast_2d(np.asarray(self.K, dtype=complex))
        if H.shape != K.shape or H.shape[0] != H.shape[1]:
            raise ValueError("H and K must be square of equal size")
        if np.abs(H - H.conj().T).max() > 1e-12:
            raise ValueError("H must be Hermitian")
        if np.abs(K - K.T).max() > 1e-12:
            raise ValueError("K must be symmetric")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "K", K)

    @property
    def dimension(self) -> int:
        return self.H.shape[0]

    @property
    def is_real(self) -> bool:
        return not (np.any(self.H.imag) or np.any(self.K.imag))

    def block_matrix(self) -> np.ndarray:
        """``[[H, K], [conj(K), conj(H)]]``, the coefficient matrix of the quadratic form."""
        return np.block([[self.H, self.K], [self.K.conj(), self.H.conj()]])

    def gap(self) -> float:
        """Smallest eigenvalue of ``H - K`` (real case) or of the block matrix."""
        if self.is_real:
            return float(la.eigvalsh((self.H - self.K).real)[0])
        return float(la.eigvalsh(self.block_matrix())[0])


def _psd_sqrt(M: np.ndarray) -> np.ndarray:
    vals, vecs = la.eigh(0.5 * (M + M.conj().T))
    return (vecs * np.sqrt(np.clip(vals, EIG_FLOOR, None))) @ vecs.conj().T


def bogoliubov_ground_energy(qh: QuadraticHamiltonian) -> tuple[float, np.ndarray]:
    """``(E_Bog, E)`` with ``E = ((H-K)^{1/2} (H+K) (H-K)^{1/2})^{1/2}`` and ``E_Bog = Tr(E - H)/2``.

    Complex pairs go through the symplectic spectrum of the block matrix;
    ``E`` is then the diagonal matrix of symplectic eigenvalues.
    """
    if qh.is_real:
        H, K = qh.H.real, qh.K.real
        lo = la.eigvalsh(H - K)[0]
        if lo <= 0:
            raise ValueError(f"gap condition violated: min eig(H - K) = {lo:.3e}")
        if la.eigvalsh(H + K)[0] < -1e-12:
            raise ValueError("H + K is not positive semidefinite")
        R = _psd_sqrt(H - K)
        E = _psd_sqrt(R @ (H + K) @ R)
        return float(0.5 * np.trace(E - H).real), E
    freqs = symplectic_spectrum(qh)
    return float(0.5 * (freqs.sum() - np.trace(qh.H).real)), np.diag(freqs)


def symplectic_spectrum(qh: QuadraticHamiltonian) -> np.ndarray:
    """Positive eigenvalues of ``diag(1, -1) @ block_matrix``."""
    A = qh.block_matrix()
    lo = la.eigvalsh(A)[0]
    if lo <= 0:
        raise ValueError(f"block matrix not positive definite: min eig {lo:.3e}")
    D = qh.dimension
    # eigenvalues of S A coincide with those of A^{1/2} S A^{1/2}, which is Hermitian
    R = _psd_sqrt(A)
    S = np.diag(np.r_[np.ones(D), -np.ones(D)])
    vals = la.eigvalsh(R @ S @ R)
    return np.sort(vals[vals > 0])


def quadratic_operator(qh: QuadraticHamiltonian, space: TruncatedFock) -> sp.csr_matrix:
    """Second-quantised ``(H, K)`` on a particle-number-truncated Fock space."""
    D = qh.dimension
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for n in range(D):
        for m in range(D):
            if qh.H[n, m] != 0:
                out = out + qh.H[n, m] * space.word_matrix(((n, True), (m, False)))
            if qh.K[n, m] != 0:
                out = out + 0.5 * qh.K[n, m] * space.word_matrix(((n, True), (m, True)))
                out = out + 0.5 * np.conj(qh.K[n, m]) * space.word_matrix(((m, False), (n, False)))
    return ((out + out.getH()) * 0.5).tocsr()


def _lowest(M: sp.csr_matrix) -> float:
    if M.shape[0] <= 600:
        return float(la.eigvalsh(M.toarray(), subset_by_index=(0, 0))[0])
    v0 = np.ones(M.shape[0])
    return float(spla.eigsh(M, k=1, which="SA", v0=v0, tol=1e-14)[0][0])


@dataclass
class BruteForceResult:
    energy: float               # extrapolated
    caps: list[int]
    energies: list[float]       # lowest eigenvalue per cap
    monotone: bool
    converged: bool


def bogoliubov_brute_force(qh: QuadraticHamiltonian, cap: int = 40, n_caps: int = 4,
                           step: int = 2) -> BruteForceResult:
    """Lowest eigenvalue on ``sum_{n <= cap}`` sectors, extrapolated over a cap sweep.

    The sweep uses caps ``cap - (n_caps-1) step, ..., cap``; an Aitken
    delta-squared step on the last three values gives the extrapolation,
    falling back to the last value when the sequence has already converged.
    """
    if cap < 2:
        raise ValueError("cap must be at least 2")
    caps = [c for c in range(cap - (n_caps - 1) * step, cap + 1, step) if c >= 2]
    energies = []
    for c in caps:
        space = TruncatedFock(qh.dimension, c)
        energies.append(_lowest(quadratic_operator(qh, space)))
    e = np.array(energies)
    monotone = bool(np.all(np.diff(e) <= 1e-12 * max(1.0, abs(e[-1]))))
    best = e[-1]
    if len(e) >= 3:
        d1, d2 = e[-1] - e[-2], e[-2] - e[-3]
        denom = d1 - d2
        if abs(d1) > 1e-15 and abs(denom) > 1e-300 and abs(d1) < abs(d2):
            best = e[-1] - d1 * d1 / denom
    converged = len(e) < 2 or abs(e[-1] - e[-2]) < 1e-6 * max(1.0, abs(e[-1]))
    return BruteForceResult(float(best), caps, energies, monotone, converged)


def bogoliubov_lower_bound(qh: QuadraticHamiltonian) -> float:
    """``-(1/2) Tr(H^{-1} K K^*)``."""
    try:
        Hinv = la.inv(qh.H)
    except la.LinAlgError as err:
        raise ValueError("H is singular") from err
    if la.eigvalsh(qh.H)[0] <= 0:
        raise ValueError("H must be positive definite")
    return float(-0.5 * np.trace(Hinv @ qh.K @ qh.K.conj().T).real)


def random_quadratic(rng: np.random.Generator, D: int, pairing: float = 0.5,
                     real: bool = True) -> QuadraticHamiltonian:
    """Random pair with ``H - K`` comfortably positive."""
    A = rng.standard_normal((D, D))
    H = A @ A.T / D + np.eye(D) * (1.0 + rng.random())
    B = rng.standard_normal((D, D))
    if not real:
        H = H + 1j * 0.3 * (lambda M: M - M.T)(rng.standard_normal((D, D)))
        B = B + 1j * rng.standard_normal((D, D))
    K = 0.5 * (B + B.T)
    lam = la.eigvalsh(H)[0]
    K = K * (pairing * lam / np.abs(la.eigvalsh(0.5 * (K + K.conj().T))).max()
             if real else pairing * lam / np.linalg.norm(K, 2))
    return QuadraticHamiltonian(H, K)


# --------------------------------------------------------------------------
# Quasi-free states


@dataclass(frozen=True)
class QuasiFreeState:
    gamma: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.gamma, dtype=complex))
        a = np.atleast_2d(np.asarray(self.alpha, dtype=complex))
        if g.shape != a.shape or g.shape[0] != g.shape[1]:
            raise ValueError("gamma and alpha must be square of equal size")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "alpha", a)

    @property
    def dimension(self) -> int:
        return self.gamma.shape[0]

    def generalized_matrix(self) -> np.ndarray:
        """``[[gamma, conj(alpha)], [alpha, 1 + conj(gamma)]]``."""
        g, a = self.gamma, self.alpha
        return np.block([[g, a.conj()], [a, np.eye(self.dimension) + g.conj()]])

    def two_point(self, x: tuple[int, bool], y: tuple[int, bool]) -> complex:
        """``<b_x b_y>`` for ladder operators ``(mode, dagger)``."""
        (i, di), (j, dj) = x, y
        if di and not dj:
            return self.gamma[j, i]
        if not di and dj:
            return (i == j) + self.gamma[i, j]
        if di and dj:
            return self.alpha[i, j]
        return np.conj(self.alpha[i, j])

    @classmethod
    def squeezed(cls, theta: float) -> "QuasiFreeState":
        s, c = math.sinh(theta), math.cosh(theta)
        return cls(np.array([[s * s]]), np.array([[s * c]]))

    @classmethod
    def thermal(cls, occupations) -> "QuasiFreeState":
        n = np.asarray(occupations, float)
        return cls(np.diag(n), np.zeros((len(n), len(n))))


@dataclass(frozen=True)
class QuasiFreeVerdict:
    status: Literal["valid_mixed", "valid_pure", "invalid"]
    witness: float
    detail: str = ""


def quasifree_validate(state: QuasiFreeState, tol: float = 1e-10) -> QuasiFreeVerdict:
    """Positivity of the generalised density matrix ``G`` and purity ``G S G = -G``."""
    g, a = state.gamma, state.alpha
    if np.abs(g - g.conj().T).max() > tol:
        return QuasiFreeVerdict("invalid", float(np.abs(g - g.conj().T).max()), "gamma not Hermitian")
    if np.abs(a - a.T).max() > tol:
        return QuasiFreeVerdict("invalid", float(np.abs(a - a.T).max()), "alpha not symmetric")
    G = state.generalized_matrix()
    low = float(la.eigvalsh(G)[0])
    if low < -tol:
        return QuasiFreeVerdict("invalid", low, "generalised density matrix not positive")
    D = state.dimension
    S = np.diag(np.r_[np.ones(D), -np.ones(D)])
    defect = float(np.abs(G @ S @ G + G).max())
    if defect <= tol * max(1.0, np.abs(G).max() ** 2):
        return QuasiFreeVerdict("valid_pure", defect, "G S G = -G")
    return QuasiFreeVerdict("valid_mixed", defect, "purity defect")


def _pairings(items: list[int]):
    if not items:
        yield []
        return
    first = items[0]
    for idx in range(1, len(items)):
        rest = items[1:idx] + items[idx + 1:]
        for tail in _pairings(rest):
            yield [(first, items[idx])] + tail


def wick_expectation(state: QuasiFreeState, monomial) -> complex:
    """Sum over pairings of products of ordered two-point functions."""
    word = as_word(monomial)
    if len(word) % 2:
        return 0j
    total = 0j
    for pairing in _pairings(list(range(len(word)))):
        term = 1 + 0j
        for i, j in pairing:
            term *= state.two_point(word[i], word[j])
            if term == 0:
                break
        total += term
    return total


def thermal_state_matrix(qh: QuadraticHamiltonian, beta: float, space: TruncatedFock) -> np.ndarray:
    """Gibbs state of the quadratic Hamiltonian on a truncated Fock space."""
    M = quadratic_operator(qh, space).toarray()
    vals, vecs = la.eigh(M)
    w = np.exp(-beta * (vals - vals[0]))
    rho = (vecs * (w / w.sum())) @ vecs.conj().T
    return rho


def state_from_density_matrix(rho: np.ndarray, space: TruncatedFock) -> QuasiFreeState:
    """Read ``(gamma, alpha)`` off a Fock-space density matrix."""
    D = space.modes.dimension
    gamma = np.empty((D, D), dtype=complex)
    alpha = np.empty((D, D), dtype=complex)
    for i in range(D):
        for j in range(D):
            gamma[i, j] = np.trace(rho @ space.word_matrix(((j, True), (i, False))).toarray())
            alpha[i, j] = np.trace(rho @ space.word_matrix(((i, True), (j, True))).toarray())
    return QuasiFreeState(gamma, alpha)


def fock_expectation(rho: np.ndarray, space: TruncatedFock, monomial) -> complex:
    return complex(np.trace(rho @ space.word_matrix(as_word(monomial)).toarray()))


# --------------------------------------------------------------------------
# Pair kernel


@dataclass
class PairKernel:
    values: np.ndarray
    points: np.ndarray
    sign: Literal["f-1", "1-f"]

    def flipped(self) -> "PairKernel":
        return PairKernel(-self.values, self.points, "1-f" if self.sign == "f-1" else "f-1")


def pair_kernel(u: np.ndarray, points: np.ndarray, f_N, N: float,
                sign: Literal["f-1", "1-f"] = "f-1") -> PairKernel:
    """``k(x,y) = +-N (f_N(|x-y|) - 1) u(x) u(y)`` on a list of points.

    ``f_N`` is the scattering solution of the potential already scaled to
    ``N``; ``points`` has shape ``(M, d)`` and ``u`` holds the values there.
    """
    pts = np.atleast_2d(np.asarray(points, float))
    u = np.asarray(u).ravel()
    if len(u) != len(pts):
        raise ValueError("one value of u per point")
    if sign not in ("f-1", "1-f"):
        raise ValueError(f"unknown sign convention {sign!r}")
    extent = np.ptp(pts, axis=0).max() if len(pts) > 1 else 0.0
    support = f_N.potential.support
    if extent and support > extent:
        raise ValueError("scattering scale larger than the grid: scale mismatch")
    r = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    k = N * (f_N.f(r) - 1.0) * np.outer(u, u)
    if sign == "1-f":
        k = -k
    return PairKernel(0.5 * (k + k.T), pts, sign)


__all__ = [
    "QuadraticHamiltonian", "bogoliubov_ground_energy", "symplectic_spectrum",
    "bogoliubov_brute_force", "BruteForceResult", "bogoliubov_lower_bound", "random_quadratic",
    "QuasiFreeState", "quasifree_validate", "QuasiFreeVerdict", "wick_expectation",
    "thermal_state_matrix", "state_from_density_matrix", "fock_expectation", "PairKernel",
    "pair_kernel", "quadratic_operator",
]
