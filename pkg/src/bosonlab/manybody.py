"""Scaled many-body Hamiltonians in mode space and their ground-state observables.

The Hamiltonian on the ``N``-particle sector is

    H = sum_{jk} h_jk a+_j a_k + (c_N / 2) sum_{ijkl} w_ijkl a+_i a+_j a_k a_l

with ``c_N = 1/(N-1)`` under the per-pair convention and ``c_N = 1`` when
unscaled.  Reduced density matrices use the binomial normalisation
``Tr Gamma^(k) = C(N, k)`` unless asked otherwise, and live on the symmetric
``k``-particle sector in its occupation basis.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import (ModeSpace, OccupationBasis, apply_word_to_occupations,
                   basis_dimension, one_body_operator, word_matrix)

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class OneBodyMatrix:
    entries: np.ndarray
    mode_space: ModeSpace | None = None

    def __post_init__(self):
        h = np.asarray(self.entries, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("one-body matrix must be square")
        if not np.all(np.isfinite(h)):
            raise ValueError("one-body matrix has non-finite entries")
        if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("one-body matrix is not Hermitian")
        object.__setattr__(self, "entries", h)
        if self.mode_space is None:
            object.__setattr__(self, "mode_space", ModeSpace(h.shape[0]))
        elif self.mode_space.dimension != h.shape[0]:
            raise ValueError("mode space and matrix size disagree")

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]


class TwoBodyTensor:
    """Sparse rank-4 tensor ``w_ijkl = <u_i (x) u_j | w | u_k (x) u_l>``."""

    def __init__(self, dimension: int, terms: dict | None = None, check: bool = True):
        self.dimension = int(dimension)
        self.terms: dict[tuple[int, int, int, int], complex] = {}
        for key, val in (terms or {}).items():
            key = tuple(int(x) for x in key)
            if len(key) != 4 or min(key) < 0 or max(key) >= self.dimension:
                raise IndexError(f"bad two-body index {key}")
            if val != 0:
                self.terms[key] = complex(val)
        if check:
            self.check_symmetries()

    @classmethod
    def zeros(cls, dimension: int) -> "TwoBodyTensor":
        return cls(dimension, {})

    @classmethod
    def from_dense(cls, w: np.ndarray, atol: float = 0.0, check: bool = True) -> "TwoBodyTensor":
        w = np.asarray(w, dtype=complex)
        idx = np.argwhere(np.abs(w) > atol)
        return cls(w.shape[0], {tuple(i): w[tuple(i)] for i in idx}, check=check)

    @classmethod
    def symmetrized(cls, w: np.ndarray) -> "TwoBodyTensor":
        """Project an arbitrary dense tensor onto the Hermitian bosonic ones."""
        w = np.asarray(w, dtype=complex)
        w = 0.5 * (w + w.transpose(1, 0, 3, 2))
        w = 0.5 * (w + w.transpose(2, 3, 0, 1).conj())
        return cls.from_dense(w)

    def dense(self) -> np.ndarray:
        D = self.dimension
        out = np.zeros((D, D, D, D), dtype=complex)
        for key, val in self.terms.items():
            out[key] = val
        return out

    def as_pair_matrix(self) -> np.ndarray:
        """``W`` as a ``D^2 x D^2`` operator on the two-particle tensor space."""
        D = self.dimension
        return self.dense().reshape(D * D, D * D)

    def check_symmetries(self, tol: float = 1e-12) -> None:
        for (i, j, k, l), v in self.terms.items():
            if abs(v - np.conj(self.terms.get((k, l, i, j), 0))) > tol:
                raise ValueError(f"w not Hermitian at {(i, j, k, l)}")
            if abs(v - self.terms.get((j, i, l, k), 0)) > tol:
                raise ValueError(f"w not bosonic-symmetric at {(i, j, k, l)}")

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class ScalingSpec:
    beta: float = 0.0
    coupling_convention: Literal["per-pair", "unscaled"] = "per-pair"

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.coupling_convention not in ("per-pair", "unscaled"):
            raise ValueError(f"unknown convention {self.coupling_convention!r}")

    def coupling(self, n_particles: int) -> float:
        if self.coupling_convention == "unscaled":
            return 1.0
        if n_particles <= 1:
            return 0.0
        return 1.0 / (n_particles - 1)


@dataclass
class ManyBodyHamiltonian:
    matrix: sp.csr_matrix
    basis: OccupationBasis
    h: OneBodyMatrix
    W: TwoBodyTensor
    scaling: ScalingSpec
    coupling: float

    @property
    def dim(self) -> int:
        return self.basis.dim

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass
class GroundStateResult:
    energy: float
    vector: np.ndarray
    solver_residual: float
    iterations: int
    converged: bool = True
    degenerate: bool = False
    gap: float = math.inf

    def to_json(self) -> dict:
        return {
            "energy": float(self.energy),
            "solver_residual": float(self.solver_residual),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "degenerate": bool(self.degenerate),
            "gap": None if math.isinf(self.gap) else float(self.gap),
            "vector": [[float(z.real), float(z.imag)] for z in self.vector],
        }


@dataclass
class ReducedDensityMatrix:
    order: int
    matrix: np.ndarray
    normalization: Literal["binomial", "unit"]
    basis: OccupationBasis
    n_particles: int

    def as_binomial(self) -> np.ndarray:
        if self.normalization == "binomial":
            return self.matrix
        return self.matrix * math.comb(self.n_particles, self.order)

    def as_unit(self) -> np.ndarray:
        if self.normalization == "unit":
            return self.matrix
        return self.matrix / math.comb(self.n_particles, self.order)


def _as_one_body(h) -> OneBodyMatrix:
    return h if isinstance(h, OneBodyMatrix) else OneBodyMatrix(np.asarray(h))


def _triplets(word, basis_in: OccupationBasis, basis_out: OccupationBasis):
    occ, amp = apply_word_to_occupations(word, basis_in.states)
    keep = amp != 0
    return basis_out.ranks(occ[keep]), np.nonzero(keep)[0], amp[keep]


def assemble_hamiltonian(h, W: TwoBodyTensor, n_particles: int,
                         scaling: ScalingSpec | None = None) -> ManyBodyHamiltonian:
    """Sparse second-quantised Hamiltonian on the ``n_particles`` sector."""
    h = _as_one_body(h)
    scaling = scaling or ScalingSpec()
    if W.dimension != h.dimension:
        raise ValueError("h and W live on different mode spaces")
    if n_particles < 1:
        raise ValueError("need at least one particle")
    if n_particles == 1 and scaling.coupling_convention == "per-pair" and len(W):
        warnings.warn("N = 1 with per-pair coupling: interaction set to zero", stacklevel=2)
    c_N = scaling.coupling(n_particles)
    basis = OccupationBasis(n_particles, h.mode_space)
    rows, cols, vals = [], [], []
    D = h.dimension
    for j in range(D):
        for k in range(D):
            if h.entries[j, k] != 0:
                r, c, a = _triplets(((j, True), (k, False)), basis, basis)
                rows.append(r), cols.append(c), vals.append(h.entries[j, k] * a)
    if c_N != 0 and n_particles >= 2:
        # group by annihilator pair so a_k a_l is applied once per pair
        by_pair: dict[tuple[int, int], list] = {}
        for (i, j, k, l), w in W.terms.items():
            by_pair.setdefault((k, l), []).append((i, j, w))
        for (k, l), creators in by_pair.items():
            occ, amp = apply_word_to_occupations(((k, False), (l, False)), basis.states)
            alive = amp != 0
            occ, amp, src = occ[alive], amp[alive], np.nonzero(alive)[0]
            for i, j, w in creators:
                occ2, amp2 = apply_word_to_occupations(((i, True), (j, True)), occ)
                rows.append(basis.ranks(occ2))
                cols.append(src)
                vals.append(0.5 * c_N * w * amp * amp2)
    if rows:
        mat = sp.csr_matrix((np.concatenate(vals).astype(complex),
                             (np.concatenate(rows), np.concatenate(cols))),
                            shape=(basis.dim, basis.dim))
    else:
        mat = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    mat = ((mat + mat.getH()) * 0.5).tocsr()
    mat.sum_duplicates()
    return ManyBodyHamiltonian(mat, basis, h, W, scaling, c_N)


def _matrix_of(H) -> sp.spmatrix | np.ndarray:
    return H.matrix if isinstance(H, ManyBodyHamiltonian) else H


def dense_ground_state(H) -> GroundStateResult:
    """Dense-diagonalisation oracle."""
    A = _matrix_of(H)
    A = A.toarray() if sp.issparse(A) else np.asarray(A)
    vals, vecs = la.eigh(A)
    v = _fix_phase(vecs[:, 0])
    res = float(np.linalg.norm(A @ v - vals[0] * v))
    gap = float(vals[1] - vals[0]) if len(vals) > 1 else math.inf
    return GroundStateResult(float(vals[0]), v, res, 0, True,
                             gap < 1e-8 * max(1.0, abs(vals[0])), gap)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v) > 1e-8 * np.abs(v).max())) if np.any(v) else 0
    phase = v[k] / abs(v[k]) if v[k] != 0 else 1.0
    return v / phase / np.linalg.norm(v)


def ground_state(H, tol: float = 1e-12, maxiter: int | None = None,
                 seed: int = 0, degeneracy_tol: float = 1e-8) -> GroundStateResult:
    """Lowest eigenpair through an implicitly restarted Lanczos iteration.

    Two Ritz pairs are requested so that a (near-)degenerate ground state is
    reported through ``degenerate``; the returned vector is whichever one the
    fixed-seed start vector converges to.
    """
    A = _matrix_of(H)
    n = A.shape[0]
    if n <= 8:
        return dense_ground_state(A)
    calls = 0
    # ARPACK drops an exactly-zero eigenvalue (its start vector is pushed into
    # the range of the operator), so run on A - shift with spectrum >= 1
    absrow = np.asarray(abs(A).sum(axis=1)).ravel()
    diag = np.real(A.diagonal())
    shift = float(np.min(diag - (absrow - np.abs(diag)))) - 1.0

    def matvec(x):
        nonlocal calls
        calls += 1
        return A @ x - shift * x

    op = spla.LinearOperator((n, n), matvec=matvec, dtype=complex)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    k = 2
    converged = True
    try:
        vals, vecs = spla.eigsh(op, k=k, which="SA", v0=v0, tol=tol * 1e-2,
                                maxiter=maxiter or max(1000, 20 * n))
    except spla.ArpackNoConvergence as err:
        converged = False
        vals, vecs = err.eigenvalues, err.eigenvectors
        if len(vals) == 0:
            raise
    order = np.argsort(vals)
    vals, vecs = vals[order] + shift, vecs[:, order]
    v = _fix_phase(vecs[:, 0])
    energy = float(np.real(np.vdot(v, A @ v)))
    residual = float(np.linalg.norm(A @ v - energy * v))
    gap = float(vals[1] - vals[0]) if len(vals) > 1 else math.inf
    degenerate = gap < degeneracy_tol * max(1.0, abs(energy))
    if residual > max(tol, 1e-9) * max(1.0, abs(energy)) and not degenerate:
        converged = False
    return GroundStateResult(energy, v, residual, calls, converged, degenerate, gap)


# --------------------------------------------------------------------------
# Reduced density matrices


def reduced_density_matrix(psi: np.ndarray, basis: OccupationBasis, k: int,
                           normalization: Literal["binomial", "unit"] = "binomial"
                           ) -> ReducedDensityMatrix:
    """``Gamma^(k)`` on the symmetric ``k``-sector, from ladder expectations.

    ``<m|Gamma^(k)|m'> = <A_m' Psi, A_m Psi> / sqrt(m! m'!)`` with
    ``A_m = prod_j a_j^{m_j}``; for ``k = 1`` this is ``<a+_j a_i>``.
    """
    N = basis.n_particles
    if not 1 <= k <= N:
        raise ValueError(f"order k={k} outside 1..{N}")
    psi = np.asarray(psi, dtype=complex)
    sector = OccupationBasis(k, basis.modes)
    lower = OccupationBasis(N - k, basis.modes)
    phis = np.empty((lower.dim, sector.dim), dtype=complex)
    for col, m in enumerate(sector.states):
        word = tuple((j, False) for j in range(basis.n_modes) for _ in range(m[j]))
        norm = math.sqrt(math.prod(math.factorial(int(x)) for x in m))
        phis[:, col] = word_matrix(word, basis, lower) @ psi / norm
    gamma = phis.T @ phis.conj()
    gamma = 0.5 * (gamma + gamma.conj().T)
    if normalization == "unit":
        gamma = gamma / math.comb(N, k)
    elif normalization != "binomial":
        raise ValueError(f"unknown normalization {normalization!r}")
    return ReducedDensityMatrix(k, gamma, normalization, sector, N)


def symmetric_isometry(k: int, n_modes: int) -> np.ndarray:
    """Columns embed the occupation basis of Sym^k into the full ``D^k`` tensor space."""
    sector = OccupationBasis(k, n_modes)
    S = np.zeros((n_modes ** k, sector.dim))
    for idx in np.ndindex(*([n_modes] * k)):
        occ = np.bincount(np.array(idx, dtype=int), minlength=n_modes)
        col = sector.index_of(occ)
        S[np.ravel_multi_index(idx, [n_modes] * k), col] = 1.0
    return S / np.sqrt(S.sum(axis=0))[None, :]


def to_tensor(matrix: np.ndarray, k: int, n_modes: int) -> np.ndarray:
    S = symmetric_isometry(k, n_modes)
    return S @ matrix @ S.T


def partial_trace_last(full: np.ndarray, k: int, n_modes: int) -> np.ndarray:
    """Trace out the last factor of a ``D^k x D^k`` operator."""
    D = n_modes
    t = full.reshape(D ** (k - 1), D, D ** (k - 1), D)
    return np.einsum("aibi->ab", t)


def condensate_fraction(gamma1: ReducedDensityMatrix | np.ndarray,
                        n_particles: int | None = None, tie_tol: float = 1e-10):
    """Largest eigenvalue of ``Gamma^(1)/N`` and its eigenvector.

    In a degenerate top eigenspace the vector returned is the projection of
    the lowest-index unit vector with non-zero overlap.
    """
    if isinstance(gamma1, ReducedDensityMatrix):
        if gamma1.order != 1:
            raise ValueError("condensate fraction needs the one-body matrix")
        g = gamma1.as_unit()
    else:
        g = np.asarray(gamma1, dtype=complex)
        if n_particles:
            g = g / n_particles
    vals, vecs = la.eigh(g)
    top = vals[-1]
    space = vecs[:, vals > top - tie_tol]
    for j in range(g.shape[0]):
        proj = space @ space[j].conj()
        if np.linalg.norm(proj) > 1e-8:
            return float(top), _fix_phase(proj)
    return float(top), _fix_phase(vecs[:, -1])


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Trace norm of ``a - b`` (no factor 1/2)."""
    d = np.asarray(a) - np.asarray(b)
    return float(np.abs(la.eigvalsh(0.5 * (d + d.conj().T))).sum())


# --------------------------------------------------------------------------
# Mean-field comparisons


def hartree_functional(h, W: TwoBodyTensor, u: np.ndarray) -> float:
    """``<u|h|u> + (1/2) <u (x) u|W|u (x) u>``."""
    h = _as_one_body(h).entries
    u = np.asarray(u, dtype=complex)
    kin = np.vdot(u, h @ u).real
    inter = 0.0
    for (i, j, k, l), w in W.terms.items():
        inter += (w * np.conj(u[i] * u[j]) * u[k] * u[l]).real
    return float(kin + 0.5 * inter)


def hartree_upper_bound(h, W: TwoBodyTensor, n_particles: int,
                        scaling: ScalingSpec | None, u: np.ndarray) -> float:
    """``<u^N|H_N|u^N>/N`` computed in closed form."""
    u = np.asarray(u, dtype=complex)
    if abs(np.linalg.norm(u) - 1) > 1e-10:
        raise ValueError("u must be normalised")
    scaling = scaling or ScalingSpec()
    h = _as_one_body(h).entries
    c_N = scaling.coupling(n_particles)
    inter = sum((w * np.conj(u[i] * u[j]) * u[k] * u[l]).real
                for (i, j, k, l), w in W.terms.items())
    return float(np.vdot(u, h @ u).real + 0.5 * c_N * (n_particles - 1) * inter)


def second_moment(psi: np.ndarray, basis: OccupationBasis, h) -> float:
    """``C(N,2)^{-1} Tr(h (x) h Gamma^(2))`` with ``h`` shifted to be non-negative.

    Uses ``sum_{p != q} h_p h_q = dGamma(h)^2 - dGamma(h^2)``.
    """
    h = _as_one_body(h).entries
    lam_min = la.eigvalsh(h)[0]
    shift = -lam_min if lam_min < 0 else 0.0
    if shift:
        log.info("second_moment: shifting h by %.6g to make it non-negative", shift)
    hs = h + shift * np.eye(h.shape[0])
    N = basis.n_particles
    if N < 2:
        return 0.0
    psi = np.asarray(psi, dtype=complex)
    dh = one_body_operator(hs, basis)
    dh2 = one_body_operator(hs @ hs, basis)
    x = dh @ psi
    pair_sum = 0.5 * (np.vdot(x, x).real - np.vdot(psi, dh2 @ psi).real)
    return float(pair_sum / math.comb(N, 2))


@dataclass
class LocalizedTwoBody:
    projected: np.ndarray        # P(x)P H2^eps P(x)P in the low-energy eigenbasis of h
    excited_weight_operator: np.ndarray  # Q(x)1 + 1(x)Q on the full pair space
    P_rank: int
    P_basis: np.ndarray          # D x rank, columns span Ran P
    H2: np.ndarray
    empty: bool = False

    def lower_operator(self, Lambda: float) -> np.ndarray:
        """Right-hand side of the localisation inequality on the full pair space."""
        PP = np.kron(self.P_basis, self.P_basis)
        return PP @ self.projected @ PP.conj().T + 0.5 * Lambda * self.excited_weight_operator


def two_body_hamiltonian(h, W: TwoBodyTensor, n_particles: int,
                         scaling: ScalingSpec | None = None) -> np.ndarray:
    """``h (x) 1 + 1 (x) h + c_N (N-1) W`` on the full pair space."""
    h = _as_one_body(h).entries
    scaling = scaling or ScalingSpec()
    D = h.shape[0]
    strength = scaling.coupling(n_particles) * (n_particles - 1)
    eye = np.eye(D)
    return np.kron(h, eye) + np.kron(eye, h) + strength * W.as_pair_matrix()


def localize_two_body(h, W: TwoBodyTensor, n_particles: int, scaling: ScalingSpec | None,
                      Lambda: float, eps: float = 0.0) -> LocalizedTwoBody:
    """Split the pair Hamiltonian along the spectral projector of ``h`` below ``Lambda``."""
    hmat = _as_one_body(h).entries
    D = hmat.shape[0]
    H2 = two_body_hamiltonian(hmat, W, n_particles, scaling)
    vals, vecs = la.eigh(hmat)
    P_basis = vecs[:, vals <= Lambda]
    rank = P_basis.shape[1]
    Qmat = np.eye(D) - P_basis @ P_basis.conj().T
    excited = np.kron(Qmat, np.eye(D)) + np.kron(np.eye(D), Qmat)
    if eps:
        Wabs = _operator_abs(W.as_pair_matrix()) * scaling_strength(n_particles, scaling)
        H2eps = H2 - eps * Wabs
    else:
        H2eps = H2
    PP = np.kron(P_basis, P_basis)
    projected = PP.conj().T @ H2eps @ PP
    if rank == 0:
        warnings.warn("Lambda below the spectrum of h: P = 0", stacklevel=2)
    return LocalizedTwoBody(projected, excited, rank, P_basis, H2, rank == 0)


def scaling_strength(n_particles: int, scaling: ScalingSpec | None) -> float:
    scaling = scaling or ScalingSpec()
    return scaling.coupling(n_particles) * (n_particles - 1)


def _operator_abs(M: np.ndarray) -> np.ndarray:
    vals, vecs = la.eigh(0.5 * (M + M.conj().T))
    return (vecs * np.abs(vals)) @ vecs.conj().T


def localization_gap(loc: LocalizedTwoBody, Lambda: float) -> float:
    """Lowest eigenvalue of ``H2 - (P H2^eps P + Lambda/2 (Q(x)1 + 1(x)Q))``."""
    diff = loc.H2 - loc.lower_operator(Lambda)
    return float(la.eigvalsh(0.5 * (diff + diff.conj().T))[0])


# --------------------------------------------------------------------------
# Excitation map


@dataclass
class ExcitationDecomposition:
    sectors: list[np.ndarray]     # phi_k over OccupationBasis(k, D-1)
    complement: np.ndarray        # D x (D-1), orthonormal basis of u-perp

    def weights(self) -> np.ndarray:
        return np.array([np.vdot(p, p).real for p in self.sectors])


def completed_unitary(u: np.ndarray) -> np.ndarray:
    """Unitary whose first column is ``u`` (Householder completion)."""
    u = np.asarray(u, dtype=complex)
    D = u.shape[0]
    M = np.eye(D, dtype=complex)
    M[:, 0] = u
    Q, R = np.linalg.qr(M)
    Q[:, 0] *= R[0, 0] / abs(R[0, 0])
    return Q


def change_mode_basis(psi: np.ndarray, basis: OccupationBasis, U: np.ndarray) -> np.ndarray:
    """Coefficients of ``psi`` in the occupation basis built on the columns of ``U``."""
    X = la.logm(U)
    X = 0.5 * (X - X.conj().T)
    gen = one_body_operator(X, basis)
    return spla.expm_multiply(-gen, np.asarray(psi, dtype=complex))


def excitation_decompose(psi: np.ndarray, basis: OccupationBasis,
                         u: np.ndarray) -> ExcitationDecomposition:
    """Components ``phi_k`` in ``Psi = sum_k phi_k (x)_sym u^{(x)(N-k)}``."""
    u = np.asarray(u, dtype=complex)
    if abs(np.linalg.norm(u) - 1) > 1e-10:
        raise ValueError("u must be normalised")
    N, D = basis.n_particles, basis.n_modes
    U = completed_unitary(u)
    coeffs = change_mode_basis(psi, basis, U)
    sectors = []
    for k in range(N + 1):
        if D == 1:
            sectors.append(np.array([coeffs[0]]) if k == 0 else np.zeros(0, dtype=complex))
            continue
        sub = OccupationBasis(k, D - 1)
        occ = np.hstack([np.full((sub.dim, 1), N - k), sub.states])
        sectors.append(coeffs[basis.ranks(occ)])
    return ExcitationDecomposition(sectors, U[:, 1:])


# --------------------------------------------------------------------------
# Hoffmann-Ostenhof^2 inequality on a lattice


def hoffmann_ostenhof_gap(psi: np.ndarray, basis: OccupationBasis, h) -> float:
    """``Tr(h Gamma^(1)) - <sqrt(rho), h sqrt(rho)>`` for a lattice one-body ``h``."""
    hmat = _as_one_body(h).entries
    if np.max(np.abs(hmat.imag), initial=0.0) > 1e-14:
        raise ValueError("h must be real symmetric")
    hr = hmat.real
    off = hr - np.diag(np.diag(hr))
    if np.any(off > 0):
        raise ValueError("h has positive off-diagonal entries")
    gamma = reduced_density_matrix(psi, basis, 1).matrix
    lhs = np.trace(hr @ gamma).real
    root = np.sqrt(np.clip(np.diag(gamma).real, 0, None))
    return float(lhs - root @ hr @ root)


# --------------------------------------------------------------------------
# JSON model files


def load_model(source) -> tuple[OneBodyMatrix, TwoBodyTensor]:
    """Read ``{"D", "h": [[re, im], ...], "w_terms": [...]}``.

    ``h`` is row-major: either ``D*D`` pairs or ``D`` rows of ``D`` pairs.
    """
    if isinstance(source, (str, Path)):
        data = json.loads(Path(source).read_text())
    else:
        data = source
    D = int(data["D"])
    raw = np.asarray(data["h"], dtype=float)
    h = (raw[..., 0] + 1j * raw[..., 1]).reshape(D, D)
    terms = {}
    for t in data.get("w_terms", []):
        key = (t["i"], t["j"], t["k"], t["l"])
        terms[key] = terms.get(key, 0) + complex(t.get("re", 0.0), t.get("im", 0.0))
    return OneBodyMatrix(h), TwoBodyTensor(D, terms)


def dump_model(h, W: TwoBodyTensor) -> dict:
    h = _as_one_body(h).entries
    D = h.shape[0]
    return {
        "D": D,
        "h": [[float(z.real), float(z.imag)] for z in h.ravel()],
        "w_terms": [{"i": i, "j": j, "k": k, "l": l, "re": float(v.real), "im": float(v.imag)}
                    for (i, j, k, l), v in sorted(W.terms.items())],
    }


def random_instance(rng: np.random.Generator, n_modes: int, interaction: float = 1.0,
                    real: bool = False) -> tuple[OneBodyMatrix, TwoBodyTensor]:
    """Random Hermitian ``h`` and a random Hermitian bosonic ``W``."""
    D = n_modes
    A = rng.standard_normal((D, D)) + (0 if real else 1j) * rng.standard_normal((D, D))
    h = 0.5 * (A + A.conj().T)
    w = rng.standard_normal((D,) * 4) + (0 if real else 1j) * rng.standard_normal((D,) * 4)
    W = TwoBodyTensor.symmetrized(interaction * w)
    return OneBodyMatrix(h), W


def toy_model(g: float = 2.0) -> tuple[OneBodyMatrix, TwoBodyTensor]:
    """Two modes, ``h = diag(0, 1)``, only ``w_1111 = g``."""
    return OneBodyMatrix(np.diag([0.0, 1.0])), TwoBodyTensor(2, {(0, 0, 0, 0): g})


__all__ = [
    "OneBodyMatrix", "TwoBodyTensor", "ScalingSpec", "ManyBodyHamiltonian",
    "GroundStateResult", "ReducedDensityMatrix", "assemble_hamiltonian", "ground_state",
    "dense_ground_state", "reduced_density_matrix", "condensate_fraction", "hartree_upper_bound",
    "hartree_functional", "second_moment", "localize_two_body", "localization_gap",
    "excitation_decompose", "hoffmann_ostenhof_gap", "load_model", "dump_model",
    "trace_distance", "basis_dimension", "toy_model", "random_instance",
]
