"""Coherent states, the lower-symbol de Finetti measure and polynomial symbol calculus.

The de Finetti measure of a bosonic state ``Gamma_N`` on ``C^D`` is

    d mu_N(u) = D_N <u^N | Gamma_N | u^N> du,     D_N = dim Sym^N(C^D),

with ``du`` the normalised uniform measure on the unit sphere.  It is
sampled by importance sampling; the estimator of
``int |u^k><u^k| d mu_N`` is self-normalised.

Symbols are polynomials ``sum c_{alpha beta} conj(z)^alpha z^beta`` stored as
``{(alpha, beta): c}`` with multi-indices ``alpha, beta`` of length ``D``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as la
from scipy.special import gammaln, roots_jacobi

from .fock import OccupationBasis, TruncatedFock, basis_dimension, word_matrix


# --------------------------------------------------------------------------
# Sampling on the unit sphere of C^D


@dataclass
class SphereSampler:
    """Haar-distributed unit vectors from normalised complex Gaussians.

    Samples are drawn in ``chunks`` with independent child seeds and merged
    in chunk order, so the stream does not depend on how work is scheduled.
    """

    dimension: int
    seed: int = 0
    samples: int = 20000
    chunks: int = 20

    def __post_init__(self):
        if self.dimension < 1 or self.samples < 1 or self.chunks < 1:
            raise ValueError("dimension, samples and chunks must be positive")

    def streams(self) -> list[np.random.Generator]:
        children = np.random.SeedSequence(self.seed).spawn(self.chunks)
        return [np.random.default_rng(c) for c in children]

    def chunk_sizes(self) -> list[int]:
        base, extra = divmod(self.samples, self.chunks)
        return [base + (i < extra) for i in range(self.chunks)]

    def uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = rng.standard_normal((n, self.dimension)) + 1j * rng.standard_normal((n, self.dimension))
        return z / np.linalg.norm(z, axis=1, keepdims=True)

    def tilted(self, rng: np.random.Generator, n: int, center: np.ndarray, power: int) -> np.ndarray:
        """Samples with density ``D_power |<center, u>|^(2 power)`` relative to ``du``."""
        D = self.dimension
        c = np.asarray(center, dtype=complex)
        c = c / np.linalg.norm(c)
        if D == 1:
            return np.exp(2j * np.pi * rng.random((n, 1))) * c[None, :]
        t = rng.beta(power + 1, D - 1, size=n)
        phase = np.exp(2j * np.pi * rng.random(n))
        w = self.uniform(rng, n)
        w = w - (w @ c.conj())[:, None] * c[None, :]
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        return np.sqrt(t)[:, None] * phase[:, None] * c[None, :] + np.sqrt(1 - t)[:, None] * w


def coherent_vectors(U: np.ndarray, basis: OccupationBasis) -> np.ndarray:
    """Rows ``u^{(x)N}`` in the occupation basis for each row ``u`` of ``U``."""
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    occ = basis.states
    N = basis.n_particles
    log_mult = 0.5 * (gammaln(N + 1) - gammaln(occ + 1).sum(axis=1))
    with np.errstate(divide="ignore"):
        logU = np.log(U)
    # n_j log u_j with the convention 0 * log 0 = 0
    terms = np.where(occ[None, :, :] > 0, occ[None, :, :] * logU[:, None, :], 0.0)
    return np.exp(log_mult[None, :] + terms.sum(axis=2))


# --------------------------------------------------------------------------
# Symmetric states


@dataclass
class SymmetricState:
    """Mixture ``sum_m p_m |psi_m><psi_m|`` of normalised vectors on ``Sym^N(C^D)``."""

    basis: OccupationBasis
    vectors: np.ndarray        # (n_components, dim)
    probabilities: np.ndarray
    centers: np.ndarray | None = None   # modes around which the weight concentrates

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if self.vectors.shape != (len(self.probabilities), self.basis.dim):
            raise ValueError("vectors and probabilities disagree with the basis")
        if np.any(self.probabilities < 0) or abs(self.probabilities.sum() - 1) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to one")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(np.abs(norms - 1) > 1e-10):
            raise ValueError("component vectors must be normalised")

    @classmethod
    def pure(cls, psi: np.ndarray, basis: OccupationBasis, center=None) -> "SymmetricState":
        c = None if center is None else np.atleast_2d(center)
        return cls(basis, np.atleast_2d(psi), np.ones(1), c)

    @classmethod
    def condensate(cls, u: np.ndarray, N: int) -> "SymmetricState":
        u = np.asarray(u, dtype=complex)
        u = u / np.linalg.norm(u)
        basis = OccupationBasis(N, len(u))
        return cls.pure(basis.product_state(u), basis, center=u)

    @classmethod
    def coherent_mixture(cls, probabilities, modes, N: int) -> "SymmetricState":
        """``sum_m p_m |v_m^N><v_m^N|``; its one-body matrix is ``N sum p_m |v_m><v_m|``."""
        modes = np.atleast_2d(np.asarray(modes, dtype=complex))
        modes = modes / np.linalg.norm(modes, axis=1, keepdims=True)
        basis = OccupationBasis(N, modes.shape[1])
        vecs = np.array([basis.product_state(v) for v in modes])
        return cls(basis, vecs, np.asarray(probabilities, float), modes)

    @classmethod
    def maximally_mixed(cls, N: int, D: int) -> "SymmetricState":
        basis = OccupationBasis(N, D)
        return cls(basis, np.eye(basis.dim, dtype=complex), np.full(basis.dim, 1 / basis.dim))

    @property
    def n_particles(self) -> int:
        return self.basis.n_particles

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes

    def density_matrix(self) -> np.ndarray:
        return (self.vectors.T * self.probabilities) @ self.vectors.conj()

    def overlaps(self, U: np.ndarray) -> np.ndarray:
        """``<u^N|Gamma|u^N>`` for each row of ``U``."""
        C = coherent_vectors(U, self.basis)
        amp = C.conj() @ self.vectors.T
        return (np.abs(amp) ** 2) @ self.probabilities

    def reduced(self, k: int) -> np.ndarray:
        """``Gamma^(k)`` with trace ``C(N, k)``."""
        from .manybody import reduced_density_matrix
        out = 0
        for p, psi in zip(self.probabilities, self.vectors):
            if p:
                out = out + p * reduced_density_matrix(psi, self.basis, k).matrix
        return out


# --------------------------------------------------------------------------
# The measure


@dataclass
class LowerSymbolMeasure:
    """Importance-weighted samples of ``mu_N``: ``int F d mu ~ mean(weights * F(u))``."""

    state: SymmetricState
    samples: np.ndarray
    weights: np.ndarray
    batch: np.ndarray          # chunk label of each sample, for error estimates
    D_N: int

    @property
    def mean_weight(self) -> float:
        return float(self.weights.mean())

    def mean_weight_error(self) -> float:
        return _batch_stderr(self.weights, self.batch)


def _batch_stderr(values: np.ndarray, labels: np.ndarray) -> float:
    groups = np.unique(labels)
    means = np.array([values[labels == g].mean() for g in groups])
    return float(means.std(ddof=1) / math.sqrt(len(groups))) if len(groups) > 1 else float("nan")


def ckmr_measure(state: SymmetricState, sampler: SphereSampler, tilt: float | None = None,
                 centers: np.ndarray | None = None) -> LowerSymbolMeasure:
    """Sample the lower-symbol measure of ``state``.

    The proposal is the defensive mixture ``(1 - tilt) du + tilt * sum_c p_c
    D_N |<c,u>|^(2N) du`` over ``centers`` (default: the state's own
    centers, if any), drawn with stratified counts per chunk.  Weights are
    ``D_N <u^N|Gamma|u^N> / q(u)``.
    """
    N, D = state.n_particles, state.n_modes
    if sampler.dimension != D:
        raise ValueError("sampler and state have different dimensions")
    D_N = basis_dimension(N, D)
    centers = state.centers if centers is None else np.atleast_2d(centers)
    if centers is None or N == 0:
        tilt = 0.0
    elif tilt is None:
        tilt = 1.0 if len(centers) == 1 and state.probabilities.size == 1 else 0.9
    probs = None
    if tilt > 0:
        centers = centers / np.linalg.norm(centers, axis=1, keepdims=True)
        if state.centers is not None and len(state.centers) == len(state.probabilities):
            probs = state.probabilities
        else:
            probs = np.full(len(centers), 1 / len(centers))
    samples, batch, q_parts = [], [], []
    for label, (rng, n) in enumerate(zip(sampler.streams(), sampler.chunk_sizes())):
        if tilt > 0:
            # stratified counts; the proposal density uses the realised fractions
            counts = _stratify(n, np.concatenate([[1 - tilt], tilt * probs]))
            parts = [sampler.uniform(rng, counts[0])]
            for c in range(len(centers)):
                parts.append(sampler.tilted(rng, counts[c + 1], centers[c], N))
            block = np.concatenate(parts)
            dens = D_N * np.abs(block @ centers.conj().T) ** (2 * N)
            q_parts.append(counts[0] / n + dens @ (counts[1:] / n))
        else:
            block = sampler.uniform(rng, n)
            q_parts.append(np.ones(n))
        samples.append(block)
        batch.append(np.full(len(block), label))
    U = np.concatenate(samples)
    q = np.concatenate(q_parts)
    target = D_N * state.overlaps(U)
    if np.any(target < -1e-12):
        raise ValueError("negative weight: input state is not positive")
    return LowerSymbolMeasure(state, U, target / q, np.concatenate(batch), D_N)


def _stratify(n: int, fractions: np.ndarray) -> np.ndarray:
    """Largest-remainder split of ``n`` draws according to ``fractions``."""
    raw = n * np.asarray(fractions, float)
    counts = np.floor(raw).astype(int)
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[: n - counts.sum()]] += 1
    return counts


@dataclass
class Reconstruction:
    matrix: np.ndarray
    error: np.ndarray          # entrywise jackknife standard error
    basis: OccupationBasis
    insufficient: bool = False


def _weighted_projector_sums(measure: LowerSymbolMeasure, k: int):
    basis = OccupationBasis(k, measure.state.n_modes)
    labels = np.unique(measure.batch)
    S, W = [], []
    for g in labels:
        m = measure.batch == g
        C = coherent_vectors(measure.samples[m], basis)
        w = measure.weights[m]
        S.append((C.T * w) @ C.conj())
        W.append(w.sum())
    return basis, np.array(S), np.array(W)


def reconstruct_rdm(measure: LowerSymbolMeasure, k: int, rel_tol: float = 0.1) -> Reconstruction:
    """Self-normalised estimate of ``int |u^k><u^k| d mu_N`` on ``Sym^k``."""
    if k > measure.state.n_particles:
        raise ValueError("k exceeds the particle number")
    basis, S, W = _weighted_projector_sums(measure, k)
    est = S.sum(0) / W.sum()
    jack = np.array([(S.sum(0) - S[b]) / (W.sum() - W[b]) for b in range(len(W))])
    n = len(W)
    err = np.sqrt((n - 1) / n * np.sum(np.abs(jack - jack.mean(0)) ** 2, axis=0))
    scale = np.abs(est).max()
    return Reconstruction(0.5 * (est + est.conj().T), err, basis,
                          bool(err.max() > rel_tol * scale))


def exact_reconstruction(state: SymmetricState, k: int) -> np.ndarray:
    """Closed form of ``int |u^k><u^k| d mu_N`` from anti-normal-ordered moments.

    ``<m|.|m'> = (N+D-1)! k! / (N+k+D-1)! * <A+_m Psi, A+_m' Psi> / sqrt(m! m'!)``
    with ``A+_m = prod_j (a+_j)^{m_j}``.
    """
    N, D = state.n_particles, state.n_modes
    sector = OccupationBasis(k, D)
    upper = OccupationBasis(N + k, D)
    const = math.exp(gammaln(N + D) + gammaln(k + 1) - gammaln(N + k + D))
    out = np.zeros((sector.dim, sector.dim), dtype=complex)
    for p, psi in zip(state.probabilities, state.vectors):
        if not p:
            continue
        chi = np.empty((upper.dim, sector.dim), dtype=complex)
        for col, m in enumerate(sector.states):
            word = tuple((j, True) for j in range(D) for _ in range(m[j]))
            nrm = math.sqrt(math.prod(math.factorial(int(x)) for x in m))
            chi[:, col] = word_matrix(word, state.basis, upper) @ psi / nrm
        out += p * const * (chi.conj().T @ chi)
    return 0.5 * (out + out.conj().T)


@dataclass
class DeFinettiError:
    distance: float
    stderr: float
    constant: float        # distance * N / (D k)
    flagged: bool


def _trace_norm(M: np.ndarray) -> float:
    return float(np.abs(la.eigvalsh(0.5 * (M + M.conj().T))).sum())


def definetti_error(state: SymmetricState, k: int, sampler: SphereSampler | None = None,
                    measure: LowerSymbolMeasure | None = None, exact: bool = False
                    ) -> DeFinettiError:
    """``Tr | C(N,k)^{-1} Gamma^(k) - int |u^k><u^k| d mu_N |`` with a jackknife error."""
    N, D = state.n_particles, state.n_modes
    if k == 0:
        return DeFinettiError(0.0, 0.0, 0.0, False)
    if k > N:
        raise ValueError("k exceeds the particle number")
    target = state.reduced(k) / math.comb(N, k)
    if exact:
        dist = _trace_norm(target - exact_reconstruction(state, k))
        return DeFinettiError(dist, 0.0, dist * N / (D * k), False)
    if measure is None:
        if sampler is None:
            raise ValueError("need a sampler or a measure")
        measure = ckmr_measure(state, sampler)
    _, S, W = _weighted_projector_sums(measure, k)
    dist = _trace_norm(target - S.sum(0) / W.sum())
    n = len(W)
    jack = np.array([_trace_norm(target - (S.sum(0) - S[b]) / (W.sum() - W[b])) for b in range(n)])
    err = math.sqrt((n - 1) / n * np.sum((jack - jack.mean()) ** 2))
    return DeFinettiError(dist, err, dist * N / (D * k), bool(err > 0.1 * dist))


# --------------------------------------------------------------------------
# Schur resolution of the identity


def sphere_quadrature(D: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights on the unit sphere of ``C^D`` exact for ``u^alpha conj(u)^beta``
    with ``|alpha|, |beta| <= degree``.

    Stick-breaking of ``t = (|u_1|^2, ..., |u_D|^2)`` (uniform on the simplex)
    with Gauss-Jacobi nodes, times equispaced phases.
    """
    n = degree + 1
    pts_t = np.ones((1, 0))
    wts = np.ones(1)
    remaining = np.ones(1)
    for j in range(D - 1):
        b = D - 1 - j            # x_j ~ Beta(1, b) on [0, 1]
        x, w = roots_jacobi(n, b - 1, 0)
        # Jacobi weight (1-y)^(b-1) on [-1, 1] maps to (1-x)^(b-1) on [0, 1]
        x = (x + 1) / 2
        w = w / w.sum()
        share = remaining[:, None] * x[None, :]
        pts_t = np.concatenate([np.repeat(pts_t, n, axis=0), share.reshape(-1, 1)], axis=1)
        remaining = (remaining[:, None] * (1 - x)[None, :]).ravel()
        wts = (wts[:, None] * w[None, :]).ravel()
    t = np.concatenate([pts_t, remaining[:, None]], axis=1)
    n_phase = 2 * degree + 1
    phases = np.exp(2j * np.pi * np.arange(n_phase) / n_phase)
    grids = np.meshgrid(*([np.arange(n_phase)] * D), indexing="ij")
    ph = np.stack([phases[g.ravel()] for g in grids], axis=1)
    pts = (np.sqrt(t)[:, None, :] * ph[None, :, :]).reshape(-1, D)
    weights = np.repeat(wts, len(ph)) / len(ph)
    return pts, weights


def schur_check(D: int, N: int, sampler: SphereSampler | None = None,
                exact: bool = False) -> float:
    """Operator-norm deviation of ``D_N int |u^N><u^N| du`` from the identity."""
    basis = OccupationBasis(N, D)
    if exact:
        U, w = sphere_quadrature(D, N)
    else:
        if sampler is None:
            raise ValueError("need a sampler unless exact quadrature is requested")
        U = np.concatenate([sampler.uniform(rng, n)
                            for rng, n in zip(sampler.streams(), sampler.chunk_sizes())])
        w = np.full(len(U), 1 / len(U))
    C = coherent_vectors(U, basis)
    avg = basis_dimension(N, D) * (C.T * w) @ C.conj()
    return float(np.abs(la.eigvalsh(avg - np.eye(basis.dim))).max())


def schur_average(D: int, N: int, sampler: SphereSampler) -> np.ndarray:
    basis = OccupationBasis(N, D)
    U = np.concatenate([sampler.uniform(rng, n)
                        for rng, n in zip(sampler.streams(), sampler.chunk_sizes())])
    C = coherent_vectors(U, basis)
    return basis_dimension(N, D) * (C.T @ C.conj()) / len(U)


# --------------------------------------------------------------------------
# Symbol calculus


MultiIndex = tuple[int, ...]


@dataclass
class SymbolPolynomial:
    """``sum c_{alpha beta} conj(z)^alpha z^beta`` on ``C^D``.

    Read as an operator, the key ``(alpha, beta)`` stands for the
    normal-ordered monomial ``(a^+)^alpha a^beta``.
    """

    dimension: int
    terms: dict[tuple[MultiIndex, MultiIndex], complex] = field(default_factory=dict)
    degree_cap: int = 8

    def __post_init__(self):
        clean = {}
        for (al, be), c in self.terms.items():
            al, be = tuple(int(x) for x in al), tuple(int(x) for x in be)
            if len(al) != self.dimension or len(be) != self.dimension:
                raise ValueError("multi-index length must equal the dimension")
            if min(al + be, default=0) < 0:
                raise ValueError("negative exponent")
            if sum(al) + sum(be) > self.degree_cap:
                raise ValueError(f"degree above cap {self.degree_cap}")
            if c != 0:
                clean[(al, be)] = clean.get((al, be), 0) + complex(c)
        self.terms = {k: v for k, v in clean.items() if v != 0}

    @classmethod
    def constant(cls, D: int, c: complex) -> "SymbolPolynomial":
        return cls(D, {((0,) * D, (0,) * D): c})

    @classmethod
    def monomial(cls, D: int, creators: Sequence[int] = (), annihilators: Sequence[int] = (),
                 coeff: complex = 1.0) -> "SymbolPolynomial":
        al = np.bincount(np.asarray(creators, dtype=int), minlength=D)
        be = np.bincount(np.asarray(annihilators, dtype=int), minlength=D)
        return cls(D, {(tuple(al), tuple(be)): coeff})

    @classmethod
    def random(cls, rng: np.random.Generator, D: int, degree: int = 4,
               n_terms: int = 8) -> "SymbolPolynomial":
        terms = {}
        for _ in range(n_terms):
            tot = rng.integers(0, degree + 1)
            split = rng.integers(0, tot + 1)
            al = np.bincount(rng.integers(0, D, split), minlength=D)
            be = np.bincount(rng.integers(0, D, tot - split), minlength=D)
            terms[(tuple(al), tuple(be))] = rng.standard_normal() + 1j * rng.standard_normal()
        return cls(D, terms)

    @property
    def degree(self) -> int:
        return max((sum(a) + sum(b) for a, b in self.terms), default=0)

    def __call__(self, Z) -> complex:
        Z = np.asarray(Z, dtype=complex)
        Zb = Z.conj()
        total = 0j
        for (al, be), c in self.terms.items():
            total += c * np.prod(Zb ** np.array(al)) * np.prod(Z ** np.array(be))
        return total

    def __add__(self, other: "SymbolPolynomial") -> "SymbolPolynomial":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return SymbolPolynomial(self.dimension, out, max(self.degree_cap, other.degree_cap))

    def __sub__(self, other: "SymbolPolynomial") -> "SymbolPolynomial":
        return self + other.scale(-1)

    def __mul__(self, other: "SymbolPolynomial") -> "SymbolPolynomial":
        out: dict = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                key = (tuple(np.add(a1, a2)), tuple(np.add(b1, b2)))
                out[key] = out.get(key, 0) + c1 * c2
        return SymbolPolynomial(self.dimension, out, self.degree_cap + other.degree_cap)

    def scale(self, c: complex) -> "SymbolPolynomial":
        return SymbolPolynomial(self.dimension, {k: c * v for k, v in self.terms.items()},
                                self.degree_cap)

    def laplacian(self) -> "SymbolPolynomial":
        """``sum_j d/dz_j d/dconj(z_j)``."""
        out: dict = {}
        for (al, be), c in self.terms.items():
            for j in range(self.dimension):
                if al[j] and be[j]:
                    a2 = al[:j] + (al[j] - 1,) + al[j + 1:]
                    b2 = be[:j] + (be[j] - 1,) + be[j + 1:]
                    out[(a2, b2)] = out.get((a2, b2), 0) + c * al[j] * be[j]
        return SymbolPolynomial(self.dimension, out, self.degree_cap)

    def heat(self, t: float) -> "SymbolPolynomial":
        """``exp(t Laplacian)``; the series terminates on polynomials."""
        out = SymbolPolynomial(self.dimension, dict(self.terms), self.degree_cap)
        term = self
        k = 0
        while term.terms:
            k += 1
            term = term.laplacian().scale(t / k)
            out = out + term
        return out

    def max_coefficient_difference(self, other: "SymbolPolynomial") -> float:
        diff = (self - other).terms
        return max((abs(v) for v in diff.values()), default=0.0)

    def operator_words(self, anti: bool = False):
        """Ladder words of each term: creators left (Wick) or right (anti-Wick) of annihilators."""
        for (al, be), c in self.terms.items():
            cre = tuple((j, True) for j in range(self.dimension) for _ in range(al[j]))
            ann = tuple((j, False) for j in range(self.dimension) for _ in range(be[j]))
            yield (ann + cre if anti else cre + ann), c


def lower_symbol(op: SymbolPolynomial, Z) -> complex:
    """Value at ``Z`` of the lower symbol ``<Psi_Z|op|Psi_Z>`` of a normal-ordered operator."""
    return op(Z)


def lower_symbol_polynomial(op: SymbolPolynomial) -> SymbolPolynomial:
    return op


def upper_symbol(op: SymbolPolynomial) -> SymbolPolynomial:
    """Upper symbol ``exp(-Laplacian)`` applied to the lower symbol."""
    if op.degree > op.degree_cap:
        raise ValueError("degree above cap")
    return op.heat(-1.0)


def heat_forward(symbol: SymbolPolynomial) -> SymbolPolynomial:
    return symbol.heat(1.0)


def symbol_difference(op: SymbolPolynomial) -> SymbolPolynomial:
    """Upper minus lower symbol, ``-Lap A + (1/2) Lap^2 A - ...`` (two terms up to degree 4)."""
    return upper_symbol(op) - op


def number_penalty(D: int, K: float, N: float) -> SymbolPolynomial:
    """``(K/N) (sum_j |z_j|^2 - N)^2``."""
    s = SymbolPolynomial(D, {}, 8)
    for j in range(D):
        e = tuple(int(i == j) for i in range(D))
        s = s + SymbolPolynomial(D, {(e, e): 1.0})
    s = s - SymbolPolynomial.constant(D, N)
    return (s * s).scale(K / N)


def wick_vs_antiwick(poly: SymbolPolynomial, cap: int):
    """Wick ``E(a+, a)`` and anti-Wick ``E(a, a+)`` matrices on the sectors ``0..cap``.

    Matrix elements between kept sectors are exact (intermediate states above
    the cap are followed through occupation arithmetic).
    """
    space = TruncatedFock(poly.dimension, cap)
    wick = 0
    anti = 0
    for anti_flag in (False, True):
        acc = None
        for word, c in poly.operator_words(anti=anti_flag):
            m = space.word_matrix(word) * c
            acc = m if acc is None else acc + m
        if acc is None:
            acc = space.word_matrix(()) * 0
        if anti_flag:
            anti = acc.tocsr()
        else:
            wick = acc.tocsr()
    return wick, anti, space


def antiwick_by_quadrature(poly: SymbolPolynomial, cap: int) -> np.ndarray:
    """``int E(z) |z><z| d^2z / pi`` for one mode, projected to ``n <= cap``.

    Angular averages select matching powers; the radial moments
    ``int_0^inf e^{-s} s^p ds = p!`` are exact.
    """
    if poly.dimension != 1:
        raise ValueError("quadrature oracle is one-mode only")
    out = np.zeros((cap + 1, cap + 1), dtype=complex)
    # |z><z| has <m|.|n> = e^{-|z|^2} z^m conj(z)^n / sqrt(m! n!)
    for ((al,), (be,)), c in poly.terms.items():
        # conj(z)^al z^be z^m conj(z)^n survives angular averaging iff be + m = al + n
        for m in range(cap + 1):
            n = be + m - al
            if 0 <= n <= cap:
                p = be + m       # power of |z|^2
                # int_0^inf e^{-s} s^p ds = p!
                val = math.factorial(p) / math.sqrt(math.factorial(m) * math.factorial(n))
                out[m, n] += c * val
    return out


__all__ = [
    "SphereSampler", "SymmetricState", "LowerSymbolMeasure", "ckmr_measure", "reconstruct_rdm",
    "exact_reconstruction", "definetti_error", "DeFinettiError", "schur_check",
    "sphere_quadrature", "coherent_vectors", "SymbolPolynomial", "lower_symbol", "upper_symbol",
    "heat_forward", "symbol_difference", "number_penalty", "wick_vs_antiwick",
    "antiwick_by_quadrature", "Reconstruction",
]
