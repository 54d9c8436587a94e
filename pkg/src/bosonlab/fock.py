"""Bosonic occupation-number bases and exact ladder-operator actions.

States of ``N`` bosons in ``D`` modes are stored as coefficient vectors over
the occupation vectors ``(n_1, ..., n_D)`` with ``sum(n) == N``.  The basis is
ordered lexicographically with the first mode largest first, so that
``(N, 0, ..., 0)`` has index 0 and ``(0, ..., 0, N)`` is last.  Lookups go
through a stars-and-bars rank instead of a dictionary.

Ladder words are sequences of ``(mode, dagger)`` pairs read left to right as
operator products; the rightmost operator acts first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln

Word = tuple[tuple[int, bool], ...]


def basis_dimension(n_particles: int, n_modes: int) -> int:
    """Number of occupation vectors, ``C(N + D - 1, D - 1)``."""
    if n_particles < 0:
        raise ValueError("particle number must be non-negative")
    if n_modes < 1:
        raise ValueError("need at least one mode")
    dim = math.comb(n_particles + n_modes - 1, n_modes - 1)
    if dim > np.iinfo(np.int64).max:
        raise OverflowError(f"basis of {n_particles} bosons in {n_modes} modes is too large")
    return dim


@dataclass(frozen=True)
class ModeSpace:
    dimension: int
    labels: tuple | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("mode space dimension must be >= 1")
        if self.labels is not None and len(self.labels) != self.dimension:
            raise ValueError("one label per mode")


@lru_cache(maxsize=None)
def _binomial_table(top: int, width: int) -> np.ndarray:
    table = np.zeros((top + 1, width + 1), dtype=np.int64)
    for a in range(top + 1):
        for b in range(min(a, width) + 1):
            table[a, b] = math.comb(a, b)
    return table


@lru_cache(maxsize=64)
def _enumerate_states(n_particles: int, n_modes: int) -> np.ndarray:
    if n_modes == 1:
        return np.array([[n_particles]], dtype=np.int64)
    blocks = []
    for first in range(n_particles, -1, -1):
        rest = _enumerate_states(n_particles - first, n_modes - 1)
        head = np.full((rest.shape[0], 1), first, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    out = np.vstack(blocks)
    out.setflags(write=False)
    return out


class OccupationBasis:
    """Occupation vectors of ``n_particles`` bosons over a :class:`ModeSpace`."""

    def __init__(self, n_particles: int, modes: ModeSpace | int):
        if isinstance(modes, int):
            modes = ModeSpace(modes)
        self.modes = modes
        self.n_particles = int(n_particles)
        self.dim = basis_dimension(self.n_particles, modes.dimension)
        self.states = _enumerate_states(self.n_particles, modes.dimension)
        self._binom = _binomial_table(self.n_particles + modes.dimension, modes.dimension)

    @property
    def n_modes(self) -> int:
        return self.modes.dimension

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        return f"OccupationBasis(N={self.n_particles}, D={self.n_modes}, dim={self.dim})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, OccupationBasis) and other.n_particles == self.n_particles
                and other.n_modes == self.n_modes)

    def __hash__(self) -> int:
        return hash((self.n_particles, self.n_modes))

    def ranks(self, occupations: np.ndarray) -> np.ndarray:
        """Vectorised stars-and-bars rank of occupation rows (no validity check)."""
        occ = np.atleast_2d(np.asarray(occupations, dtype=np.int64))
        D = self.n_modes
        remaining = np.full(occ.shape[0], self.n_particles, dtype=np.int64)
        rank = np.zeros(occ.shape[0], dtype=np.int64)
        for j in range(D - 1):
            m = D - j - 1
            nj = occ[:, j]
            below = nj < remaining
            top = np.where(below, remaining - nj - 1 + m, 0)
            rank += np.where(below, self._binom[top, m], 0)
            remaining = remaining - nj
        return rank

    def index_of(self, occupation: Sequence[int]) -> int:
        occ = np.asarray(occupation, dtype=np.int64)
        if occ.shape != (self.n_modes,) or occ.min() < 0 or occ.sum() != self.n_particles:
            raise KeyError(f"{tuple(occupation)} is not in {self!r}")
        return int(self.ranks(occ)[0])

    def basis_vector(self, occupation: Sequence[int]) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=complex)
        vec[self.index_of(occupation)] = 1.0
        return vec

    def product_state(self, u: np.ndarray) -> np.ndarray:
        """Coefficients of the condensate ``u^{(x)N}`` (normalised if ``u`` is)."""
        u = np.asarray(u, dtype=complex)
        if u.shape != (self.n_modes,):
            raise ValueError("one amplitude per mode")
        from scipy.special import gammaln
        occ = self.states
        log_mult = 0.5 * (gammaln(self.n_particles + 1) - gammaln(occ + 1).sum(axis=1))
        # u_j ** n_j with 0 ** 0 == 1
        powers = np.prod(np.where(occ > 0, u[None, :] ** occ, 1.0), axis=1)
        return np.exp(log_mult) * powers


class LadderAction(NamedTuple):
    vector: np.ndarray
    basis: OccupationBasis | None
    vanished: bool


@dataclass(frozen=True)
class LadderMonomial:
    """``a^+_{c1} ... a^+_{ck} a_{j1} ... a_{jl}`` (or the anti-normal order)."""

    creators: tuple[int, ...] = ()
    annihilators: tuple[int, ...] = ()
    normal_ordered: bool = True

    def word(self) -> Word:
        cre = tuple((m, True) for m in self.creators)
        ann = tuple((m, False) for m in self.annihilators)
        return cre + ann if self.normal_ordered else ann + cre

    @property
    def degree(self) -> int:
        return len(self.creators) + len(self.annihilators)

    @property
    def particle_change(self) -> int:
        return len(self.creators) - len(self.annihilators)


def as_word(op: LadderMonomial | Iterable[tuple[int, bool]]) -> Word:
    if isinstance(op, LadderMonomial):
        return op.word()
    return tuple((int(m), bool(d)) for m, d in op)


def apply_word_to_occupations(word: Word, occ: np.ndarray):
    """Act with a ladder word on occupation rows.

    Returns ``(new_occ, amplitude)``; rows annihilated somewhere along the way
    get amplitude 0 (their occupations are then meaningless).
    """
    occ = np.array(occ, dtype=np.int64, copy=True)
    # product of integer factors under one square root, so perfect squares are exact
    prod = np.ones(occ.shape[0])
    for mode, dagger in reversed(word):
        n = occ[:, mode]
        if dagger:
            prod *= n + 1.0
            occ[:, mode] = n + 1
        else:
            prod *= np.maximum(n, 0).astype(float)
            occ[:, mode] = np.maximum(n - 1, 0)
    return occ, np.sqrt(prod)


def word_matrix(word: Word, basis_in: OccupationBasis,
                basis_out: OccupationBasis | None = None) -> sp.csr_matrix:
    """Sparse matrix of a ladder word from ``basis_in`` to its target sector."""
    change = sum(1 if d else -1 for _, d in word)
    target = basis_in.n_particles + change
    if basis_out is None:
        if target < 0:
            raise ValueError("word empties the sector")
        basis_out = OccupationBasis(target, basis_in.modes)
    if any(m >= basis_in.n_modes or m < 0 for m, _ in word):
        raise IndexError("mode index out of range")
    if basis_out.n_particles != target or target < 0:
        return sp.csr_matrix((basis_out.dim if target >= 0 else 0, basis_in.dim))
    new_occ, amp = apply_word_to_occupations(word, basis_in.states)
    keep = amp != 0
    rows = basis_out.ranks(new_occ[keep])
    cols = np.nonzero(keep)[0]
    return sp.csr_matrix((amp[keep].astype(complex), (rows, cols)),
                         shape=(basis_out.dim, basis_in.dim))


def apply_ladder(monomial: LadderMonomial | Iterable[tuple[int, bool]],
                 state: np.ndarray, basis: OccupationBasis) -> LadderAction:
    """Exact action of a ladder monomial on a state vector over ``basis``."""
    word = as_word(monomial)
    for m, _ in word:
        if not 0 <= m < basis.n_modes:
            raise IndexError(f"mode {m} out of range for D={basis.n_modes}")
    target = basis.n_particles + sum(1 if d else -1 for _, d in word)
    if target < 0:
        return LadderAction(np.zeros(0, dtype=complex), None, True)
    out_basis = OccupationBasis(target, basis.modes)
    mat = word_matrix(word, basis, out_basis)
    return LadderAction(mat @ np.asarray(state, dtype=complex), out_basis, False)


def one_body_operator(h: np.ndarray, basis: OccupationBasis) -> sp.csr_matrix:
    """``sum_{jk} h_{jk} a^+_j a_k`` on one sector."""
    h = np.asarray(h, dtype=complex)
    D = basis.n_modes
    total = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for j in range(D):
        for k in range(D):
            if h[j, k] != 0:
                total = total + h[j, k] * word_matrix(((j, True), (k, False)), basis, basis)
    return total.tocsr()


def number_operator(basis: OccupationBasis) -> sp.csr_matrix:
    return sp.diags(basis.states.sum(axis=1).astype(complex)).tocsr()


# --------------------------------------------------------------------------
# Truncated Fock space (all sectors up to a particle-number cap)


class TruncatedFock:
    """Direct sum of the sectors ``0..cap`` over ``modes``.

    Word matrices are exact on the kept sectors: intermediate states above the
    cap are tracked through occupation arithmetic, never truncated.
    """

    def __init__(self, modes: ModeSpace | int, cap: int):
        if isinstance(modes, int):
            modes = ModeSpace(modes)
        self.modes = modes
        self.cap = int(cap)
        self.sectors = [OccupationBasis(n, modes) for n in range(self.cap + 1)]
        self.offsets = np.cumsum([0] + [s.dim for s in self.sectors])
        self.dim = int(self.offsets[-1])

    def sector_slice(self, n: int) -> slice:
        return slice(int(self.offsets[n]), int(self.offsets[n + 1]))

    def particle_numbers(self) -> np.ndarray:
        return np.concatenate([np.full(s.dim, s.n_particles) for s in self.sectors])

    def word_matrix(self, word: Word) -> sp.csr_matrix:
        change = sum(1 if d else -1 for _, d in word)
        blocks_r, blocks_c, blocks_v = [], [], []
        for n, sector in enumerate(self.sectors):
            target = n + change
            if target < 0 or target > self.cap:
                continue
            m = word_matrix(word, sector, self.sectors[target]).tocoo()
            blocks_r.append(m.row + self.offsets[target])
            blocks_c.append(m.col + self.offsets[n])
            blocks_v.append(m.data)
        if not blocks_r:
            return sp.csr_matrix((self.dim, self.dim), dtype=complex)
        return sp.csr_matrix((np.concatenate(blocks_v),
                              (np.concatenate(blocks_r), np.concatenate(blocks_c))),
                             shape=(self.dim, self.dim))

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def coherent_state(self, z) -> np.ndarray:
        """``e^{-|z|^2/2} sum_n prod_j z_j^{n_j} / sqrt(n_j!) |n>``, truncated at the cap.

        Not renormalised: the missing norm is the weight above the cap.
        """
        z = np.asarray(z, dtype=complex)
        parts = []
        for sector in self.sectors:
            occ = sector.states
            logfact = gammaln(occ + 1.0).sum(axis=1)
            amp = np.prod(z[None, :] ** occ, axis=1) * np.exp(-0.5 * logfact)
            parts.append(amp)
        return np.exp(-0.5 * np.vdot(z, z).real) * np.concatenate(parts)


# --------------------------------------------------------------------------
# Symbolic normal ordering via the CCR


def _canonical(word: Word) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """Return (creators, annihilators) if ``word`` is normal ordered."""
    seen_annihilator = False
    for _, dagger in word:
        if dagger and seen_annihilator:
            return None
        if not dagger:
            seen_annihilator = True
    cre = tuple(sorted(m for m, d in word if d))
    ann = tuple(sorted(m for m, d in word if not d))
    return cre, ann


@lru_cache(maxsize=4096)
def normal_order(word: Word) -> dict:
    """Expand a ladder word into normal-ordered monomials.

    Result maps ``(sorted creators, sorted annihilators)`` to integer
    coefficients; the CCR ``a_i a^+_j = a^+_j a_i + delta_ij`` is applied at
    the leftmost annihilator-creator inversion until none remain.
    """
    key = _canonical(word)
    if key is not None:
        return {key: 1}
    for pos in range(len(word) - 1):
        (mi, di), (mj, dj) = word[pos], word[pos + 1]
        if not di and dj:
            swapped = word[:pos] + ((mj, True), (mi, False)) + word[pos + 2:]
            out = dict(normal_order(swapped))
            if mi == mj:
                for k, v in normal_order(word[:pos] + word[pos + 2:]).items():
                    out[k] = out.get(k, 0) + v
            return {k: v for k, v in out.items() if v != 0}
    raise AssertionError("unreachable")
