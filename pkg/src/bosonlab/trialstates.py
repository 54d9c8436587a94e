"""Correlated trial wavefunctions and their variational Monte Carlo energies.

Units: ``H = sum_j (-Lap_j + V(x_j)) + sum_{i<j} w(|x_i - x_j|)``.  Energies are
reported per particle.  All wavefunction arithmetic stays in the log domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy import integrate, stats
from scipy.interpolate import CubicHermiteSpline, CubicSpline, RectBivariateSpline

from .meanfield import Grid
from .scattering import RadialPotential, ScatteringSolution, scale_potential


# --------------------------------------------------------------------------
# Geometry


@dataclass(frozen=True)
class Torus:
    length: float = 1.0
    dim: int = 3

    def wrap(self, x: np.ndarray) -> np.ndarray:
        return np.mod(x, self.length)

    def displacement(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        d = x - y
        return d - self.length * np.round(d / self.length)

    @property
    def volume(self) -> float:
        return self.length ** self.dim


@dataclass(frozen=True)
class OpenSpace:
    """Whole space; confinement comes from the one-body factor."""
    dim: int = 1

    def wrap(self, x):
        return x

    def displacement(self, x, y):
        return x - y


# --------------------------------------------------------------------------
# One-body factors: log u, grad log u, Laplacian of log u


class ConstantOrbital:
    def log(self, x):
        return np.zeros(x.shape[:-1])

    def grad_log(self, x):
        return np.zeros_like(x)

    def lap_log(self, x):
        return np.zeros(x.shape[:-1])


@dataclass(frozen=True)
class GaussianOrbital:
    """``exp(-omega |x|^2 / 2)``: ground state of ``-Lap + omega^2 |x|^2``."""
    omega: float = 1.0

    def log(self, x):
        return -0.5 * self.omega * np.sum(x * x, axis=-1)

    def grad_log(self, x):
        return -self.omega * x

    def lap_log(self, x):
        return np.full(x.shape[:-1], -self.omega * x.shape[-1])


class GridOrbital:
    """Spline of a real grid field (1D or 2D); zero outside the grid."""

    def __init__(self, grid: Grid, u: np.ndarray):
        u = np.asarray(u)
        if np.iscomplexobj(u):
            if np.abs(u.imag).max() > 1e-10 * np.abs(u).max():
                raise ValueError("correlated trial states need a real one-body factor")
            u = u.real
        if u.mean() < 0:
            u = -u
        self.grid = grid
        axes = grid.axes()
        self.lo = np.array([ax[0] for ax in axes])
        self.hi = np.array([ax[-1] for ax in axes])
        if grid.dim == 1:
            self._s = CubicSpline(axes[0], u.reshape(-1))
        elif grid.dim == 2:
            self._s = RectBivariateSpline(axes[0], axes[1], u.reshape(grid.shape), kx=3, ky=3)
        else:
            raise ValueError("grid orbitals support dimensions 1 and 2")

    def _derivs(self, x):
        x = np.asarray(x, float)
        flat = x.reshape(-1, x.shape[-1])
        if self.grid.dim == 1:
            t = flat[:, 0]
            v, g, l = self._s(t), self._s(t, 1)[:, None], self._s(t, 2)
        else:
            a, b = flat[:, 0], flat[:, 1]
            v = self._s.ev(a, b)
            g = np.stack([self._s.ev(a, b, dx=1), self._s.ev(a, b, dy=1)], axis=-1)
            l = self._s.ev(a, b, dx=2) + self._s.ev(a, b, dy=2)
        inside = np.all((flat >= self.lo) & (flat <= self.hi), axis=-1)
        v = np.where(inside, v, 0.0)
        shape = x.shape[:-1]
        return v.reshape(shape), g.reshape(x.shape), l.reshape(shape)

    def log(self, x):
        v, _, _ = self._derivs(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, np.log(np.where(v > 0, v, 1.0)), -np.inf)

    def grad_log(self, x):
        v, g, _ = self._derivs(x)
        safe = np.where(v > 0, v, 1.0)
        return np.where((v > 0)[..., None], g / safe[..., None], 0.0)

    def lap_log(self, x):
        v, g, l = self._derivs(x)
        safe = np.where(v > 0, v, 1.0)
        return np.where(v > 0, l / safe - np.sum((g / safe[..., None]) ** 2, axis=-1), 0.0)


# --------------------------------------------------------------------------
# Pair factor f_{R,N}


@dataclass
class PairFactor:
    """``f_N(r)/f_N(R)`` for ``r < R`` and 1 beyond, with ``f_N(r) = f(N r)``.

    ``f`` is the scattering solution of the unscaled potential, so ``f_N``
    solves the problem of ``N^2 w(N x)``.
    """

    solution: ScatteringSolution
    N: float
    R: float
    nodes: int = 4000
    _spline: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self):
        s = self.solution.potential.support / self.N
        if not self.R > s:
            raise ValueError(f"cutoff R={self.R} must exceed the scaled range {s:.3g}")
        fR = self.solution.f(self.N * self.R)
        if fR <= 0:
            raise ValueError("scattering solution not positive at R")
        r = np.unique(np.r_[np.linspace(0, s, self.nodes // 2), np.linspace(s, self.R, self.nodes // 2)])
        f = np.asarray(self.solution.f(self.N * r)) / fR
        df = self.N * np.asarray(self.solution.df(self.N * r)) / fR
        if np.any(f <= 0) or np.any(f > 1 + 1e-12):
            raise ValueError("pair factor must satisfy 0 < f <= 1")
        self._spline = CubicHermiteSpline(r, f, df)
        self._dspline = self._spline.derivative()

    def value(self, r):
        r = np.asarray(r, float)
        return np.where(r < self.R, self._spline(np.minimum(r, self.R)), 1.0)

    def derivative(self, r):
        r = np.asarray(r, float)
        return np.where(r < self.R, self._dspline(np.minimum(r, self.R)), 0.0)

    def log(self, r):
        return np.log(self.value(r))

    def dlog(self, r):
        return self.derivative(r) / self.value(r)

    @classmethod
    def from_potential(cls, w: RadialPotential, N: float, R: float, **kw) -> "PairFactor":
        from .scattering import solve_scattering
        return cls(solve_scattering(w), N, R, **kw)


# --------------------------------------------------------------------------
# Trial states and Hamiltonian data


@dataclass
class CorrelatedTrialState:
    kind: Literal["Product", "Jastrow", "Dyson"]
    n_particles: int
    orbital: object = field(default_factory=ConstantOrbital)
    pair: PairFactor | None = None
    geometry: Torus | OpenSpace = field(default_factory=Torus)

    def __post_init__(self):
        if self.kind not in ("Product", "Jastrow", "Dyson"):
            raise ValueError(f"unknown trial state kind {self.kind!r}")
        if self.kind == "Product":
            self.pair = None
        elif self.pair is None:
            raise ValueError(f"{self.kind} state needs a pair factor")
        else:
            if not isinstance(self.geometry, Torus):
                raise ValueError("correlated states live on the torus")
            if self.geometry.dim != 3:
                raise ValueError("pair factors come from the 3D scattering problem")
            if self.pair.R >= self.geometry.length / 2:
                raise ValueError("cutoff R must be below half the torus length")
        if self.n_particles < 1:
            raise ValueError("need at least one particle")

    @property
    def dim(self) -> int:
        return self.geometry.dim

    # pair geometry: displacement vectors and distances, shape (..., N, N, d)
    def _pairs(self, X):
        disp = self.geometry.displacement(X[..., :, None, :], X[..., None, :, :])
        r = np.sqrt(np.sum(disp * disp, axis=-1))
        return disp, r

    def log_psi(self, X: np.ndarray) -> np.ndarray:
        """``log |Psi|`` for configurations of shape ``(..., N, d)``."""
        out = np.sum(self.orbital.log(X), axis=-1)
        if self.kind == "Product":
            return out
        _, r = self._pairs(X)
        N = self.n_particles
        if self.kind == "Jastrow":
            iu = np.triu_indices(N, 1)
            return out + np.sum(self.pair.log(r[..., iu[0], iu[1]]), axis=-1)
        nearest = _dyson_nearest(r)
        return out + np.sum(self.pair.log(nearest[0]), axis=-1)

    def grad_log_psi(self, X: np.ndarray) -> np.ndarray:
        g = self.orbital.grad_log(X)
        if self.kind == "Product":
            return g
        disp, r = self._pairs(X)
        N = self.n_particles
        safe = np.where(r > 0, r, 1.0)
        if self.kind == "Jastrow":
            coef = self.pair.dlog(r) / safe
            coef[..., np.arange(N), np.arange(N)] = 0.0
            return g + np.sum(coef[..., None] * disp, axis=-2)
        dist, idx = _dyson_nearest(r)
        # term j depends on x_j and on its nearest earlier particle idx[j]
        unit = np.take_along_axis(disp, idx[..., None, None].repeat(self.dim, -1), axis=-2)[..., 0, :]
        unit = unit / np.where(dist > 0, dist, 1.0)[..., None]
        c = self.pair.dlog(dist)[..., None] * unit
        c[..., 0, :] = 0.0
        # d/dx_j acts with +c_j; d/dx_{idx[j]} acts with -c_j
        flat_c = c.reshape(-1, N, self.dim)
        flat_i = idx.reshape(-1, N)
        src = np.zeros_like(flat_c)
        rows = np.arange(flat_c.shape[0])
        for j in range(1, N):
            np.add.at(src, (rows, flat_i[:, j]), -flat_c[:, j])
        return g + c + src.reshape(c.shape)

    def lap_log_psi_product(self, X: np.ndarray) -> np.ndarray:
        if self.kind != "Product":
            raise ValueError("Laplacian form is only smooth for product states")
        return self.orbital.lap_log(X)


def _dyson_nearest(r: np.ndarray):
    """Distance to, and index of, the nearest earlier particle (entry 0 unused)."""
    N = r.shape[-1]
    mask = np.tril(np.ones((N, N), bool), -1)
    big = np.where(mask, r, np.inf)
    idx = np.argmin(big, axis=-1)
    dist = np.take_along_axis(big, idx[..., None], axis=-1)[..., 0]
    dist = np.where(np.isfinite(dist), dist, np.inf)
    idx[..., 0] = 0
    return dist, idx


@dataclass
class TrialHamiltonian:
    """External potential ``V(x)`` on positions and radial pair potential ``w(r)``."""
    V: Callable | None = None
    w: Callable | None = None

    @classmethod
    def gp_scaled(cls, w: RadialPotential, N: float, V: Callable | None = None) -> "TrialHamiltonian":
        return cls(V, scale_potential(w, N, 1.0, d=3, convention="gp"))


def local_energy(state: CorrelatedTrialState, X: np.ndarray, ham: TrialHamiltonian,
                 estimator: Literal["auto", "laplacian", "gradient"] = "auto") -> np.ndarray:
    """Total local energy for configurations ``(..., N, d)``.

    ``laplacian`` gives ``-Lap Psi / Psi`` (exact zero variance for
    eigenstates); ``gradient`` gives ``|grad log Psi|^2``, whose mean is the
    same kinetic energy and which stays valid across the kink of ``f_R`` at R.
    """
    X = np.asarray(X, float)
    if estimator == "auto":
        estimator = "laplacian" if state.kind == "Product" else "gradient"
    g = state.grad_log_psi(X)
    g2 = np.sum(g * g, axis=(-1, -2))
    if estimator == "laplacian":
        kin = -np.sum(state.lap_log_psi_product(X), axis=-1) - g2
    else:
        kin = g2
    pot = np.zeros(X.shape[:-2])
    if ham.V is not None:
        pot = pot + np.sum(ham.V(X), axis=-1)
    if ham.w is not None and state.n_particles > 1:
        _, r = state._pairs(X)
        iu = np.triu_indices(state.n_particles, 1)
        pot = pot + np.sum(ham.w(r[..., iu[0], iu[1]]), axis=-1)
    return kin + pot


# --------------------------------------------------------------------------
# Metropolis sampling


@dataclass(frozen=True)
class VmcConfig:
    walkers: int = 16
    steps: int = 4000          # sweeps after burn-in
    burn_in: int = 500
    step_size: float = 0.1
    seed: int = 0
    log_proposals: int = 20000  # proposals recorded for the detailed-balance test


@dataclass
class VmcEstimate:
    energy: float              # per particle
    stderr: float
    acceptance: float
    autocorrelation: float
    rhat: float
    equilibrated: bool
    detailed_balance_p: float
    step_size: float
    block_energies: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("energy", "stderr", "acceptance", "autocorrelation",
                                               "rhat", "equilibrated", "detailed_balance_p",
                                               "step_size")}


def blocking_error(series: np.ndarray, min_blocks: int = 16) -> tuple[float, float]:
    """Standard error by repeated pairwise blocking; returns ``(stderr, tau)``.

    The largest estimate over levels keeping at least ``min_blocks`` blocks
    is reported, which is conservative for a plateau that has been reached.
    """
    x = np.asarray(series, float)
    n0 = len(x)
    naive = x.std(ddof=1) / math.sqrt(n0) if n0 > 1 else float("nan")
    best = naive
    while len(x) >= 2 * min_blocks:
        m = len(x) // 2
        x = 0.5 * (x[: 2 * m: 2] + x[1: 2 * m: 2])
        best = max(best, x.std(ddof=1) / math.sqrt(len(x)))
    tau = (best / naive) ** 2 if naive > 0 else 1.0
    return float(best), float(tau)


def split_rhat(chains: np.ndarray) -> float:
    """Split-chain potential scale reduction over ``(walkers, steps)``."""
    n = chains.shape[1] // 2
    if n < 2:
        return float("nan")
    halves = np.concatenate([chains[:, :n], chains[:, n: 2 * n]], axis=0)
    means = halves.mean(axis=1)
    W = halves.var(axis=1, ddof=1).mean()
    B = n * means.var(ddof=1)
    if W <= 0:
        return 1.0
    return float(math.sqrt(((n - 1) / n * W + B / n) / W))


def detailed_balance_test(log_ratio: np.ndarray, accepted: np.ndarray, bins: int = 10) -> float:
    """Chi-square p-value of observed acceptances against ``min(1, ratio)``."""
    p = np.minimum(1.0, np.exp(np.minimum(log_ratio, 0.0)))
    if len(p) == 0:
        return float("nan")
    edges = np.quantile(p, np.linspace(0, 1, bins + 1))
    which = np.clip(np.searchsorted(edges, p, side="right") - 1, 0, bins - 1)
    chi = 0.0
    dof = 0
    for b in range(bins):
        m = which == b
        exp_acc = p[m].sum()
        n = m.sum()
        var = np.sum(p[m] * (1 - p[m]))
        if n == 0 or var < 1e-9:
            continue
        chi += (accepted[m].sum() - exp_acc) ** 2 / var
        dof += 1
    if dof == 0:
        return 1.0
    return float(stats.chi2.sf(chi, dof))


def _initial(state: CorrelatedTrialState, rng: np.random.Generator) -> np.ndarray:
    N, d = state.n_particles, state.dim
    if isinstance(state.geometry, Torus):
        return rng.random((N, d)) * state.geometry.length
    return rng.normal(0.0, 0.5, (N, d))


def vmc_energy(state: CorrelatedTrialState, ham: TrialHamiltonian, config: VmcConfig = VmcConfig(),
               estimator: Literal["auto", "laplacian", "gradient"] = "auto") -> VmcEstimate:
    """Metropolis estimate of ``<Psi|H|Psi>/<Psi|Psi>`` per particle.

    Single-particle moves; each walker has its own RNG stream and its own
    step size, tuned toward 30-60% acceptance during burn-in only.
    """
    if state.n_particles < 2 and state.kind != "Product":
        raise ValueError("correlated states need N >= 2")
    W, N, d = config.walkers, state.n_particles, state.dim
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(W)]
    X = np.stack([_initial(state, g) for g in streams])
    logp = state.log_psi(X)
    for w in range(W):  # start away from nodes
        tries = 0
        while not np.isfinite(logp[w]):
            X[w] = _initial(state, streams[w])
            logp[w] = state.log_psi(X[w])
            tries += 1
            if tries > 1000:
                raise RuntimeError("could not find a configuration with Psi != 0")
    step = np.full(W, float(config.step_size))

    def draw(n_sweeps):
        # per-walker streams, stacked: displacements (W, S, N, d) and uniforms (W, S, N)
        disp = np.stack([g.normal(0.0, 1.0, (n_sweeps, N, d)) for g in streams])
        u = np.stack([g.random((n_sweeps, N)) for g in streams])
        return disp, u

    chunk = 100
    energies = np.empty((W, config.steps))
    accepted_total = 0
    proposals_total = 0
    log_r: list[np.ndarray] = []
    log_a: list[np.ndarray] = []
    logged = 0
    done_burn = 0
    done = 0
    total = config.burn_in + config.steps
    wi = np.arange(W)
    while done_burn + done < total:
        n_sweeps = min(chunk, total - done_burn - done)
        disp, unif = draw(n_sweeps)
        for s in range(n_sweeps):
            burning = done_burn < config.burn_in
            acc_sweep = np.zeros(W)
            for j in range(N):
                trial = X.copy()
                trial[wi, j] = state.geometry.wrap(X[wi, j] + step[:, None] * disp[:, s, j])
                lp = state.log_psi(trial)
                ratio = 2.0 * (lp - logp)
                with np.errstate(invalid="ignore"):
                    acc = np.log(unif[:, s, j]) < ratio
                acc &= np.isfinite(lp)
                X[acc] = trial[acc]
                logp[acc] = lp[acc]
                acc_sweep += acc
                if not burning:
                    accepted_total += acc.sum()
                    proposals_total += W
                    if logged < config.log_proposals:
                        log_r.append(np.where(np.isfinite(lp), ratio, -np.inf))
                        log_a.append(acc.copy())
                        logged += W
            if burning:
                rate = acc_sweep / N
                step = np.where(rate > 0.6, step * 1.1, np.where(rate < 0.3, step * 0.9, step))
                if isinstance(state.geometry, Torus):
                    step = np.minimum(step, state.geometry.length / 2)
                done_burn += 1
            else:
                energies[:, done] = local_energy(state, X, ham, estimator)
                done += 1
    per_particle = energies / N
    series = per_particle.mean(axis=0)
    stderr, tau = blocking_error(series)
    rhat = split_rhat(per_particle)
    p_db = detailed_balance_test(np.concatenate(log_r), np.concatenate(log_a)) if log_r else float("nan")
    n_blocks = 50
    blocks = series[: len(series) // n_blocks * n_blocks].reshape(n_blocks, -1).mean(axis=1) \
        if len(series) >= n_blocks else series
    return VmcEstimate(energy=float(series.mean()), stderr=stderr,
                       acceptance=accepted_total / max(proposals_total, 1), autocorrelation=tau,
                       rhat=rhat, equilibrated=bool(rhat < 1.05), detailed_balance_p=p_db,
                       step_size=float(step.mean()), block_energies=blocks)


# --------------------------------------------------------------------------
# Deterministic oracles


def exact_two_body_energy(state: CorrelatedTrialState, ham: TrialHamiltonian,
                          tol: float = 1e-10) -> float:
    """Energy per particle of a two-particle state with constant ``u`` on the 3D torus.

    The centre of mass separates and only the relative coordinate remains:
    ``E = [int 2|f'|^2 + w f^2] / (2 int f^2)`` over the torus cell, with
    ``f`` spherically symmetric inside a ball that fits in the cell.
    """
    if state.n_particles != 2:
        raise ValueError("two-particle oracle")
    if not isinstance(state.orbital, ConstantOrbital):
        raise ValueError("oracle requires a constant one-body factor")
    if not isinstance(state.geometry, Torus) or state.geometry.dim != 3:
        raise ValueError("oracle works on the 3D torus")
    if ham.V is not None:
        raise ValueError("oracle has no external potential")
    L = state.geometry.length
    R = state.pair.R if state.pair is not None else 0.0
    w = ham.w
    supp = getattr(w, "support", 0.0) if w is not None else 0.0
    r_max = max(R, supp)
    if r_max >= L / 2:
        raise ValueError("ball of radius max(R, range of w) must fit in the cell")
    f = state.pair.value if state.pair is not None else (lambda r: np.ones_like(np.asarray(r, float)))
    df = state.pair.derivative if state.pair is not None else (lambda r: np.zeros_like(np.asarray(r, float)))
    points = sorted({p for p in ([supp] + list(getattr(w, "breakpoints", ()))) if 0 < p < r_max})

    # Gauss-Legendre on every spline interval inside R: the integrand is
    # smooth there, while adaptive quadrature trips over the many knots
    knots = state.pair._spline.x if state.pair is not None else np.array([0.0])
    edges = np.unique(np.r_[knots, [p for p in points if p < R]])
    gx, gw = np.polynomial.legendre.leggauss(8)
    num_int = top = 0.0
    if len(edges) > 1:
        lo, hi = edges[:-1, None], edges[1:, None]
        r = 0.5 * (hi - lo) * gx[None, :] + 0.5 * (hi + lo)
        wts = 0.5 * (hi - lo) * gw[None, :]
        fr = f(r)
        dens = 2 * df(r) ** 2 + (w(r) * fr ** 2 if w is not None else 0.0)
        num_int = float(np.sum(wts * dens * r * r))
        top = float(np.sum(wts * (fr ** 2 - 1.0) * r * r))
    if r_max > R and w is not None:
        outer = [p for p in points if p > R]
        num_int += integrate.quad(lambda r: float(w(r)) * r * r, R, r_max, points=outer or None,
                                  epsabs=0, epsrel=tol, limit=400)[0]
    norm = L ** 3 + 4 * math.pi * top
    return 4 * math.pi * num_int / norm / 2


def product_energy_quadrature(orbital, V: Callable, w: Callable, N: int, lo: float, hi: float,
                              points: int = 4001) -> float:
    """Hartree energy per particle of ``u^{(x) N}`` in one dimension.

    ``int |u'|^2 + V u^2 + (N-1)/2 iint w(x-y) u(x)^2 u(y)^2``, ``u``
    normalised, evaluated on a uniform grid with Simpson weights.
    """
    x = np.linspace(lo, hi, points)
    X = x[:, None]
    logu = orbital.log(X)
    u = np.exp(logu - np.max(logu[np.isfinite(logu)]))
    u = np.where(np.isfinite(logu), u, 0.0)
    du = np.where(u > 0, orbital.grad_log(X)[:, 0] * u, 0.0)
    norm = integrate.simpson(u * u, x=x)
    Vx = np.asarray(V(X)).reshape(-1) if V is not None else 0.0
    one = integrate.simpson(du * du + Vx * u * u, x=x) / norm
    rho = u * u / norm
    if w is None or N < 2:
        return float(one)
    K = w(np.abs(x[:, None] - x[None, :]))
    inner = integrate.simpson(K * rho[None, :], x=x, axis=1)
    two = integrate.simpson(inner * rho, x=x)
    return float(one + 0.5 * (N - 1) * two)


__all__ = [
    "Torus", "OpenSpace", "ConstantOrbital", "GaussianOrbital", "GridOrbital", "PairFactor",
    "CorrelatedTrialState", "TrialHamiltonian", "local_energy", "VmcConfig", "VmcEstimate",
    "vmc_energy", "blocking_error", "split_rhat", "detailed_balance_test",
    "exact_two_body_energy", "product_energy_quadrature",
]
