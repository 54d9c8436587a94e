"""Zero-energy two-body scattering for compactly supported radial potentials in 3D.

Conventions: the scattering equation is ``-Laplace f + (1/2) w f = 0`` with
``f -> 1`` at infinity, so ``f = 1 - a/r`` outside the support and the
scattering energy ``int |grad f|^2 + (1/2) w f^2`` equals ``4 pi a``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import PchipInterpolator


@dataclass(frozen=True)
class RadialPotential:
    """Non-negative radial profile ``w(r)`` vanishing for ``r > support``.

    ``breakpoints`` lists radii where ``w`` or its derivatives jump; the ODE
    integrator restarts there.
    """

    profile: Callable[[np.ndarray], np.ndarray]
    support: float
    preset: str = "custom"
    params: tuple = ()
    breakpoints: tuple[float, ...] = ()

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.support, self.profile(np.minimum(r, self.support)), 0.0)
        return out if out.ndim else float(out)

    def integral(self) -> float:
        """``int w d^3x``."""
        pts = sorted({0.0, *self.breakpoints, self.support})
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            total += quad(lambda r: self(r) * r * r, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0]
        return 4 * math.pi * total

    @property
    def is_zero(self) -> bool:
        r = np.linspace(0, self.support, 257)
        return not np.any(self(r) != 0)


def square_well(height: float = 2.0, radius: float = 1.0) -> RadialPotential:
    if height < 0 or radius <= 0:
        raise ValueError("square well needs height >= 0, radius > 0")
    return RadialPotential(lambda r: np.full_like(np.asarray(r, float), height), radius,
                           "square_well", (height, radius))


def smooth_bump(height: float = 1.0, radius: float = 1.0) -> RadialPotential:
    """``height * exp(1 - 1/(1 - (r/R)^2))``: infinitely smooth, compact support."""
    def prof(r):
        x = np.clip(np.asarray(r, float) / radius, 0, 1)
        with np.errstate(divide="ignore", over="ignore"):
            val = height * np.exp(1.0 - 1.0 / (1.0 - x * x))
        return np.where(x < 1, val, 0.0)
    return RadialPotential(prof, radius, "smooth_bump", (height, radius))


def polynomial_bump(height: float = 1.0, radius: float = 1.0) -> RadialPotential:
    """``height * (1 - (r/R)^2)^2`` on ``r < R``."""
    def prof(r):
        x = np.clip(np.asarray(r, float) / radius, 0, 1)
        return height * (1 - x * x) ** 2
    return RadialPotential(prof, radius, "polynomial_bump", (height, radius))


def tabulated(r: Sequence[float], w: Sequence[float], name: str = "tabulated") -> RadialPotential:
    """Monotone cubic interpolation of samples; the last radius is the support."""
    r = np.asarray(r, float)
    w = np.asarray(w, float)
    if r.ndim != 1 or r.shape != w.shape or len(r) < 2:
        raise ValueError("table needs matching 1-D columns with at least two rows")
    if np.any(np.diff(r) <= 0) or r[0] < 0:
        raise ValueError("radii must be increasing and non-negative")
    if np.any(w < 0):
        raise ValueError("tabulated potential must be non-negative")
    if r[0] > 0:
        r, w = np.concatenate([[0.0], r]), np.concatenate([[w[0]], w])
    interp = PchipInterpolator(r, w, extrapolate=False)
    return RadialPotential(lambda x: np.nan_to_num(interp(x)), float(r[-1]), name)


def read_potential_csv(path) -> RadialPotential:
    """Two-column ``r, w(r)`` file; a non-numeric first row is taken as a header."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if rows:
                    raise
    arr = np.array(rows)
    return tabulated(arr[:, 0], arr[:, 1], name=Path(path).stem)


PRESETS: dict[str, Callable[..., RadialPotential]] = {
    "square_well": square_well,
    "smooth_bump": smooth_bump,
    "polynomial_bump": polynomial_bump,
}


def preset(name: str, **params) -> RadialPotential:
    try:
        return PRESETS[name](**params)
    except KeyError:
        raise KeyError(f"unknown potential preset {name!r}; known: {sorted(PRESETS)}") from None


def scale_potential(w: RadialPotential, N: float, beta: float, d: int = 3,
                    convention: str = "gp") -> RadialPotential:
    """``w_N(x) = N^(d beta - 1) w(N^beta x)`` (``"gp"``) or ``N^(d beta) w(N^beta x)`` (``"bare"``)."""
    if N < 2:
        raise ValueError("scale parameter N must be at least 2")
    if convention == "gp":
        amp = N ** (d * beta - 1)
    elif convention == "bare":
        amp = N ** (d * beta)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    s = N ** beta
    prof = w.profile
    return RadialPotential(lambda r: amp * prof(np.asarray(r) * s), w.support / s,
                           f"{w.preset}@N={N:g},beta={beta:g}", w.params,
                           tuple(b / s for b in w.breakpoints))


# --------------------------------------------------------------------------


@dataclass
class ScatteringSolution:
    """Radial scattering solution with exterior form ``1 - a/r``."""

    potential: RadialPotential
    a: float
    energy: float          # int_R3 |grad f|^2 + (1/2) w f^2
    g_integral: float      # int w f
    r: np.ndarray
    f_samples: np.ndarray
    _segments: list = field(repr=False, default_factory=list)
    _scale: float = 1.0

    @property
    def variational_energy(self) -> float:
        return 4 * math.pi * self.a

    def _u(self, r: np.ndarray):
        """``(u, u')`` with ``u = r f``, evaluated from the dense ODE output."""
        r = np.atleast_1d(np.asarray(r, float))
        if self.a == 0.0:
            return r.copy(), np.ones_like(r)
        u = np.empty_like(r)
        du = np.empty_like(r)
        R = self.potential.support
        out = r > R
        u[out] = r[out] - self.a
        du[out] = 1.0
        inside = ~out
        for lo, hi, sol in self._segments:
            m = inside & (r >= lo) & (r <= hi)
            if np.any(m):
                y = sol(r[m])
                u[m] = y[0] / self._scale
                du[m] = y[1] / self._scale
                inside &= ~m
        return u, du

    def f(self, r):
        r = np.asarray(r, float)
        u, du = self._u(r)
        rr = np.atleast_1d(r)
        val = np.where(rr > 0, u / np.where(rr > 0, rr, 1), du)
        return val.reshape(r.shape) if r.ndim else float(val[0])

    def df(self, r):
        r = np.asarray(r, float)
        u, du = self._u(r)
        rr = np.atleast_1d(r)
        safe = np.where(rr > 0, rr, 1)
        val = np.where(rr > 0, (du * safe - u) / safe ** 2, 0.0)
        return val.reshape(r.shape) if r.ndim else float(val[0])

    def to_json(self) -> dict:
        return {"a": self.a, "E_variational": self.variational_energy,
                "energy_quadrature": self.energy, "g_integral": self.g_integral}


def _rhs(w: RadialPotential):
    def rhs(r, y):
        u, du = y[0], y[1]
        wr = w(r)
        kin = du - (u / r if r > 0 else du)
        return [du, 0.5 * wr * u, wr * u * r, kin * kin + 0.5 * wr * u * u]
    return rhs


def solve_scattering(w: RadialPotential, R_max: float | None = None, tol: float = 1e-13,
                     n_samples: int = 401) -> ScatteringSolution:
    """Integrate ``u'' = (1/2) w u`` for ``u = r f`` from ``u(0) = 0, u'(0) = 1``.

    The scattering length comes from a least-squares fit of ``u = c (r - a)``
    on exterior samples.  Breakpoints of ``w`` restart the integrator.
    """
    R = w.support
    R_max = 2 * R if R_max is None else R_max
    if R_max <= R:
        raise ValueError("R_max must exceed the support radius")
    pts = sorted({0.0, *[b for b in w.breakpoints if 0 < b < R], R})
    y = np.array([0.0, 1.0, 0.0, 0.0])
    segments = []
    rhs = _rhs(w)
    for lo, hi in zip(pts[:-1], pts[1:]):
        sol = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=tol, atol=tol * 1e-3,
                        dense_output=True)
        if not sol.success:
            raise RuntimeError(f"scattering ODE failed on [{lo}, {hi}]: {sol.message}; "
                               "increase resolution or soften the profile")
        segments.append((lo, hi, sol.sol))
        y = sol.y[:, -1]
    u_R, du_R, I_g, I_E = y
    if w.is_zero:
        u_R, du_R, I_g, I_E = R, 1.0, 0.0, 0.0
    # exterior: w = 0 so u is affine; sample it and fit u = c (r - a)
    r_ext = np.linspace(R, R_max, 64)
    u_ext = u_R + du_R * (r_ext - R)
    A = np.vstack([r_ext, np.ones_like(r_ext)]).T
    (c, b), *_ = np.linalg.lstsq(A, u_ext, rcond=None)
    a = 0.0 if w.is_zero else -b / c
    g_integral = 4 * math.pi * I_g / c
    energy = 4 * math.pi * (I_E / c ** 2 + a * a / R)
    sol = ScatteringSolution(w, float(a), float(energy), float(g_integral),
                             np.empty(0), np.empty(0), segments, float(c))
    sol.r = np.linspace(0, R_max, n_samples)
    sol.f_samples = sol.f(sol.r)
    return sol


def scattering_energy_ball(w: RadialPotential | ScatteringSolution, R: float,
                           n_samples: int = 401):
    """Dirichlet minimiser ``f_R = f/f(R)`` on the ball of radius ``R`` and its energy.

    Returns ``(E_R, r, f_R, E_quadrature)`` where ``E_R`` is the closed form
    ``4 pi a / (1 - a/R)`` and ``E_quadrature`` integrates ``f_R`` directly.
    """
    sol = w if isinstance(w, ScatteringSolution) else solve_scattering(w)
    Rw = sol.potential.support
    if R <= Rw:
        raise ValueError("ball radius must exceed the support radius")
    a = sol.a
    fR = sol.f(R)
    closed = 4 * math.pi * a / (1 - a / R)

    def integrand(r):
        return (sol.df(r) ** 2 + 0.5 * sol.potential(r) * sol.f(r) ** 2) * r * r

    pts = sorted({0.0, *sol.potential.breakpoints, Rw, R})
    total = sum(quad(integrand, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0]
                for lo, hi in zip(pts[:-1], pts[1:]) if hi <= R)
    r = np.linspace(0, R, n_samples)
    return closed, r, sol.f(r) / fR, 4 * math.pi * total / fR ** 2


# --------------------------------------------------------------------------
# Born series


@dataclass
class BornSeries:
    terms: list[float]          # (-1)^k (8 pi)^-1 int L^k(w), k = 0..K-1
    partial_sums: list[float]
    beta: float
    N: float

    @property
    def first_term(self) -> float:
        return self.terms[0]


def _born_operator(w: RadialPotential, g: Chebyshev, degree: int) -> Chebyshev:
    """``L(g)(r) = (1/2) w(r) [ (1/r) int_0^r g s^2 ds + int_r^R g s ds ]``."""
    R = w.support
    s = Chebyshev.identity(domain=[0, R])
    inner = (g * s * s).integ(lbnd=0)
    outer_full = (g * s).integ(lbnd=0)
    total = outer_full(R)

    def h(r):
        return 0.5 * w(r) * (inner(r) / r + total - outer_full(r))

    return Chebyshev.interpolate(h, degree, domain=[0, R])


def born_series(w: RadialPotential, N: float = 1.0, beta: float = 0.0, orders: int = 3,
                degree: int = 96, convention: str = "gp") -> BornSeries:
    """Partial sums of the alternating Born expansion of the scattering length.

    ``8 pi a = sum_{k>=0} (-1)^k int L^k(w_N)``; the ``K``-th partial sum keeps
    ``k < K``.  ``N = 1`` uses ``w`` unscaled.
    """
    if orders < 1:
        raise ValueError("need at least one Born term")
    if N != 1 and beta >= 1:
        raise ValueError("Born expansion requires beta < 1")
    wN = w if N == 1 else scale_potential(w, N, beta, convention=convention)
    R = wN.support
    g = Chebyshev.interpolate(lambda r: wN(r), degree, domain=[0, R])
    s = Chebyshev.identity(domain=[0, R])
    terms = []
    for k in range(orders):
        if k:
            g = _born_operator(wN, g, degree)
        integral = 4 * math.pi * (g * s * s).integ(lbnd=0)(R)
        if not np.isfinite(integral):
            raise FloatingPointError(f"Born quadrature failed at order {k}")
        terms.append(float((-1) ** k * integral / (8 * math.pi)))
    return BornSeries(terms, list(np.cumsum(terms)), beta, N)


# --------------------------------------------------------------------------
# Dyson's lemma and Onsager's inequality


@dataclass(frozen=True)
class AnnularPotential:
    """Constant on ``inner <= r <= outer``, normalised so that ``int U r^2 dr = a``."""

    inner: float
    outer: float
    a: float

    @property
    def height(self) -> float:
        return 3 * self.a / (self.outer ** 3 - self.inner ** 3)

    def __call__(self, r):
        r = np.asarray(r, float)
        return np.where((r >= self.inner) & (r <= self.outer), self.height, 0.0)


def dyson_transform(w: RadialPotential, inner: float, outer: float,
                    f_test: Callable, domain_radius: float,
                    df_test: Callable | None = None,
                    scattering: ScatteringSolution | None = None):
    """Both sides of ``int_B (|grad f|^2 + w|f|^2/2) >= int_B U |f|^2`` for radial ``f``.

    ``U`` is the annular constant potential carrying the scattering length of
    ``w``.  Returns ``(lhs, rhs)``.
    """
    if inner < w.support:
        raise ValueError("support of U overlaps the support of w")
    if outer <= inner:
        raise ValueError("annulus needs outer > inner")
    sol = scattering or solve_scattering(w)
    U = AnnularPotential(inner, outer, sol.a)
    if df_test is None:
        step = 1e-6 * max(domain_radius, 1.0)

        def df_test(r):
            lo = max(r - step, 0.0)
            return (f_test(r + step) - f_test(lo)) / (r + step - lo)

    def lhs_integrand(r):
        return (abs(df_test(r)) ** 2 + 0.5 * w(r) * abs(f_test(r)) ** 2) * r * r

    def rhs_integrand(r):
        return U(r) * abs(f_test(r)) ** 2 * r * r

    D = domain_radius
    cuts = sorted({0.0, *[b for b in (*w.breakpoints, w.support, inner, outer) if b < D], D})
    lhs = sum(quad(lhs_integrand, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
              for lo, hi in zip(cuts[:-1], cuts[1:]))
    rhs = sum(quad(rhs_integrand, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
              for lo, hi in zip(cuts[:-1], cuts[1:]))
    return 4 * math.pi * lhs, 4 * math.pi * rhs


@dataclass(frozen=True)
class GaussianPotential:
    """``w(x) = amplitude * exp(-|x|^2 / (2 width^2))``; its Fourier transform is positive."""

    amplitude: float = 1.0
    width: float = 1.0

    def __post_init__(self):
        if self.amplitude < 0 or self.width <= 0:
            raise ValueError("Gaussian potential needs amplitude >= 0 and width > 0")

    def __call__(self, x):
        x = np.asarray(x, float)
        return self.amplitude * np.exp(-np.sum(x * x, axis=-1) / (2 * self.width ** 2))


@dataclass(frozen=True)
class GaussianMixtureDensity:
    """``rho(x) = sum_a mass_a * normal(x; center_a, sigma_a^2 I)``."""

    centers: np.ndarray
    sigmas: np.ndarray
    masses: np.ndarray

    @classmethod
    def smoothed_empirical(cls, positions: np.ndarray, sigma: float) -> "GaussianMixtureDensity":
        positions = np.asarray(positions, float)
        n = len(positions)
        return cls(positions, np.full(n, sigma), np.ones(n))

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        d = self.centers.shape[1]
        diff = x[:, None, :] - self.centers[None]
        s2 = self.sigmas ** 2
        val = self.masses / (2 * math.pi * s2) ** (d / 2) * np.exp(-np.sum(diff ** 2, -1) / (2 * s2))
        return val.sum(axis=1)


def _gauss_conv(w: GaussianPotential, d: int, var: np.ndarray, diff2: np.ndarray) -> np.ndarray:
    """``(w * normal(0, var))`` evaluated at squared distances ``diff2``."""
    s2 = w.width ** 2
    return w.amplitude * (s2 / (s2 + var)) ** (d / 2) * np.exp(-diff2 / (2 * (s2 + var)))


def onsager_gap(positions: np.ndarray, w, rho: GaussianMixtureDensity) -> float:
    """``sum_{i<j} w(x_i - x_j) - [sum_j (w*rho)(x_j) - (1/2) rho.w.rho - (N/2) w(0)]``."""
    if not isinstance(w, GaussianPotential):
        raise TypeError("Onsager check needs a potential with certified non-negative "
                        "Fourier transform (GaussianPotential)")
    x = np.atleast_2d(np.asarray(positions, float))
    N, d = x.shape
    if rho.centers.shape[1] != d:
        raise ValueError("density and positions live in different dimensions")
    diff = x[:, None, :] - x[None, :, :]
    pair = w(diff)
    lhs = 0.5 * (pair.sum() - np.trace(pair))
    d2 = np.sum((x[:, None, :] - rho.centers[None]) ** 2, -1)
    w_rho = (_gauss_conv(w, d, rho.sigmas[None] ** 2, d2) * rho.masses[None]).sum()
    c2 = np.sum((rho.centers[:, None] - rho.centers[None]) ** 2, -1)
    var = rho.sigmas[:, None] ** 2 + rho.sigmas[None] ** 2
    rwr = (rho.masses[:, None] * rho.masses[None] * _gauss_conv(w, d, var, c2)).sum()
    rhs = w_rho - 0.5 * rwr - 0.5 * N * w.amplitude
    return float(lhs - rhs)


__all__ = [
    "RadialPotential", "square_well", "smooth_bump", "polynomial_bump", "tabulated",
    "read_potential_csv", "preset", "PRESETS", "scale_potential", "ScatteringSolution",
    "solve_scattering", "scattering_energy_ball", "BornSeries", "born_series",
    "AnnularPotential", "dyson_transform", "GaussianPotential", "GaussianMixtureDensity",
    "onsager_gap",
]
