import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosonlab import scattering as sc

A_WELL = 1 - math.tanh(1.0)
PRESETS = ["square_well", "smooth_bump", "polynomial_bump"]


@pytest.fixture(scope="module")
def well():
    return sc.solve_scattering(sc.square_well(2.0, 1.0), R_max=4.0)


def analytic_well_length(V0, R):
    k = math.sqrt(V0 / 2)
    return R * (1 - math.tanh(k * R) / (k * R))


def test_zero_potential():
    sol = sc.solve_scattering(sc.square_well(0.0, 1.0))
    assert sol.a == 0 and np.allclose(sol.f_samples, 1.0)


def test_square_well_length(well):
    assert abs(well.a - A_WELL) < 1e-10
    assert math.isclose(well.a, 0.2384058, abs_tol=1e-7)


@settings(max_examples=20, deadline=None)
@given(V0=st.floats(0.01, 50.0), R=st.floats(0.1, 3.0))
def test_square_well_analytic_oracle(V0, R):
    assert math.isclose(sc.solve_scattering(sc.square_well(V0, R)).a,
                        analytic_well_length(V0, R), rel_tol=1e-8, abs_tol=1e-12)


@pytest.mark.parametrize("name", PRESETS)
def test_identities(name):
    sol = sc.solve_scattering(sc.preset(name), R_max=3.0)
    assert abs(sol.g_integral - 8 * math.pi * sol.a) < 1e-6
    assert abs(sol.energy - 4 * math.pi * sol.a) < 1e-6
    assert np.all(sol.f_samples >= 0) and np.all(sol.f_samples <= 1 + 1e-12)
    r = np.linspace(1.0001, 3.0, 50)
    assert np.max(np.abs(sol.f(r) - (1 - sol.a / r))) <= 1e-8


@pytest.mark.parametrize("pair", [("square_well", "smooth_bump"), ("polynomial_bump", "square_well"),
                                  ("smooth_bump", "polynomial_bump")])
def test_monotone_in_potential(pair):
    w1, w2 = (sc.preset(n) for n in pair)
    both = sc.RadialPotential(lambda r: w1.profile(r) + w2.profile(r), 1.0)
    assert sc.solve_scattering(both).a >= sc.solve_scattering(w1).a - 1e-12
    assert sc.solve_scattering(both).a >= sc.solve_scattering(w2).a - 1e-12


def test_ball_energy(well):
    E, r, fR, Eq = sc.scattering_energy_ball(well, 2.0)
    assert math.isclose(E, 4 * math.pi * A_WELL / (1 - A_WELL / 2), rel_tol=1e-9)
    # 4 pi a / (1 - a/2) with a = 0.2384058
    assert math.isclose(E, 3.40135, abs_tol=1e-5)
    assert abs(Eq - E) < 1e-6
    assert fR[-1] == pytest.approx(1.0, abs=1e-15)
    big = sc.scattering_energy_ball(well, 1e6)[0]
    assert abs(big - 4 * math.pi * A_WELL) < 1e-5
    with pytest.raises(ValueError):
        sc.scattering_energy_ball(well, 0.5)


def test_scaled_length_and_support():
    w = sc.smooth_bump()
    a = sc.solve_scattering(w).a
    for N in (2, 10, 100):
        wN = sc.scale_potential(w, N, 1.0)
        assert math.isclose(wN.support, 1.0 / N)
        assert math.isclose(sc.solve_scattering(wN).a, a / N, rel_tol=1e-6)
    same = sc.scale_potential(w, 10, 0.0, convention="bare")
    assert np.allclose(same(np.linspace(0, 1, 11)), w(np.linspace(0, 1, 11)))
    with pytest.raises(ValueError):
        sc.scale_potential(w, 1, 1.0)


def test_born_first_term():
    b = sc.born_series(sc.square_well(2.0, 1.0), orders=1)
    assert math.isclose(b.first_term, 1 / 3, rel_tol=1e-12)
    for name in PRESETS:
        w = sc.preset(name)
        b = sc.born_series(w, orders=1)
        assert math.isclose(b.first_term, w.integral() / (8 * math.pi), rel_tol=1e-9)
        assert sc.solve_scattering(w).a < b.first_term


def test_born_series_converges_for_weak_potential():
    w = sc.smooth_bump(0.5)
    a = sc.solve_scattering(w).a
    errs = [abs(s - a) for s in sc.born_series(w, orders=5).partial_sums]
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
    assert errs[-1] / a < 1e-4


def test_born_error_shrinks_with_N():
    w = sc.square_well(2.0, 1.0)
    errs = []
    for N in (1e2, 1e3, 1e4):
        aN = sc.solve_scattering(sc.scale_potential(w, N, 0.5)).a
        errs.append(abs(sc.born_series(w, N, 0.5, 3).partial_sums[-1] / aN - 1))
    assert errs[0] > errs[1] > errs[2]


def test_born_rejects_beta_one():
    with pytest.raises(ValueError):
        sc.born_series(sc.square_well(), 10, 1.0)


def test_dyson_constant_test_function(well):
    w = well.potential
    lhs, rhs = sc.dyson_transform(w, 1.0, 2.0, lambda r: 1.0, 2.0, lambda r: 0.0, well)
    assert math.isclose(lhs, 0.5 * w.integral(), rel_tol=1e-10)
    assert math.isclose(rhs, 4 * math.pi * well.a, rel_tol=1e-10)
    assert lhs > rhs


def test_dyson_margin_with_scattering_solution(well):
    margins = []
    for R in (2.0, 4.0, 8.0, 16.0):
        lhs, rhs = sc.dyson_transform(well.potential, 0.9 * R, R, well.f, R, well.df, well)
        assert lhs >= rhs - 1e-8
        margins.append((lhs - rhs) / lhs)
    assert all(m2 < m1 for m1, m2 in zip(margins, margins[1:]))


def test_dyson_node_inside_support(well):
    f = lambda r: math.cos(3 * r)
    df = lambda r: -3 * math.sin(3 * r)
    lhs, rhs = sc.dyson_transform(well.potential, 1.0, 1.5, f, 1.5, df, well)
    assert lhs >= rhs - 1e-8


def test_dyson_rejects_overlap(well):
    with pytest.raises(ValueError):
        sc.dyson_transform(well.potential, 0.5, 2.0, lambda r: 1.0, 2.0)


def test_onsager_single_particle(rng):
    w = sc.GaussianPotential(1.3, 0.7)
    rho = sc.GaussianMixtureDensity(np.zeros((1, 3)), np.array([0.5]), np.array([1.0]))
    x = rng.standard_normal((1, 3))
    s2, v = 0.49, 0.25
    wr = 1.3 * (s2 / (s2 + v)) ** 1.5 * math.exp(-np.sum(x * x) / (2 * (s2 + v)))
    rwr = 1.3 * (s2 / (s2 + 2 * v)) ** 1.5
    assert math.isclose(sc.onsager_gap(x, w, rho), 0.5 * rwr + 0.65 - wr, rel_tol=1e-12)
    assert sc.onsager_gap(x, w, rho) >= 0


def test_onsager_smoothed_empirical(rng):
    x = rng.standard_normal((20, 2))
    gap = sc.onsager_gap(x, sc.GaussianPotential(1.0, 0.5), sc.GaussianMixtureDensity.smoothed_empirical(x, 0.05))
    assert 0 <= gap < 0.5


def test_onsager_sweep(rng):
    w = sc.GaussianPotential(1.0, 0.8)
    for _ in range(1000):
        d = int(rng.integers(1, 4))
        x = rng.standard_normal((int(rng.integers(1, 12)), d))
        rho = sc.GaussianMixtureDensity(rng.standard_normal((3, d)), rng.uniform(0.1, 2, 3),
                                        rng.uniform(0, 4, 3))
        assert sc.onsager_gap(x, w, rho) >= -1e-9


def test_onsager_rejects_uncertified():
    rho = sc.GaussianMixtureDensity(np.zeros((1, 1)), np.ones(1), np.ones(1))
    with pytest.raises(TypeError):
        sc.onsager_gap(np.zeros((2, 1)), lambda x: 1.0, rho)


def test_tabulated_csv(tmp_path, well):
    r = np.linspace(0, 1, 201)
    path = tmp_path / "well.csv"
    path.write_text("r,w\n" + "\n".join(f"{a},{2.0}" for a in r))
    w = sc.read_potential_csv(path)
    assert math.isclose(sc.solve_scattering(w).a, well.a, rel_tol=1e-8)
    with pytest.raises(ValueError):
        sc.tabulated([0, 1], [1, -1])


def test_report_json(well):
    import json
    rep = json.loads(json.dumps(well.to_json()))
    assert set(rep) >= {"a", "E_variational", "g_integral"}
