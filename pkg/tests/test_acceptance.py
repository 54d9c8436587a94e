"""Desk-scale acceptance criteria; each test carries its criterion number."""
import math
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg as la

from bosonlab import bogoliubov as bg
from bosonlab import definetti as df
from bosonlab import harness as hs
from bosonlab import manybody as mb
from bosonlab import meanfield as mf
from bosonlab import scattering as sc
from bosonlab import trialstates as ts
from bosonlab.fock import TruncatedFock, basis_dimension

ROOT = Path(__file__).resolve().parents[1]
PER_PAIR = mb.ScalingSpec(0.0, "per-pair")
criterion = pytest.mark.criterion


def report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")


@pytest.fixture(scope="module")
def toy_sweep():
    h, W = mb.toy_model()
    exp = hs.ExperimentConfig("scaling_sweep", "toy", {"preset": "toy"},
                              {"N": [4, 8, 16, 24, 32, 48, 64]})
    start = time.perf_counter()
    table = hs.run_experiment(exp, seed=1)
    return table, time.perf_counter() - start


@criterion(1, "eigensolver oracle")
def test_eigensolver_oracle():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst, dims = 0.0, []
    while len(dims) < 50:
        D = int(rng.integers(2, 7))
        N = int(rng.integers(2, 40))
        dim = basis_dimension(N, D)
        if not 10 < dim <= 2000 or (dim > 1000 and sum(d > 1000 for d in dims) >= 5):
            continue
        h, W = mb.random_instance(rng, D, real=bool(rng.integers(0, 2)))
        H = mb.assemble_hamiltonian(h, W, N)
        E_it = mb.ground_state(H).energy
        E_dense = la.eigvalsh(H.dense(), subset_by_index=(0, 0))[0]
        worst = max(worst, abs(E_it - E_dense) / max(1.0, abs(E_dense)))
        dims.append(dim)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 60
    report(1, ok, f"max deviation {worst:.2e}, max dim {max(dims)}, {elapsed:.1f} s")
    assert worst <= 1e-10
    assert elapsed < 60


@criterion(2, "variational upper bound")
def test_variational_upper_bound():
    rng = np.random.default_rng(102)
    worst = -np.inf
    cases = [(D, N) for D in (2, 3, 4) for N in (2, 5, 10)] + [("toy", N) for N in (4, 16, 32)]
    for D, N in cases:
        h, W = mb.toy_model() if D == "toy" else mb.random_instance(rng, D)
        dim = h.entries.shape[0]
        E = mb.ground_state(mb.assemble_hamiltonian(h, W, N)).energy / N
        for _ in range(100):
            u = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            u /= np.linalg.norm(u)
            worst = max(worst, E - mb.hartree_upper_bound(h, W, N, PER_PAIR, u))
    report(2, worst <= 1e-9, f"max E/N - bound = {worst:.3e} over {100 * len(cases)} trials")
    assert worst <= 1e-9


@criterion(3, "mean-field energy convergence")
def test_energy_convergence(toy_sweep):
    table, elapsed = toy_sweep
    N = np.array(table.column("N"))
    e = np.array(table.column("E_per_N"))
    gap = 0.75 - e
    slope = np.polyfit(np.log(N), np.log(gap), 1)[0]
    ok = (np.all(np.diff(e) > 0) and e[-1] <= 0.75 and gap[-1] < 0.05
          and -1.3 <= slope <= -0.7 and elapsed < 300)
    report(3, ok, f"gap(64) = {gap[-1]:.4f}, slope {slope:.3f}, {elapsed:.1f} s")
    assert np.all(np.diff(e) > 0) and e[-1] <= 0.75
    assert math.isclose(table.rows[0]["E_MF"], 0.75, abs_tol=1e-9)
    assert gap[-1] < 0.05
    assert -1.3 <= slope <= -0.7
    assert elapsed < 300


@criterion(4, "condensation witness")
def test_condensation(toy_sweep):
    table, _ = toy_sweep
    d = np.array(table.column("trace_distance"))
    ok = bool(np.all(np.diff(d) < 0) and d[-1] < 0.1)
    report(4, ok, f"trace distances {np.round(d, 4).tolist()}")
    assert np.all(np.diff(d) < 0)
    assert d[-1] < 0.1


@criterion(5, "scattering exactness")
def test_scattering_exactness():
    start = time.perf_counter()
    w = sc.square_well(2.0, 1.0)
    sol = sc.solve_scattering(w, R_max=4.0)
    a_err = abs(sol.a - (1 - math.tanh(1.0)))
    g_err = abs(sol.g_integral - 8 * math.pi * sol.a)
    ball = max(abs(sc.scattering_energy_ball(sol, R)[3] - 4 * math.pi * sol.a / (1 - sol.a / R))
               for R in (1.5, 2.0, 4.0))
    strict = all(8 * math.pi * sc.solve_scattering(sc.preset(n)).a < sc.preset(n).integral()
                 for n in sc.PRESETS)
    elapsed = time.perf_counter() - start
    ok = a_err <= 1e-8 and g_err <= 1e-6 and ball <= 1e-6 and strict and elapsed < 5
    report(5, ok, f"|a - a*| {a_err:.1e}, g {g_err:.1e}, ball {ball:.1e}, {elapsed:.2f} s")
    assert a_err <= 1e-8 and g_err <= 1e-6 and ball <= 1e-6
    assert strict
    assert elapsed < 5


@criterion(6, "Born series decay")
def test_born_decay():
    w = sc.square_well(2.0, 1.0)
    Ns = np.array([1e2, 1e3, 1e4])
    errs = []
    for N in Ns:
        aN = sc.solve_scattering(sc.scale_potential(w, N, 0.5)).a
        errs.append(abs(sc.born_series(w, N, 0.5, 3).partial_sums[-1] / aN - 1))
    slope = np.polyfit(np.log(Ns), np.log(errs), 1)[0]
    ok = abs(slope + 0.5) <= 0.15
    report(6, ok, f"fitted exponent {slope:.3f}, errors {np.array(errs)}")
    assert abs(slope + 0.5) <= 0.15


@criterion(7, "de Finetti rate")
def test_definetti_rate():
    Ns = [10, 20, 50, 100, 200]
    u0 = np.array([1.0, 0.0])
    dist, sig = [], []
    for i, N in enumerate(Ns):
        e = df.definetti_error(df.SymmetricState.condensate(u0, N), 1,
                               df.SphereSampler(2, 700 + i, 100000))
        dist.append(e.distance)
        sig.append(e.stderr)
    ref = np.array([2 / (N + 2) for N in Ns])
    within = np.abs(np.array(dist) - ref) <= 3 * np.array(sig) + 1e-12
    slope = np.polyfit(np.log(Ns), np.log(dist), 1)[0]

    rng = np.random.default_rng(77)
    modes = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    probs = np.array([0.5, 0.3, 0.2])
    Cs, flagged = [], []
    for i, N in enumerate(Ns):
        state = df.SymmetricState.coherent_mixture(probs, modes, N)
        e = df.definetti_error(state, 1, df.SphereSampler(2, 800 + i, 100000))
        Cs.append(e.constant)
        flagged.append(e.flagged)
    C_fit = max(Cs)
    below = all(c <= C_fit for c in Cs)
    ratio = max(Cs) / min(Cs)
    ok = bool(within.all() and abs(slope + 1) <= 0.2 and below and ratio <= 2 and not any(flagged))
    report(7, ok, f"pure slope {slope:.3f}, mixed C {np.round(Cs, 3).tolist()}, ratio {ratio:.2f}")
    assert within.all()
    assert abs(slope + 1) <= 0.2
    assert ratio <= 2 and not any(flagged)


@criterion(8, "symbol calculus")
def test_symbol_calculus():
    rng = np.random.default_rng(108)
    worst = 0.0
    for _ in range(100):
        D = int(rng.integers(1, 4))
        op = df.SymbolPolynomial.random(rng, D, 4, 10)
        worst = max(worst, df.heat_forward(df.upper_symbol(op)).max_coefficient_difference(op))
    wick, anti, space = df.wick_vs_antiwick(df.SymbolPolynomial.monomial(1, [0], [0]), 30)
    exact = np.array_equal((anti - wick).toarray(), np.eye(space.dim))
    report(8, worst <= 1e-12 and exact, f"max coefficient defect {worst:.1e}, identity exact {exact}")
    assert worst <= 1e-12
    assert exact


@criterion(9, "Bogoliubov diagonalization")
def test_bogoliubov():
    qh = bg.QuadraticHamiltonian([[2.0]], [[1.0]])
    target = (math.sqrt(3) - 2) / 2
    closed = abs(bg.bogoliubov_ground_energy(qh)[0] - target)
    brute = abs(bg.bogoliubov_brute_force(qh, cap=40).energy - target)
    rng = np.random.default_rng(109)
    worst, bound_ok = 0.0, True
    for i in range(20):
        D = 1 + i % 3
        q = bg.random_quadratic(rng, D, pairing=0.6, real=bool(i % 2))
        E, _ = bg.bogoliubov_ground_energy(q)
        bf = bg.bogoliubov_brute_force(q, cap={1: 40, 2: 24, 3: 14}[D])
        worst = max(worst, abs(E - bf.energy) / (1 + abs(E)))
        bound_ok &= bg.bogoliubov_lower_bound(q) <= E + 1e-12
    ok = closed <= 1e-12 and brute <= 1e-5 and worst <= 1e-6 and bound_ok
    report(9, ok, f"closed {closed:.1e}, brute {brute:.1e}, random max {worst:.1e}")
    assert closed <= 1e-12 and brute <= 1e-5
    assert worst <= 1e-6
    assert bound_ok


@criterion(10, "quasi-free and Wick suite")
def test_wick_suite():
    rng = np.random.default_rng(110)
    odd_zero = True
    quartic_worst = 0.0
    space = TruncatedFock(2, 22)
    for _ in range(20):
        qh = bg.random_quadratic(rng, 2, pairing=0.5, real=bool(rng.integers(0, 2)))
        rho = bg.thermal_state_matrix(qh, 2.5, space)
        st_ = bg.state_from_density_matrix(rho, space)
        for _ in range(3):
            word = tuple((int(rng.integers(0, 2)), bool(rng.integers(0, 2))) for _ in range(4))
            quartic_worst = max(quartic_worst, abs(bg.wick_expectation(st_, word)
                                                   - bg.fock_expectation(rho, space, word)))
            odd = tuple((int(rng.integers(0, 2)), bool(rng.integers(0, 2))) for _ in range(3))
            odd_zero &= bg.wick_expectation(st_, odd) == 0
    pure = all(bg.quasifree_validate(bg.QuasiFreeState.squeezed(t)).status == "valid_pure"
               for t in np.linspace(0, 2, 21))
    ok = odd_zero and quartic_worst <= 1e-8 and pure
    report(10, ok, f"quartic max deviation {quartic_worst:.1e}, odd zero {odd_zero}, pure {pure}")
    assert odd_zero
    assert quartic_worst <= 1e-8
    assert pure


def trapped_product():
    L, n, N = 12.0, 481, 4
    grid = mf.Grid(1, L, n, "box")

    def w(r):
        return 0.5 * np.exp(-np.asarray(r) ** 2 / 0.5)

    fields = mf.ExternalFields(grid, mf.potential_preset(grid, "harmonic"), trapping=True)
    prob = mf.MeanFieldProblem("Hartree", fields,
                               lambda x: (N - 1) * w(np.sqrt(np.sum(x * x, axis=-1))))
    res = mf.minimize(prob, tol=1e-9)
    orb = ts.GridOrbital(grid, res.u)
    state = ts.CorrelatedTrialState("Product", N, orb, geometry=ts.OpenSpace(1))
    V = lambda X: np.sum(X * X, axis=-1)
    ham = ts.TrialHamiltonian(V=V, w=w)
    quad = ts.product_energy_quadrature(orb, V, w, N, -L / 2, L / 2, 4001)
    return state, ham, quad, res.energy


@criterion(11, "VMC suite")
def test_vmc_suite():
    start = time.perf_counter()
    state, ham, quad, hartree = trapped_product()
    prod = ts.vmc_energy(state, ham, ts.VmcConfig(walkers=16, steps=4000, burn_in=500, step_size=0.5, seed=11))
    ok_prod = abs(prod.energy - quad) <= 3 * prod.stderr

    well = sc.square_well(2.0, 1.0)
    sol = sc.solve_scattering(well)
    ham2 = ts.TrialHamiltonian.gp_scaled(well, 10)
    jas2 = ts.CorrelatedTrialState("Jastrow", 2, pair=ts.PairFactor(sol, 10, 0.3))
    exact2 = ts.exact_two_body_energy(jas2, ham2)
    est2 = ts.vmc_energy(jas2, ham2, ts.VmcConfig(walkers=32, steps=20000, burn_in=1000, seed=12))
    ok_two = abs(est2.energy - exact2) <= 3 * est2.stderr

    N = 8
    ham8 = ts.TrialHamiltonian.gp_scaled(well, N)
    cfg = ts.VmcConfig(walkers=16, steps=3000, burn_in=500, seed=13)
    jas = ts.vmc_energy(ts.CorrelatedTrialState("Jastrow", N, pair=ts.PairFactor(sol, N, 0.3)), ham8, cfg)
    pro = ts.vmc_energy(ts.CorrelatedTrialState("Product", N), ham8, cfg)
    margin = (pro.energy - jas.energy) / math.hypot(jas.stderr, pro.stderr)
    elapsed = time.perf_counter() - start
    ok = ok_prod and ok_two and margin >= 3 and elapsed < 600
    report(11, ok, f"product {prod.energy:.5f}+-{prod.stderr:.5f} vs {quad:.5f}; "
                   f"N=2 {est2.energy:.4f}+-{est2.stderr:.4f} vs {exact2:.4f}; "
                   f"N=8 Jastrow below Product by {margin:.1f} sigma; {elapsed:.0f} s")
    assert ok_prod and ok_two
    assert margin >= 3
    assert elapsed < 600


@criterion(12, "inequality sweeps")
def test_inequality_sweeps():
    exp = hs.ExperimentConfig("inequality_suite", "inequalities", {}, {})
    table = hs.run_experiment(exp, seed=2024, threads=4)
    counts = {f: sum(r.get("family") == f for r in table.rows)
              for f in ("onsager", "hoffmann_ostenhof", "dyson")}
    low = min(r["gap"] for r in table.rows if r["status"] == "ok")
    ok = hs.table_passes(table) and counts == {"onsager": 1000, "hoffmann_ostenhof": 1000, "dyson": 100}
    report(12, ok, f"{counts}, smallest gap {low:.2e}")
    assert counts == {"onsager": 1000, "hoffmann_ostenhof": 1000, "dyson": 100}
    assert hs.table_passes(table), table.summary.get("failures")


@criterion(13, "GP torus and diamagnetic witness")
def test_gp_torus():
    a = 0.1
    g = mf.Grid(3, 1.0, 8, "periodic")
    prob = mf.MeanFieldProblem("GP", mf.ExternalFields(g, np.zeros(g.shape)), a)
    rng = np.random.default_rng(113)
    res = mf.minimize(prob, init=1 + 0.2 * rng.standard_normal(g.shape), tol=1e-10)
    e_err = abs(res.energy - 4 * math.pi * a)

    gt = mf.Grid(2, 8.0, 48, "box")
    trapped = mf.MeanFieldProblem("GP", mf.ExternalFields(gt, mf.potential_preset(gt, "harmonic"),
                                                          trapping=True), 0.05)
    tr = mf.minimize(trapped, tol=1e-8)
    residual = mf.gp_equation_residual(trapped, tr.u)[0]

    gd = mf.Grid(2, 3.0, 16, "box")
    worst = np.inf
    for _ in range(50):
        A = mf.rotation_field(gd, rng.uniform(0.1, 10)) + rng.normal(0, 2, gd.shape + (2,))
        fields = mf.ExternalFields(gd, mf.potential_preset(gd, "harmonic"), A, trapping=True)
        p = mf.MeanFieldProblem("NLS", fields, float(rng.uniform(0, 5)))
        u = rng.standard_normal(gd.shape) + 1j * rng.standard_normal(gd.shape)
        worst = min(worst, mf.diamagnetic_gap(p, u))
    ok = e_err <= 1e-8 and residual < 1e-6 and worst >= -1e-10
    report(13, ok, f"|E - 4 pi a| {e_err:.1e}, trapped residual {residual:.1e}, "
                   f"smallest diamagnetic gap {worst:.2e}")
    assert e_err <= 1e-8
    assert residual < 1e-6
    assert worst >= -1e-10


@criterion(14, "determinism")
def test_determinism(tmp_path):
    cfg = hs.load_config(ROOT / "configs" / "acceptance.toml")
    hs.run_config(cfg, tmp_path / "first", "csv", threads=4)
    hs.run_config(cfg, tmp_path / "second", "csv", threads=2)
    hs.run_config(cfg, tmp_path / "first_json", "json", threads=4)
    hs.run_config(cfg, tmp_path / "second_json", "json", threads=1)
    same = True
    for a, b in (("first", "second"), ("first_json", "second_json")):
        names = sorted(p.name for p in (tmp_path / a).iterdir())
        same &= bool(names) and names == sorted(p.name for p in (tmp_path / b).iterdir())
        same &= all((tmp_path / a / n).read_bytes() == (tmp_path / b / n).read_bytes() for n in names)
    report(14, same, "byte comparison of CSV and JSON exports")
    assert same
