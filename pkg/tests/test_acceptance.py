"""Acceptance criteria, one test each; a summary line per criterion is printed at the end."""

import itertools
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsliced.cli import main
from gsliced.divergences import DivergenceSpec, wasserstein_1d, wasserstein_1d_bruteforce
from gsliced.estimator import (
    SmoothedSliceConfig,
    analytic_gsswd_gaussian,
    estimate_gssd,
    two_level_constant,
)
from gsliced.experiments import (
    SLOPE_BAND,
    Axis,
    GaussianScenario,
    SweepPlan,
    run_dimension_sweep,
    run_displacement,
    run_noise_sweep,
    run_projection_complexity,
    run_sample_complexity,
)
from gsliced.sampling import RngStream, SampleSet

SAMPLE_GRID = (64, 128, 256, 512, 1024, 2048, 4096)
RATE = -0.5
WASS = DivergenceSpec()
MMD = DivergenceSpec(kind="mmd")
SINK = DivergenceSpec(kind="sinkhorn")


def in_band(slope):
    return RATE - SLOPE_BAND <= slope <= RATE + SLOPE_BAND


@pytest.mark.criterion(1, "metric axioms on 100 random triples")
def test_metric_axioms():
    start = time.perf_counter()
    gen = np.random.default_rng(1)
    for t in range(100):
        n = int(gen.integers(2, 51))
        d = int(gen.integers(1, 11))
        sets = [SampleSet(gen.normal(gen.normal(), gen.uniform(0.5, 2), size=(int(gen.integers(2, 51)), d)),
                          noise_key=3 * t + k) for k in range(3)]
        sets[0] = SampleSet(sets[0].points[:n], sets[0].noise_key)
        for p, sigma in itertools.product((1.0, 2.0), (0.0, 1.0, 3.0)):
            cfg = SmoothedSliceConfig(sigma=sigma, L=10, seed=t, spec=DivergenceSpec(p=p))
            G = {(a, b): estimate_gssd(sets[a], sets[b], cfg).value for a in range(3) for b in range(3)}
            for a, b in itertools.permutations(range(3), 2):
                assert G[a, b] >= 0
                assert G[a, b] == G[b, a]
            for a in range(3):
                assert G[a, a] == 0.0
                twin = SampleSet(sets[a].points.copy(), sets[a].noise_key)
                assert estimate_gssd(sets[a], twin, cfg).value == 0.0
            root = {k: v ** (1 / p) for k, v in G.items()}
            for a, b, c in itertools.permutations(range(3)):
                assert root[a, c] <= root[a, b] + root[b, c] + 1e-9
    assert time.perf_counter() - start < 60


@pytest.mark.criterion(2, "1D Wasserstein closed form equals permutation brute force")
def test_wasserstein_oracle():
    start = time.perf_counter()
    gen = np.random.default_rng(2)
    for _ in range(200):
        n = int(gen.integers(1, 7))
        p = float(gen.choice([1, 2, 3]))
        x, y = gen.normal(size=n) * gen.uniform(0.1, 5), gen.normal(size=n) + gen.normal()
        fast, brute = wasserstein_1d(x, y, p), wasserstein_1d_bruteforce(x, y, p)
        assert abs(fast - brute) <= 1e-10 * max(abs(brute), 1e-300)
    assert time.perf_counter() - start < 10


def sample_plan(d, specs):
    return SweepPlan(axis=Axis.SAMPLE_SIZE, grid=SAMPLE_GRID, replicates=20, specs=specs,
                     cfg=SmoothedSliceConfig(sigma=3.0, L=50, seed=3), scenario=GaussianScenario(d=d))


@pytest.mark.criterion(3, "sample-complexity slope for GS-SWD and GS-MMD")
def test_sample_complexity():
    start = time.perf_counter()
    res = run_sample_complexity(sample_plan(10, (WASS, MMD)))
    elapsed = time.perf_counter() - start
    print("slopes", res.slope, "r2", res.slope_r2, f"{elapsed:.1f}s")
    for label in ("wasserstein", "mmd"):
        assert in_band(res.slope[label]), (label, res.slope[label])
        assert res.slope_r2[label] >= 0.9
    assert elapsed < 300


@pytest.mark.criterion(4, "sample-complexity slopes independent of dimension")
def test_dimension_independence():
    plan = SweepPlan(axis=Axis.DIMENSION, grid=(5, 20, 50), inner_grid=SAMPLE_GRID, replicates=20,
                     specs=(WASS, MMD), cfg=SmoothedSliceConfig(sigma=3.0, L=50, seed=4))
    res = run_dimension_sweep(plan)
    print("slopes by dimension", res.extras["slopes_by_dimension"])
    for label in ("wasserstein", "mmd"):
        assert res.extras["max_slope_gap"][label] < SLOPE_BAND


@pytest.mark.criterion(5, "projection-complexity slope")
def test_projection_complexity():
    start = time.perf_counter()
    plan = SweepPlan(axis=Axis.PROJECTIONS, grid=(10, 50, 250, 1250), replicates=20, L_ref=10_000,
                     cfg=SmoothedSliceConfig(sigma=3.0, seed=5), scenario=GaussianScenario(d=50, n=500))
    res = run_projection_complexity(plan)
    elapsed = time.perf_counter() - start
    print("slope", res.slope, f"{elapsed:.1f}s")
    assert in_band(res.slope["wasserstein"])
    assert elapsed < 300


@settings(max_examples=300, deadline=None)
@given(st.floats(-5, 5), st.floats(0.05, 5), st.floats(-5, 5), st.floats(0.05, 5),
       st.lists(st.floats(0, 20), min_size=2, max_size=8), st.integers(1, 100))
def _analytic_monotone(m1, s1, m2, s2, sigmas, d):
    values = [analytic_gsswd_gaussian(m1, s1, m2, s2, s, d) for s in sorted(sigmas)]
    assert all(b <= a for a, b in zip(values, values[1:]))


@pytest.mark.criterion(6, "noise monotonicity and small-noise limit")
def test_noise_monotonicity():
    _analytic_monotone()
    sigmas = (0.0, 0.001, 0.5, 1.0, 2.0, 4.0)
    plan = SweepPlan(axis=Axis.NOISE_LEVEL, grid=sigmas, inner_grid=(2000,), replicates=1,
                     cfg=SmoothedSliceConfig(L=100, seed=6),
                     scenario=GaussianScenario(d=10, n=2000, nu_mean=0.5, nu_scale=2.0))
    res = run_noise_sweep(plan)
    rows = {r.sigma: r for r in res.rows}
    assert all(not r.error for r in rows.values())
    ordered = [rows[s] for s in (0.0, 0.5, 1.0, 2.0, 4.0)]
    for a, b in zip(ordered, ordered[1:]):
        assert b.estimate <= a.estimate + 2 * (a.stderr + b.stderr), (a.sigma, b.sigma)
    base = rows[0.0].estimate
    assert base > 0
    assert abs(rows[0.001].estimate - base) < 0.01 * base


@pytest.mark.criterion(7, "displacement minimum at s = 2 and analytic match")
def test_displacement():
    grid = tuple(0.5 * k for k in range(9))
    scen = GaussianScenario(d=50, n=2000, mu_mean=2.0)

    def run(spec, L):
        plan = SweepPlan(axis=Axis.DISPLACEMENT, grid=grid, replicates=1, specs=(spec,),
                         cfg=SmoothedSliceConfig(sigma=3.0, L=L, seed=7), scenario=scen)
        return run_displacement(plan)

    wass = run(WASS, 2000)
    means = wass.extras["mean_estimate"]["wasserstein"]
    assert wass.extras["argmin"]["wasserstein"] == 2.0
    for s in grid:
        if abs(s - 2) >= 1:
            truth = (s - 2) ** 2
            assert wass.extras["analytic_sw2"][s] == pytest.approx(truth)
            assert abs(means[s] - truth) <= 0.1 * truth, (s, means[s])
    assert run(MMD, 50).extras["argmin"]["mmd"] == 2.0
    assert run(SINK, 5).extras["argmin"]["sinkhorn"] == 2.0


@pytest.mark.criterion(8, "two-level noise inequality on the analytic family")
def test_two_level_inequality():
    levels = (0.0, 0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0)
    params = [(0.0, 1.0, 0.0, 1.0), (0.0, 1.0, 3.0, 1.0), (0.0, 0.2, 0.0, 5.0), (-2.0, 3.0, 4.0, 0.5)]
    checked = 0
    for d in (2, 10):
        for m1, s1, m2, s2 in params:
            for sig1, sig2 in itertools.combinations(levels, 2):
                g1 = analytic_gsswd_gaussian(m1, s1, m2, s2, sig1, d)
                g2 = analytic_gsswd_gaussian(m1, s1, m2, s2, sig2, d)
                assert g1 <= 2 * g2 + two_level_constant(sig1, sig2, 2, d)
                checked += 1
    assert checked == 2 * len(params) * 28


@pytest.mark.criterion(9, "Monte-Carlo estimate agrees with the analytic value")
def test_estimator_cross_validation():
    start = time.perf_counter()
    d, n = 10, 20_000
    g = RngStream(9, (1,)).generator()
    mu = SampleSet(g.standard_normal((n, d)), noise_key=1)
    nu = SampleSet(0.3 + 3.0 * g.standard_normal((n, d)), noise_key=2)
    rep = estimate_gssd(mu, nu, SmoothedSliceConfig(sigma=2.0, L=500, seed=9))
    truth = analytic_gsswd_gaussian(0.0, 1.0, 0.3, 3.0, 2.0, d)
    print("estimate", rep.value, "analytic", truth)
    assert abs(rep.value - truth) <= 0.05 * truth
    assert time.perf_counter() - start < 120


CLI_RUNS = [
    ["estimate", "--n", "200", "--d", "4"],
    ["metric-check", "-L", "10"],
    ["sweep-samples", "--grid", "32,64,128", "--kind", "wasserstein,mmd"],
    ["sweep-dim", "--grid", "2,5", "--inner-grid", "32,64,128"],
    ["sweep-displacement", "--grid", "1,2,3", "--n", "200", "--d", "5"],
    ["sweep-projections", "--grid", "5,10,20", "--L-ref", "200", "--n", "100", "--d", "5"],
    ["sweep-noise", "--grid", "0,1,3", "--inner-grid", "32,64,128"],
]


@pytest.mark.criterion(10, "CLI output byte-identical across runs and --jobs")
def test_cli_determinism(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)

    def run(args, jobs):
        extra = []
        if args[0].startswith("sweep"):
            extra = ["--replicates", "3", "-L", "8", "-o", "out.csv", "--jobs", str(jobs)]
        code = main(args + ["--seed", "42"] + extra)
        out = capsys.readouterr().out
        files = {p.name: p.read_bytes() for p in sorted(tmp_path.iterdir())}
        for p in tmp_path.iterdir():
            p.unlink()
        return code, out, files

    for args in CLI_RUNS:
        first = run(args, 1)
        assert first[0] == 0, args
        assert run(args, 1) == first, args
        if args[0].startswith("sweep"):
            assert first[2], args
            assert run(args, 2) == first, args
