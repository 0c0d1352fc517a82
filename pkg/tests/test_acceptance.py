"""Acceptance checks, one test (or group) per numbered criterion.

Run alone with ``pytest tests/test_acceptance.py``; the terminal summary
prints one pass/fail line per criterion.
"""

import math
import time

import numpy as np
import pytest

from monodist.cdf_fit import fit_cdf_family
from monodist.isoreg import (
    PinballOracle,
    brute_force_minimizers,
    check_membership,
    pava_antitonic_ls,
    pinball_losses,
)
from monodist.order_core import DesignGroups
from monodist.quantile_fit import pinball_risk, plugin_quantiles, quantile_band, smooth_band_curve
from monodist.sim import harness
from monodist.sim import inequalities as ineq
from monodist.verify import (
    direct_minmax_antitonic,
    partition_ls_antitonic,
    random_groups,
    run_isoreg_suite,
)

criterion = pytest.mark.criterion


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


@criterion(1, "least squares PAVA equals partition and min-max oracles")
def test_c01_ls_oracles():
    rng = _rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        m = int(rng.integers(1, 9))
        y = rng.normal(size=m)
        w = rng.integers(1, 6, m).astype(float)
        f = pava_antitonic_ls(y, w)
        worst = max(
            worst,
            np.max(np.abs(f - partition_ls_antitonic(y, w))),
            np.max(np.abs(f - direct_minmax_antitonic(y, w))),
        )
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-12
    assert elapsed < 5.0


@criterion(2, "quantile band brackets brute-force minimizers and attains the minimum")
def test_c02_quantile_oracle():
    rng = _rng(2)
    for _ in range(200):
        g = random_groups(rng, 4, 8, n_values=int(rng.integers(2, 8)))
        beta = float(rng.choice([0.25, 0.5, 0.75]))
        band = quantile_band(g, beta)
        best, argmin = brute_force_minimizers(pinball_losses(g, beta), np.unique(g.y_flat))
        assert np.all(argmin >= band.lower) and np.all(argmin <= band.upper)
        tol = 1e-10 * max(1.0, abs(best))
        assert abs(pinball_risk(g, band.lower, beta).value - best) <= tol
        assert abs(pinball_risk(g, band.upper, beta).value - best) <= tol


@criterion(3, "plug-in quantiles equal the quantile band exactly")
def test_c03_plugin_equals_band():
    rng = _rng(3)
    betas = np.round(np.arange(1, 10) / 10, 1)
    t0 = time.perf_counter()
    for i in range(500):
        ties = [None, 3, 10][i % 3]
        g = random_groups(rng, 12, 40, n_values=ties)
        fit = fit_cdf_family(g)
        for beta in betas:
            a, b = quantile_band(g, beta), plugin_quantiles(fit, beta)
            assert np.array_equal(a.lower, b.lower)
            assert np.array_equal(a.upper, b.upper)
    assert time.perf_counter() - t0 < 10.0


@criterion(4, "two-point counterexample golden values")
def test_c04_two_point_golden():
    g = DesignGroups.from_arrays(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    band = quantile_band(g, 0.5)
    assert np.array_equal(band.lower, [0.0, 0.0])
    assert np.array_equal(band.upper, [1.0, 1.0])
    for q in (0.0, 0.25, 0.5, 1.0):
        assert pinball_risk(g, [q, q], 0.5).value == pytest.approx(0.5, abs=1e-15)
    assert pinball_risk(g, [0.0, 1.0], 0.5).value == pytest.approx(1.0, abs=1e-15)
    orc = PinballOracle(g, 0.5)
    assert check_membership(orc, [0.3, 0.3])
    assert not check_membership(orc, [0.0, 1.0])


@criterion(5, "general solution set property suite")
def test_c05_property_suite():
    report = run_isoreg_suite(seed=5, reps=300)
    required = [
        "mean_value_squared",
        "mean_value_pinball",
        "lattice_closure",
        "minmax_equals_maxmin",
        "linear_on_band",
        "convex_membership_rule",
        "membership_vs_brute_force",
    ]
    for name in required:
        c = report.counts[name]
        assert c["checked"] >= 200, name
        assert c["failed"] == 0, name
    assert report.passed, report.to_json()


RATE_NS = [256, 512, 1024, 2048, 4096, 8192]


@pytest.fixture(scope="module")
def rate_study():
    config = harness.SCENARIOS["gaussian_shift"]
    assert config.design == "fixed" and config.interval == (0.0, 1.0) and config.alpha_ == 1.0
    assert config.reps == 20 and (config.beta1, config.beta2) == (0.05, 0.95)
    t0 = time.perf_counter()
    results = harness.run_study(config, RATE_NS)
    elapsed = time.perf_counter() - t0
    summaries = {s.which: s for s in harness.standard_rate_summaries(config, results)}
    for s in summaries.values():
        print(f"{s.which}: slope={s.slope:.4f} scaled_ratio={s.scaled_ratio:.3f}")
    return summaries, elapsed


@criterion(6, "uniform CDF error rate")
def test_c06_cdf_rate(rate_study):
    summaries, elapsed = rate_study
    s = summaries["sup_err_cdf"]
    assert abs(s.slope + 1 / 3) <= 0.10
    assert s.scaled_ratio <= 2.5
    assert elapsed < 300.0


@criterion(7, "uniform and pointwise quantile error rates")
def test_c07_quantile_rates(rate_study):
    summaries, elapsed = rate_study
    for which in ("sup_err_quantile", "pointwise_err_cdf", "pointwise_err_quantile"):
        assert abs(summaries[which].slope + 1 / 3) <= 0.12, which
    assert elapsed < 300.0


@criterion(8, "heterogeneous DKW Monte Carlo")
def test_c08_dkw():
    t0 = time.perf_counter()
    k, reps = 100, 100_000
    dists, mean_cdf = ineq.heterogeneous_uniforms(k)
    est = ineq.dkw_mc(k, dists, [0.5, 1.0, 1.5, 2.0], reps, seed=8, mean_cdf=mean_cdf)
    assert np.all(est.freq <= ineq.dkw_bound(est.eta))
    assert np.all(est.freq <= ineq.classical_dkw_bound(est.eta) + 3 * est.se)
    assert time.perf_counter() - t0 < 60.0


@criterion(9, "maximal law of large numbers inequality Monte Carlo")
def test_c09_lln():
    t0 = time.perf_counter()
    c, c_prime, C = ineq.hoeffding_c(0.5), 1.5, 2.0
    assert c == 2.0
    C_prime = ineq.maximal_constant(c, c_prime, C)
    eta = np.array([0.3, 0.5])
    for i, n_o in enumerate((50, 200)):
        est = ineq.lln_exp_mc(n_o, eta, 10_000, seed=90 + i, n_max=5000)
        assert np.all(est.freq <= ineq.lln_bound(n_o, eta, c_prime, C_prime))
    assert time.perf_counter() - t0 < 60.0


@criterion(10, "smooth curve risk versus band risk")
def test_c10_smooth_curve_risk():
    config = harness.SCENARIOS["gaussian_shift"]
    groups, _ = harness.generate_trial(config, 100, rep=0)
    band = quantile_band(groups, 0.5)
    curve = smooth_band_curve(band)
    t_low = pinball_risk(groups, band.lower, 0.5).value
    t_up = pinball_risk(groups, band.upper, 0.5).value
    t_smooth = pinball_risk(groups, curve.knots, 0.5).value
    print(f"T(lower)={t_low:.6f} T(upper)={t_up:.6f} T(smooth)={t_smooth:.6f}")
    assert abs(t_low - t_up) <= 1e-10
    assert t_smooth >= t_low - 1e-10


def _best_time(groups, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fit_cdf_family(groups)
        times.append(time.perf_counter() - t0)
    return min(times)


@criterion(11, "fit runtime at n = 20000 and linear scaling in thresholds")
def test_c11_complexity():
    groups, _ = harness.generate_trial(harness.SCENARIOS["gaussian_shift"], 20_000, rep=0)
    fit_cdf_family(groups)  # compile outside the timing
    t0 = time.perf_counter()
    fit = fit_cdf_family(groups)
    assert time.perf_counter() - t0 < 10.0
    assert fit.m == 20_000 and fit.ell == 20_000

    # fixed m, thresholds doubled; the m * ell term dominates
    rng = _rng(11)
    m, n = 2000, 80_000
    x = np.repeat(np.arange(m) / m, n // m)
    perm = rng.permutation(n)
    ratios = []
    for ell in (4000, 8000):
        small = DesignGroups.from_arrays(x, (perm % ell).astype(float))
        large = DesignGroups.from_arrays(x, (perm % (2 * ell)).astype(float))
        assert fit_cdf_family(large).ell == 2 * fit_cdf_family(small).ell
        ratios.append(_best_time(large) / _best_time(small))
    print(f"runtime ratios for doubled thresholds: {ratios}")
    assert max(ratios) <= 2.4
