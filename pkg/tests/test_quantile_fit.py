import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, special

from monodist.cdf_fit import fit_cdf_family
from monodist.isoreg import PinballOracle, brute_force_minimizers, check_membership, pinball_losses
from monodist.order_core import DesignGroups, StepCDF, group_by_design, step_quantile
from monodist.quantile_fit import (
    QuantileBand,
    band_from_json,
    band_to_json,
    pinball_risk,
    plugin_quantiles,
    quantile_band,
    quantile_lipschitz_check,
    quantile_shift_bounds,
    smooth_band_curve,
)

TWO_POINT = group_by_design([(0, 1), (1, 0)])
BETAS = [round(0.1 * k, 1) for k in range(1, 10)]


def _random_groups(rng, m_max, n_max):
    m = int(rng.integers(1, m_max + 1))
    n = int(rng.integers(m, n_max + 1))
    x = np.concatenate((np.arange(m), rng.integers(0, m, n - m)))
    y = rng.integers(0, int(rng.integers(2, 9)), n)
    return DesignGroups.from_arrays(x, y)


def test_band_crossing_pair():
    band = quantile_band(TWO_POINT, 0.5)
    assert band.lower.tolist() == [0.0, 0.0] and band.upper.tolist() == [1.0, 1.0]
    plug = plugin_quantiles(fit_cdf_family(TWO_POINT), 0.5)
    assert plug.lower.tolist() == [0.0, 0.0] and plug.upper.tolist() == [1.0, 1.0]


def test_band_single_group_is_sample_quantiles():
    g = group_by_design([(0, v) for v in (4, 1, 3, 2)])
    F = StepCDF.from_sample([4, 1, 3, 2])
    for beta in (0.2, 0.25, 0.5, 0.9):
        band = quantile_band(g, beta)
        assert band.lower[0] == step_quantile(F, beta, "minimal")
        assert band.upper[0] == step_quantile(F, beta, "maximal")
        plug = plugin_quantiles(fit_cdf_family(g), beta)
        assert np.array_equal(plug.lower, band.lower) and np.array_equal(plug.upper, band.upper)


def test_band_rejects_bad_beta():
    with pytest.raises(ValueError):
        quantile_band(TWO_POINT, 0.0)
    with pytest.raises(ValueError):
        plugin_quantiles(fit_cdf_family(TWO_POINT), 1.0)


def test_pinball_risk_crossing_pair():
    for q in (0.0, 0.25, 0.5, 1.0):
        assert pinball_risk(TWO_POINT, [q, q], 0.5).value == 0.5
    assert pinball_risk(TWO_POINT, [0.0, 1.0], 0.5).value == 1.0
    g = group_by_design([(0, 2), (0, 2), (1, 3)])
    assert pinball_risk(g, [2, 3], 0.3).value == 0.0
    with pytest.raises(ValueError):
        pinball_risk(TWO_POINT, [0.0], 0.5)


def test_membership_rule_crossing_pair():
    orc = PinballOracle(TWO_POINT, 0.5)
    assert check_membership(orc, [0.4, 0.4])
    assert pinball_risk(TWO_POINT, [0.0, 1.0], 0.5).value > pinball_risk(TWO_POINT, [0.4, 0.4], 0.5).value


def test_plugin_equals_band_random():
    rng = np.random.default_rng(0)
    for _ in range(50):
        g = _random_groups(rng, 6, 20)
        fit = fit_cdf_family(g)
        for beta in BETAS:
            a, b = quantile_band(g, beta), plugin_quantiles(fit, beta)
            assert np.array_equal(a.lower, b.lower) and np.array_equal(a.upper, b.upper)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.25, 0.5, 0.75]), st.floats(0, 1))
def test_band_optimal_and_linear(seed, beta, lam):
    g = _random_groups(np.random.default_rng(seed), 4, 8)
    band = quantile_band(g, beta)
    best, argmin = brute_force_minimizers(pinball_losses(g, beta), np.unique(g.y_flat))
    assert np.all(argmin >= band.lower) and np.all(argmin <= band.upper)
    tol = 1e-10 * max(1.0, best)
    assert abs(pinball_risk(g, band.lower, beta).value - best) <= tol
    assert abs(pinball_risk(g, band.upper, beta).value - best) <= tol
    mid = (1 - lam) * band.lower + lam * band.upper
    assert abs(pinball_risk(g, mid, beta).value - best) <= tol


def test_band_monotone_in_beta_and_no_inner_data():
    rng = np.random.default_rng(1)
    for _ in range(30):
        g = _random_groups(rng, 8, 30)
        bands = [quantile_band(g, b) for b in BETAS]
        for lo, hi in zip(bands[:-1], bands[1:]):
            assert np.all(lo.lower <= hi.lower) and np.all(lo.upper <= hi.upper)
        for band in bands:
            band.check()


def test_band_check_detects_inner_point():
    band = QuantileBand(0.5, np.array([0.0]), np.array([2.0]), group_by_design([(0, 1)]))
    with pytest.raises(AssertionError):
        band.check()


def test_smooth_curve_pinned_band():
    g = group_by_design([(0, 1), (1, 2), (2, 5)])
    band = QuantileBand(0.5, np.array([1.0, 2.0, 5.0]), np.array([1.0, 2.0, 5.0]), g)
    assert smooth_band_curve(band).knots.tolist() == [1.0, 2.0, 5.0]


def test_smooth_curve_crossing_pair_is_constant():
    curve = smooth_band_curve(quantile_band(TWO_POINT, 0.5))
    assert curve.knots[0] == curve.knots[1]
    assert 0.0 <= curve.knots[0] <= 1.0
    assert curve.energy() == 0.0


def _qp_oracle(lower, upper, xs):
    h = np.diff(xs)

    def energy(q):
        return np.sum(np.diff(q) ** 2 / h)

    def grad(q):
        s = 2 * np.diff(q) / h
        g = np.zeros_like(q)
        g[:-1] -= s
        g[1:] += s
        return g

    res = optimize.minimize(
        energy, 0.5 * (lower + upper), jac=grad, method="L-BFGS-B",
        bounds=list(zip(lower, upper)), options={"ftol": 1e-15, "gtol": 1e-12},
    )
    return res.x


def test_smooth_curve_three_knots():
    g = group_by_design([(0, 0), (1, 1), (2, 2)])
    lower, upper = np.array([0.0, 0.0, 2.0]), np.array([1.0, 1.0, 3.0])
    curve = smooth_band_curve(QuantileBand(0.5, lower, upper, g))
    assert np.allclose(curve.knots, [1.0, 1.0, 2.0], atol=1e-10)
    assert np.allclose(curve.knots, _qp_oracle(lower, upper, g.xs), atol=1e-6)


def test_smooth_curve_matches_qp_oracle_on_data():
    rng = np.random.default_rng(6)
    x = rng.uniform(0, 1, 80)
    g = DesignGroups.from_arrays(x, x + rng.normal(size=80))
    for beta in (0.2, 0.5, 0.8):
        band = quantile_band(g, beta)
        curve = smooth_band_curve(band)
        assert np.all(np.diff(curve.knots) >= -1e-12)
        assert np.all(curve.knots >= band.lower) and np.all(curve.knots <= band.upper)
        ref = _qp_oracle(band.lower, band.upper, g.xs)
        assert curve.energy() <= np.sum(np.diff(ref) ** 2 / np.diff(g.xs)) + 1e-8
        assert np.allclose(curve.knots, ref, atol=1e-5)
        plain = smooth_band_curve(band, omega=1.0)
        assert np.allclose(plain.knots, curve.knots, atol=1e-8)


def test_smooth_curve_rejects_infeasible_band():
    band = QuantileBand(0.5, np.array([1.0, 2.0]), np.array([0.0, 3.0]), TWO_POINT)
    with pytest.raises(ValueError):
        smooth_band_curve(band)


def test_shift_bounds_identical_cdfs():
    F = StepCDF.from_sample([0, 1, 1, 2, 5])
    for beta in (0.2, 0.4, 0.6):
        for delta in (0.0, 0.1):
            assert quantile_shift_bounds(F, F, beta, delta)


def test_shift_bounds_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        a = rng.integers(0, 12, rng.integers(1, 10))
        b = rng.integers(0, 12, rng.integers(1, 10)) + rng.integers(-2, 3)
        F, G = StepCDF.from_sample(a), StepCDF.from_sample(b)
        pts = np.union1d(F.jump_points, G.jump_points)
        delta = float(np.max(np.abs(F(pts) - G(pts))))
        if delta >= 0.5:
            continue
        beta = float(rng.uniform(delta, 1 - delta))
        if not delta < beta < 1 - delta:
            continue
        assert quantile_shift_bounds(F, G, beta, delta)


def test_shift_bounds_boundary_case():
    F = StepCDF.from_sample([1, 2, 3, 4])
    G = StepCDF.from_sample([1, 1, 3, 4])  # G = F + 1/4 on [1, 2)
    # at beta = 0.5 both sides of the first bound meet at y = 1
    assert quantile_shift_bounds(F, G, 0.5, 0.25)
    assert step_quantile(G, 0.5) == step_quantile(F, 0.25) == 1.0
    assert step_quantile(G, 0.5, "maximal") == 3.0
    assert step_quantile(F, 0.75, "maximal") == 4.0


def test_shift_bounds_second_inequality_direction():
    # equal CDFs: G^-1(beta+) = F^-1(beta+) < F^-1((beta + delta)+) for delta > 0
    F = StepCDF.from_sample([0, 1, 2, 3])
    assert step_quantile(F, 0.3, "maximal") < step_quantile(F, 0.3 + 0.25, "maximal")
    assert quantile_shift_bounds(F, F, 0.3, 0.25)


def test_shift_bounds_preconditions():
    F = StepCDF.from_sample([0, 1])
    G = StepCDF.from_sample([1, 2])
    with pytest.raises(ValueError):
        quantile_shift_bounds(F, G, 0.5, 0.1)  # sup distance is 0.5
    with pytest.raises(ValueError):
        quantile_shift_bounds(F, F, 0.05, 0.1)
    with pytest.raises(ValueError):
        quantile_shift_bounds(F, F, 0.5, 1.0)


def test_lipschitz_checks():
    ident = lambda b: b  # noqa: E731
    assert quantile_lipschitz_check(ident, 0.0, 1.0, 1.0, (0.2, 0.7))
    assert not quantile_lipschitz_check(ident, 0.0, 1.0, 2.0, (0.2, 0.7))
    kappa = float(np.exp(-0.5 * special.ndtri(0.9) ** 2) / np.sqrt(2 * np.pi))
    grid = np.linspace(0.11, 0.89, 30)
    for b in grid:
        for b2 in grid:
            assert quantile_lipschitz_check(special.ndtri, 0.1, 0.9, kappa, (b, b2))
    assert quantile_lipschitz_check(special.ndtri, 0.1, 0.9, kappa, (0.5, 0.5))
    with pytest.raises(ValueError):
        quantile_lipschitz_check(ident, 0.1, 0.9, 1.0, (0.05, 0.5))


def test_band_json_round_trip():
    rng = np.random.default_rng(3)
    g = DesignGroups.from_arrays(rng.integers(0, 5, 30) / 7, rng.normal(size=30))
    band = quantile_band(g, 0.3)
    doc = band_to_json(band, smooth_band_curve(band))
    assert set(doc) == {"beta", "xs", "lower", "upper", "smooth"}
    back = band_from_json(doc, g)
    assert np.array_equal(back.lower, band.lower) and np.array_equal(back.upper, band.upper)
