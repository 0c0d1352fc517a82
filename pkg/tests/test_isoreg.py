import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import isotonic_regression

from monodist.isoreg import (
    OracleInconsistencyError,
    LossOracle,
    PinballOracle,
    SquaredOracle,
    brute_force_band,
    brute_force_minimizers,
    check_membership,
    minmax_band,
    order_stat_index,
    pava_antitonic_ls,
    pava_isotonic_ls,
    pinball_losses,
    squared_losses,
)
from monodist.order_core import group_by_design
from monodist.verify import direct_minmax_antitonic, partition_ls_antitonic

TWO_POINT = group_by_design([(0, 1), (1, 0)])

ls_instances = st.integers(1, 8).flatmap(
    lambda m: st.tuples(
        st.lists(st.floats(-10, 10, allow_nan=False), min_size=m, max_size=m),
        st.lists(st.integers(1, 5), min_size=m, max_size=m),
    )
)


def test_pava_examples():
    assert pava_antitonic_ls([3.0, 2.0, 2.0, -1.0]).tolist() == [3.0, 2.0, 2.0, -1.0]
    assert pava_antitonic_ls([0.0, 1.0], [1.0, 1.0]).tolist() == [0.5, 0.5]
    y, w = [0.2, 0.9, 0.1], [1.0, 2.0, 1.0]
    # pooling the first two gives 2/3, still above 0.1
    f = pava_antitonic_ls(y, w)
    assert np.allclose(f, [2.0 / 3, 2.0 / 3, 0.1], atol=1e-15)
    assert np.allclose(f, partition_ls_antitonic(y, w), atol=1e-15)


def test_pava_errors():
    with pytest.raises(ValueError):
        pava_antitonic_ls([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        pava_antitonic_ls([1.0, 2.0], [1.0, 0.0])
    assert pava_antitonic_ls([]).size == 0


@given(ls_instances)
def test_pava_matches_oracles(inst):
    y, w = np.array(inst[0]), np.array(inst[1], dtype=float)
    f = pava_antitonic_ls(y, w)
    scale = max(1.0, np.max(np.abs(y)))
    assert np.max(np.abs(f - partition_ls_antitonic(y, w))) <= 1e-12 * scale
    assert np.max(np.abs(f - direct_minmax_antitonic(y, w))) <= 1e-12 * scale


@given(ls_instances)
def test_pava_matches_scipy(inst):
    y, w = np.array(inst[0]), np.array(inst[1], dtype=float)
    ref = isotonic_regression(y, weights=w, increasing=False).x
    assert np.allclose(pava_antitonic_ls(y, w), ref, rtol=0, atol=1e-12)
    ref = isotonic_regression(y, weights=w, increasing=True).x
    assert np.allclose(pava_isotonic_ls(y, w), ref, rtol=0, atol=1e-12)


def test_direct_minmax_on_larger_instances():
    rng = np.random.default_rng(3)
    for _ in range(50):
        m = int(rng.integers(10, 31))
        y, w = rng.normal(size=m), rng.integers(1, 6, m).astype(float)
        assert np.max(np.abs(pava_antitonic_ls(y, w) - direct_minmax_antitonic(y, w))) <= 1e-12


def test_minmax_band_single_index():
    orc = PinballOracle(group_by_design([(0, 1), (0, 2), (0, 5)]), 0.5)
    band = minmax_band(orc)
    assert band.lower.tolist() == [2.0] and band.upper.tolist() == [2.0]
    orc = PinballOracle(group_by_design([(0, 1), (0, 5)]), 0.5)
    assert minmax_band(orc).lower.tolist() == [1.0]
    assert minmax_band(orc).upper.tolist() == [5.0]


def test_minmax_band_crossing_pair():
    band = minmax_band(PinballOracle(TWO_POINT, 0.5))
    assert band.lower.tolist() == [0.0, 0.0]
    assert band.upper.tolist() == [1.0, 1.0]


def test_squared_band_is_isotonic_fit():
    rng = np.random.default_rng(0)
    y, w = rng.normal(size=12), rng.integers(1, 4, 12).astype(float)
    band = minmax_band(SquaredOracle(y, w))
    expected = -pava_antitonic_ls(-y, w)
    assert np.max(np.abs(expected - pava_isotonic_ls(y, w))) <= 1e-12
    assert np.max(np.abs(band.lower - expected)) <= 1e-12
    assert np.max(np.abs(band.upper - expected)) <= 1e-12


class _Broken(LossOracle):
    """Interval minimizers that are not means of their parts."""

    m = 3
    atol = 0.0
    table = {(0, 0): 1.0, (0, 1): 4.0, (0, 2): 2.0, (1, 1): 0.0, (1, 2): 3.0, (2, 2): 3.0}

    def interval_minimizers(self, a, b):
        v = self.table[(a, b)]
        return v, v


def test_inconsistent_oracle_raises():
    with pytest.raises(OracleInconsistencyError):
        minmax_band(_Broken())


def test_membership_crossing_pair():
    orc = PinballOracle(TWO_POINT, 0.5)
    for q in (0.0, 0.3, 1.0):
        assert check_membership(orc, [q, q])
    assert not check_membership(orc, [0.0, 1.0])
    assert not check_membership(orc, [1.0, 0.0])
    assert not check_membership(orc, [1.5, 1.5])
    with pytest.raises(ValueError):
        check_membership(orc, [0.0])


def test_membership_agrees_with_grid_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(20):
        x = np.repeat([0.0, 1.0, 2.0], rng.integers(1, 4, 3))
        y = rng.integers(0, 5, len(x)).astype(float)
        g = group_by_design(zip(x, y))
        beta = float(rng.choice([0.25, 0.5, 0.75]))
        orc = PinballOracle(g, beta)
        grid = np.unique(g.y_flat)
        best, _ = brute_force_minimizers(pinball_losses(g, beta), grid)
        losses = pinball_losses(g, beta)
        for v in itertools.combinations_with_replacement(grid, 3):
            total = sum(L(np.array([q]))[0] for L, q in zip(losses, v))
            assert check_membership(orc, v) == (total <= best + 1e-10)


def test_brute_force_band_examples():
    band = brute_force_band(pinball_losses(TWO_POINT, 0.5), [0.0, 0.5, 1.0])
    assert band.lower.tolist() == [0.0, 0.0] and band.upper.tolist() == [1.0, 1.0]
    band = brute_force_band(squared_losses([0.7]), [0.0, 0.7, 2.0])
    assert band.lower.tolist() == band.upper.tolist() == [0.7]
    with pytest.raises(ValueError, match="grid too large"):
        brute_force_band(squared_losses(np.zeros(8)), np.arange(100.0), max_candidates=1000)


def test_brute_force_matches_band_on_random_pinball():
    rng = np.random.default_rng(5)
    for _ in range(30):
        x = rng.integers(0, 4, 8).astype(float)
        y = rng.integers(0, 6, 8).astype(float)
        g = group_by_design(zip(x, y))
        beta = float(rng.choice([0.25, 0.5, 0.75]))
        band = minmax_band(PinballOracle(g, beta))
        bf = brute_force_band(pinball_losses(g, beta), np.unique(y))
        assert np.array_equal(bf.lower, band.lower) and np.array_equal(bf.upper, band.upper)


@settings(max_examples=200)
@given(st.floats(0.001, 0.999), st.integers(1, 60), st.booleans())
def test_order_stat_index_is_smallest(beta, w, strict):
    k = int(order_stat_index(beta, np.array([w]), strict)[0])

    def ok(j):
        return j / w > beta if strict else j / w >= beta

    if ok(w):
        assert ok(k) and (k == 1 or not ok(k - 1))
    else:
        assert k == w


def test_pinball_oracle_row_matches_direct():
    rng = np.random.default_rng(2)
    x = rng.integers(0, 6, 30).astype(float)
    y = rng.normal(size=30).round(1)
    orc = PinballOracle(group_by_design(zip(x, y)), 0.3)
    for a in range(orc.m):
        lo, hi = orc.row(a)
        direct = np.array([orc.interval_minimizers(a, b) for b in range(a, orc.m)])
        assert np.array_equal(lo, direct[:, 0]) and np.array_equal(hi, direct[:, 1])
