import json

import numpy as np
import pytest

from monodist import verify
from monodist.verify import (
    SuiteReport,
    direct_minmax_antitonic,
    partition_ls_antitonic,
    run_suite,
    band_membership_vector,
)


def test_oracles_hand_example():
    # antitonic LS of (1, 3, 2) with unit weights pools everything: mean 2
    y, w = np.array([1.0, 3.0, 2.0]), np.ones(3)
    assert np.allclose(partition_ls_antitonic(y, w), [2.0, 2.0, 2.0])
    assert np.allclose(direct_minmax_antitonic(y, w), [2.0, 2.0, 2.0])
    y = np.array([3.0, 1.0, 2.0])
    assert np.allclose(partition_ls_antitonic(y, w), [3.0, 1.5, 1.5])
    assert np.allclose(direct_minmax_antitonic(y, w), [3.0, 1.5, 1.5])


def test_report_aggregation():
    r = SuiteReport("x")
    r.record("a", True)
    r.record("a", True)
    assert r.passed
    r.record("b", False)
    assert not r.passed
    doc = json.loads(r.to_json())
    assert doc["properties"]["a"] == {"checked": 2, "failed": 0}
    assert doc["passed"] is False


def test_band_membership_vector_in_band_and_increase_set():
    rng = np.random.default_rng(0)
    lower = np.array([0.0, 0.0, 1.0, 1.0, 2.0])
    upper = np.array([1.0, 1.0, 1.0, 3.0, 3.0])
    for _ in range(50):
        q = band_membership_vector(lower, upper, rng)
        assert np.all(lower <= q) and np.all(q <= upper)
        assert np.all(np.diff(q) >= 0)
        allowed = (np.diff(lower) > 0) | (np.diff(upper) > 0)
        assert np.all(allowed[np.diff(q) > 0])


@pytest.mark.parametrize("name, reps", [("isoreg", 30), ("quantile", 30), ("dkw", 2000), ("lln", 500)])
def test_suites_pass_small(name, reps):
    report = run_suite(name, seed=11, reps=reps)
    assert report.passed, report.to_json()
    assert all(c["checked"] > 0 for c in report.counts.values())


def test_suite_detects_broken_solver(monkeypatch):
    monkeypatch.setattr(verify, "pava_antitonic_ls", lambda y, w: np.asarray(y, dtype=float))
    report = verify.run_isoreg_suite(seed=0, reps=20)
    assert not report.passed
    assert report.counts["ls_partition_oracle"]["failed"] > 0


def test_unknown_suite():
    with pytest.raises(ValueError, match="unknown suite"):
        run_suite("nope")
