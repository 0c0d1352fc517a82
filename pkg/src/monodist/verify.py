"""Randomized property suites backing the ``verify`` command.

Each suite draws seeded random instances, checks a list of properties
against independent oracles and returns a ``SuiteReport`` with per-property
counts of checked and failed cases.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .cdf_fit import fit_cdf_family
from .isoreg import (
    PinballOracle,
    SquaredOracle,
    brute_force_minimizers,
    check_membership,
    minmax_band,
    pava_antitonic_ls,
    pava_isotonic_ls,
    pinball_losses,
)
from .order_core import DesignGroups
from .quantile_fit import pinball_risk, plugin_quantiles, quantile_band
from .sim import inequalities as ineq

__all__ = [
    "SuiteReport",
    "partition_ls_antitonic",
    "direct_minmax_antitonic",
    "random_groups",
    "band_membership_vector",
    "run_isoreg_suite",
    "run_quantile_suite",
    "run_dkw_suite",
    "run_lln_suite",
    "SUITES",
    "run_suite",
]


@dataclass
class SuiteReport:
    name: str
    counts: dict = field(default_factory=dict)

    def record(self, prop: str, ok: bool) -> None:
        c = self.counts.setdefault(prop, {"checked": 0, "failed": 0})
        c["checked"] += 1
        c["failed"] += int(not ok)

    @property
    def passed(self) -> bool:
        return all(c["failed"] == 0 for c in self.counts.values())

    def to_json(self) -> str:
        return json.dumps({"suite": self.name, "passed": self.passed, "properties": self.counts}, indent=2)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


# --- independent least squares oracles ----------------------------------------


def partition_ls_antitonic(targets, weights) -> np.ndarray:
    """Antitonic LS fit by enumerating all 2^(m-1) splits into consecutive blocks.

    The projection is constant on its level sets with the block means as
    values, so it is the best feasible candidate among these.
    """
    y = np.asarray(targets, dtype=float)
    w = np.asarray(weights, dtype=float)
    m = len(y)
    best, best_sse = None, np.inf
    for cuts in itertools.product((False, True), repeat=m - 1):
        bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [m]
        f = np.empty(m)
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            f[lo:hi] = np.dot(w[lo:hi], y[lo:hi]) / w[lo:hi].sum()
        if np.any(np.diff(f) > 0):
            continue
        sse = float(np.dot(w, (y - f) ** 2))
        if sse < best_sse:
            best, best_sse = f, sse
    return best


def direct_minmax_antitonic(targets, weights) -> np.ndarray:
    """f_j = min_{r<=j} max_{s>=j} of the weighted mean of targets r..s."""
    y = np.asarray(targets, dtype=float)
    w = np.asarray(weights, dtype=float)
    m = len(y)
    f = np.empty(m)
    for j in range(m):
        f[j] = min(
            max(np.dot(w[r : s + 1], y[r : s + 1]) / w[r : s + 1].sum() for s in range(j, m))
            for r in range(j + 1)
        )
    return f


def random_groups(rng, m_max: int, n_max: int, n_values: int | None = None) -> DesignGroups:
    """Random data with at most m_max design points and n_max observations.

    Responses come from a small integer range when ``n_values`` is given,
    which makes ties and flat pooled CDF stretches common.
    """
    m = int(rng.integers(1, m_max + 1))
    n = int(rng.integers(m, max(m, n_max) + 1))
    x = np.concatenate((np.arange(m), rng.integers(0, m, n - m))).astype(float)
    if n_values:
        y = rng.integers(0, n_values, n).astype(float)
    else:
        y = np.round(rng.normal(size=n) + 0.3 * x, 3)
    return DesignGroups.from_arrays(x, y)


def band_membership_vector(lower, upper, rng) -> np.ndarray:
    """A random isotonic vector between lower and upper that only rises where
    lower or upper rises."""
    lower, upper = np.asarray(lower), np.asarray(upper)
    m = len(lower)
    rises = np.concatenate(([True], (np.diff(lower) > 0) | (np.diff(upper) > 0)))
    block = np.cumsum(rises) - 1
    starts = np.flatnonzero(rises)
    vals = np.empty(len(starts))
    for b, s in enumerate(starts):
        choice = rng.integers(3)
        lam = (0.0, 1.0, rng.random())[choice]
        vals[b] = (1 - lam) * lower[s] + lam * upper[s]
    vals = np.maximum.accumulate(vals)
    x = vals[block]
    assert x.shape == (m,)
    return x


def _random_partition(rng, a, b):
    cuts = []
    if b > a:
        k = rng.integers(0, b - a + 1)
        cuts = sorted(rng.choice(np.arange(a + 1, b + 1), size=k, replace=False))
    bounds = [a] + list(cuts) + [b + 1]
    return [(lo, hi - 1) for lo, hi in zip(bounds[:-1], bounds[1:])]


def _mean_value_ok(oracle, rng) -> bool:
    m = oracle.m
    a = int(rng.integers(0, m))
    b = int(rng.integers(a, m))
    L, U = oracle.interval_minimizers(a, b)
    parts = [oracle.interval_minimizers(lo, hi) for lo, hi in _random_partition(rng, a, b)]
    Ls, Us = [p[0] for p in parts], [p[1] for p in parts]
    tol = oracle.atol
    return min(Ls) - tol <= L <= max(Ls) + tol and min(Us) - tol <= U <= max(Us) + tol


def _both_orders_ok(oracle) -> bool:
    """Evaluate both orders of the lower and upper formulas from scratch."""
    m = oracle.m
    Lm = np.full((m, m), np.nan)
    Um = np.full((m, m), np.nan)
    for a in range(m):
        for b in range(a, m):
            Lm[a, b], Um[a, b] = oracle.interval_minimizers(a, b)
    ok = True
    for j in range(m):
        for M in (Lm, Um):
            maxmin = max(np.nanmin(M[a, j:]) for a in range(j + 1))
            minmax = min(np.nanmax(M[: j + 1, b]) for b in range(j, m))
            ok &= abs(maxmin - minmax) <= oracle.atol
    return bool(ok)


# --- suites ---------------------------------------------------------------


def run_isoreg_suite(seed: int = 0, reps: int = 200) -> SuiteReport:
    """Least squares oracles and the general solution set properties."""
    rng = _rng(seed)
    rep = SuiteReport("isoreg")
    for _ in range(reps):
        # least squares: PAVA vs partition enumeration vs min-max formula
        m = int(rng.integers(1, 9))
        y = rng.random(m)
        w = rng.integers(1, 6, m).astype(float)
        f = pava_antitonic_ls(y, w)
        rep.record("ls_partition_oracle", np.max(np.abs(f - partition_ls_antitonic(y, w))) <= 1e-12)
        rep.record("ls_minmax_formula", np.max(np.abs(f - direct_minmax_antitonic(y, w))) <= 1e-12)
        sq = SquaredOracle(y, w)
        band = minmax_band(sq)
        iso = pava_isotonic_ls(y, w)
        rep.record(
            "squared_band_is_pava",
            np.max(np.abs(band.lower - iso)) <= 1e-12 and np.max(np.abs(band.upper - iso)) <= 1e-12,
        )
        rep.record("mean_value_squared", _mean_value_ok(sq, rng))

        # pinball instances with brute force over the response grid
        g = random_groups(rng, 4, 8, n_values=int(rng.integers(2, 6)))
        beta = float(rng.choice([0.25, 0.5, 0.75]))
        orc = PinballOracle(g, beta)
        band = minmax_band(orc)
        rep.record("mean_value_pinball", _mean_value_ok(orc, rng))
        rep.record("minmax_equals_maxmin", _both_orders_ok(orc) and _both_orders_ok(sq))
        best, argmin = brute_force_minimizers(pinball_losses(g, beta), np.unique(g.y_flat))
        rep.record(
            "extremality",
            bool(np.all(argmin >= band.lower) and np.all(argmin <= band.upper)),
        )
        rep.record("band_in_argmin", check_membership(orc, band.lower) and check_membership(orc, band.upper))
        i1, i2 = rng.integers(0, len(argmin), 2)
        x1, x2 = argmin[i1], argmin[i2]
        rep.record(
            "lattice_closure",
            check_membership(orc, np.minimum(x1, x2)) and check_membership(orc, np.maximum(x1, x2)),
        )
        x = band_membership_vector(band.lower, band.upper, rng)
        risk = pinball_risk(g, x, beta).value
        rep.record(
            "convex_membership_rule",
            check_membership(orc, x) and abs(risk - best) <= 1e-10 * max(1.0, abs(best)),
        )
        lam = rng.random()
        mid = pinball_risk(g, (1 - lam) * band.lower + lam * band.upper, beta).value
        low = pinball_risk(g, band.lower, beta).value
        rep.record("linear_on_band", abs(mid - low) <= 1e-10 * max(1.0, abs(low)))
        if g.m <= 3:
            grid = np.unique(g.y_flat)
            losses = pinball_losses(g, beta)
            table = np.stack([L(grid) for L in losses])
            ok = True
            for idx in itertools.combinations_with_replacement(range(len(grid)), g.m):
                v = grid[list(idx)]
                total = table[np.arange(g.m), list(idx)].sum()
                is_min = total <= best + 1e-10 * max(1.0, abs(best))
                ok &= check_membership(orc, v) == is_min
            rep.record("membership_vs_brute_force", bool(ok))
    return rep


def run_quantile_suite(seed: int = 0, reps: int = 200, plugin_reps: int | None = None) -> SuiteReport:
    """Quantile bands against brute force, and plug-in equality."""
    rng = _rng(seed)
    rep = SuiteReport("quantile")
    for _ in range(reps):
        g = random_groups(rng, 4, 8, n_values=int(rng.integers(2, 8)))
        beta = float(rng.choice([0.25, 0.5, 0.75]))
        band = quantile_band(g, beta)
        best, argmin = brute_force_minimizers(pinball_losses(g, beta), np.unique(g.y_flat))
        rep.record(
            "band_brackets_minimizers",
            bool(np.all(argmin >= band.lower) and np.all(argmin <= band.upper)),
        )
        tl = pinball_risk(g, band.lower, beta).value
        tu = pinball_risk(g, band.upper, beta).value
        scale = max(1.0, abs(best))
        rep.record("band_attains_minimum", abs(tl - best) <= 1e-10 * scale and abs(tu - best) <= 1e-10 * scale)
        b2 = min(beta + 0.25, 0.95)
        other = quantile_band(g, b2)
        rep.record(
            "monotone_in_beta",
            bool(np.all(band.lower <= other.lower) and np.all(band.upper <= other.upper)),
        )
    for _ in range(reps if plugin_reps is None else plugin_reps):
        g = random_groups(rng, 12, 40, n_values=int(rng.choice([0, 3, 10])) or None)
        fit = fit_cdf_family(g)
        for beta in np.round(np.arange(1, 10) / 10, 1):
            a, b = quantile_band(g, beta), plugin_quantiles(fit, beta)
            rep.record(
                "plugin_equals_band",
                np.array_equal(a.lower, b.lower) and np.array_equal(a.upper, b.upper),
            )
    return rep


def run_dkw_suite(seed: int = 0, reps: int = 10_000, k: int = 100) -> SuiteReport:
    """Heterogeneous DKW inequality plus closed-form sanity checks."""
    rep = SuiteReport("dkw")
    dists, mean_cdf = ineq.heterogeneous_uniforms(k)
    eta = np.array([0.5, 1.0, 1.5, 2.0])
    est = ineq.dkw_mc(k, dists, eta, reps, seed, mean_cdf)
    for e, f, s in zip(eta, est.freq, est.se):
        rep.record("within_C4_bound", f <= ineq.dkw_bound(e))
        rep.record("within_classical_plus_3se", f <= ineq.classical_dkw_bound(e) + 3 * s)
    zero = ineq.dkw_mc(k, dists, [0.0], 100, seed + 1, mean_cdf)
    rep.record("eta_zero_gives_one", zero.freq[0] == 1.0)
    one = ineq.dkw_mc(1, [stats.uniform()], [0.6, 0.75, 0.9], reps, seed + 2)
    exact = 2 * (1 - one.eta)
    se = np.sqrt(exact * (1 - exact) / reps)
    for f, p, s in zip(one.freq, exact, se):
        rep.record("one_sample_closed_form", abs(f - p) <= 4 * s + 1e-12)
    return rep


def run_lln_suite(seed: int = 0, reps: int = 10_000, n_max: int = 5000) -> SuiteReport:
    """Maximal inequality for +-1/2 increments, with c = 2 and c' = 1.5."""
    rep = SuiteReport("lln")
    c, c_prime, C = ineq.hoeffding_c(0.5), 1.5, 2.0
    C_prime = ineq.maximal_constant(c, c_prime, C)
    eta = np.array([0.3, 0.5])
    for i, n_o in enumerate((50, 200)):
        est = ineq.lln_exp_mc(n_o, eta, reps, seed + i, n_max=n_max)
        for f, b in zip(est.freq, ineq.lln_bound(n_o, eta, c_prime, C_prime)):
            rep.record("within_maximal_bound", f <= b)
    above = ineq.lln_exp_mc(1, [0.5 + 1e-9, 1.0], min(reps, 1000), seed + 7, n_max=200)
    rep.record("above_increment_bound_is_zero", bool(np.all(above.freq == 0)))
    n = 40
    est = ineq.lln_exp_mc(n, [0.1, 0.2, 0.3], reps, seed + 9, n_max=n)
    exact = ineq.single_n_tail(n, est.eta)
    se = np.sqrt(exact * (1 - exact) / reps)
    for f, p, s in zip(est.freq, exact, se):
        rep.record("single_n_matches_binomial", abs(f - p) <= 4 * s + 1e-12)
    return rep


SUITES = {
    "isoreg": run_isoreg_suite,
    "quantile": run_quantile_suite,
    "dkw": run_dkw_suite,
    "lln": run_lln_suite,
}


def run_suite(name: str, seed: int = 0, reps: int | None = None) -> SuiteReport:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return fn(seed) if reps is None else fn(seed, reps)
