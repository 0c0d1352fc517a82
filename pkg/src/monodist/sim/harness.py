"""Triangular-array simulations of the uniform convergence rates.

For each sample size n a design X_n1..X_nn is drawn (fixed equispaced or iid
uniform), responses come from a known family F_x, and the fitted CDF family
is compared with the truth:

* sup over x in I_n and all y of |F^_x(y) - F_x(y)|, where I_n shrinks the
  covariate interval by delta_n = C3 rho_n^{1/(2 alpha + 1)}, rho_n = log(n)/n;
* sup over x in I_n and beta in B_n of the quantile error;
* both errors at a single interior point x_o;
* optionally M_n = max_{r<=s} w_rs^{1/2} ||pooled ECDF - pooled truth||.

``rate_fit`` then regresses log mean error on log n.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import astuple, dataclass, fields
from typing import Callable, Iterable, Sequence

import numpy as np

from .. import _kernels
from ..cdf_fit import CdfFamilyFit, fit_cdf_family
from ..order_core import DesignGroups
from ..quantile_fit import QuantileBand, plugin_quantile_matrix, smooth_band_curve
from .families import get_family

__all__ = [
    "SimConfig",
    "RateSchedule",
    "TrialResult",
    "RateSummary",
    "trial_rng",
    "generate_trial",
    "sup_error_cdf",
    "sup_error_quantile",
    "pointwise_errors",
    "m_statistic",
    "proof_chain_bound",
    "design_frequency_ratio",
    "run_trial",
    "run_study",
    "rate_fit",
    "standard_rate_summaries",
    "trials_to_csv",
    "summary_to_json",
    "SCENARIOS",
]


@dataclass(frozen=True)
class SimConfig:
    """Scenario parameters.

    ``alpha``, ``C1`` and ``kappa`` default to the family's own constants.
    ``D`` is the slack factor in the bound M_n <= (D log n)^{1/2}; it enters
    the constant C = (C2 D / C3)^{1/2} + C1 C3^alpha that sets Delta_n.
    """

    family: str = "gaussian_shift"
    design: str = "fixed"
    interval: tuple[float, float] = (0.0, 1.0)
    alpha: float | None = None
    C1: float | None = None
    C2: float = 0.5
    C3: float = 1.0
    D: float = 1.5
    kappa: float | None = None
    beta1: float = 0.05
    beta2: float = 0.95
    x_o: float = 0.5
    interpolation: str = "step_right"
    quantile_estimator: str = "lower"
    beta_grid_size: int = 101
    m_stat: bool = False
    m_stat_grid: int | None = 256
    seed: int = 0
    reps: int = 20

    def __post_init__(self):
        a, b = self.interval
        get_family(self.family)
        if not a < b:
            raise ValueError("interval must satisfy a < b")
        if self.design not in ("fixed", "random"):
            raise ValueError("design must be 'fixed' or 'random'")
        if not 0 < self.alpha_ <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0 <= self.beta1 < self.beta2 <= 1:
            raise ValueError("need 0 <= beta1 < beta2 <= 1")
        if min(self.C1_, self.C2, self.C3, self.D) <= 0 or self.reps < 1:
            raise ValueError("constants and reps must be positive")
        if self.kappa_ <= 0:
            raise ValueError("kappa must be positive")
        if self.quantile_estimator not in ("lower", "upper", "smooth"):
            raise ValueError("quantile_estimator must be lower, upper or smooth")
        if not a < self.x_o < b:
            raise ValueError("x_o must be interior to the interval")

    @property
    def truth(self):
        return get_family(self.family)

    @property
    def alpha_(self) -> float:
        return self.truth.alpha if self.alpha is None else self.alpha

    @property
    def C1_(self) -> float:
        return self.truth.C1 if self.C1 is None else self.C1

    @property
    def kappa_(self) -> float:
        if self.kappa is not None:
            return self.kappa
        return self.truth.kappa(self.beta1, self.beta2)

    @property
    def rate_constant(self) -> float:
        return math.sqrt(self.C2 * self.D / self.C3) + self.C1_ * self.C3**self.alpha_


#: named scenarios for the command line
SCENARIOS = {
    "gaussian_shift": SimConfig(),
    "uniform_shift": SimConfig(family="uniform_shift"),
    "gaussian_random": SimConfig(design="random"),
    "smoke": SimConfig(reps=2),
}


@dataclass(frozen=True)
class RateSchedule:
    """Shrinking sequences for sample size n.

    With ``log_factor`` rho_n = log(n)/n (uniform results), otherwise
    rho_n = 1/n (single point results).
    """

    n: int
    alpha: float
    C3: float
    C: float
    interval: tuple[float, float]
    beta1: float
    beta2: float
    log_factor: bool = True

    @classmethod
    def from_config(cls, config: SimConfig, n: int, pointwise: bool = False):
        return cls(
            n, config.alpha_, config.C3, config.rate_constant, tuple(config.interval),
            config.beta1, config.beta2, log_factor=not pointwise,
        )

    @property
    def rho(self) -> float:
        return math.log(self.n) / self.n if self.log_factor else 1.0 / self.n

    @property
    def delta(self) -> float:
        return self.C3 * self.rho ** (1.0 / (2 * self.alpha + 1))

    @property
    def Delta(self) -> float:
        return self.C * self.rho ** (self.alpha / (2 * self.alpha + 1))

    @property
    def rate(self) -> float:
        return self.rho ** (self.alpha / (2 * self.alpha + 1))

    @property
    def I_n(self) -> tuple[float, float]:
        a, b = self.interval
        lo, hi = a + self.delta, b - self.delta
        if lo > hi:
            raise ValueError("n too small for schedule: I_n is empty")
        return lo, hi

    @property
    def has_B_n(self) -> bool:
        return self.beta1 + self.Delta < self.beta2 - self.Delta

    @property
    def B_n(self) -> tuple[float, float]:
        lo, hi = self.beta1 + self.Delta, self.beta2 - self.Delta
        if lo >= hi:
            raise ValueError("n too small for schedule: B_n is empty")
        return lo, hi


@dataclass(frozen=True)
class TrialResult:
    n: int
    rep: int
    sup_err_cdf: float
    sup_err_quantile: float
    pointwise_err_cdf: float
    pointwise_err_quantile: float
    M_n: float


def trial_rng(seed: int, n: int, rep: int) -> np.random.Generator:
    """Counter-based stream for one trial, independent of run order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, n, rep])))


def generate_trial(config: SimConfig, n: int, rep: int = 0):
    """Draw one sample of size n; returns ``(groups, family)``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = trial_rng(config.seed, n, rep)
    a, b = config.interval
    if config.design == "fixed":
        x = a + (np.arange(1, n + 1) / n) * (b - a)
    else:
        x = rng.uniform(a, b, n)
    family = config.truth
    y = family.sample(x, rng)
    return DesignGroups.from_arrays(x, y), family


# --- sup errors -------------------------------------------------------------


def _pieces(fit: CdfFamilyFit, lo: float, hi: float, refine: int = 10):
    """Evaluation pairs covering x in [lo, hi].

    Returns arrays (x, j0, j1, t): the fit at covariate x is
    (1 - t) row j0 + t row j1 and the truth is taken at x. In step modes each
    constant piece is represented by its two clipped end points, which is
    exact for truths monotone in x; in linear mode each gap gets ``refine``
    subintervals.
    """
    xs = fit.xs
    m = fit.m
    out = []

    def add(x, j0, j1, t):
        out.append((x, j0, j1, t))

    mode = fit.interpolation
    # constant pieces outside the design range
    if lo < xs[0]:
        add(lo, 0, 0, 0.0)
        add(min(hi, xs[0]), 0, 0, 0.0)
    if hi > xs[-1]:
        add(max(lo, xs[-1]), m - 1, m - 1, 0.0)
        add(hi, m - 1, m - 1, 0.0)
    inside = np.flatnonzero((xs >= lo) & (xs <= hi))
    for j in inside:
        add(xs[j], j, j, 0.0)
    for j in range(m - 1):
        p, q = max(xs[j], lo), min(xs[j + 1], hi)
        if p > q:
            continue
        if mode == "step_right":
            add(p, j, j, 0.0)
            add(q, j, j, 0.0)
        elif mode == "step_left":
            add(p, j + 1, j + 1, 0.0)
            add(q, j + 1, j + 1, 0.0)
        else:
            span = xs[j + 1] - xs[j]
            for x in np.linspace(p, q, refine + 1):
                add(x, j, j + 1, (x - xs[j]) / span)
    arr = np.array(out, dtype=float)
    return arr[:, 0], arr[:, 1].astype(np.int64), arr[:, 2].astype(np.int64), arr[:, 3]


def _y_points(fit: CdfFamilyFit, J):
    lo, hi = (-np.inf, np.inf) if J is None else map(float, J)
    th = fit.thresholds
    inner = th[(th > lo) & (th < hi)]
    return np.concatenate(([lo], inner, [hi]))


def _sup_over_y(fit, family, px, j0, j1, t, J, chunk_cells=4_000_000) -> np.ndarray:
    """Exact sup over y in J of |fit - truth| for each evaluation pair.

    Between consecutive points of P (thresholds in J plus the ends of J) the
    fit is constant and the truth continuous and increasing, so the sup on
    each cell is attained at its ends. A truth with jumps must jump only at
    fit thresholds and provide ``cdf_left(x, y)``, its left limit in y.
    """
    left = getattr(family, "cdf_left", None)
    P = _y_points(fit, J)
    cols = fit.threshold_index(P)
    rows_needed, inv = np.unique(np.concatenate((j0, j1)), return_inverse=True)
    r0, r1 = inv[: len(j0)], inv[len(j0) :]
    ux, ix = np.unique(px, return_inverse=True)
    # few rows (single point queries): decompress them whole
    full = fit.rows(rows_needed) if len(rows_needed) <= 64 else None
    best = np.zeros(len(px))
    step = max(2, chunk_cells // max(len(px), 1))
    for start in range(0, len(P) - 1, step):
        stop = min(start + step + 1, len(P))
        c = cols[start:stop]
        valid = c >= 0
        V = np.zeros((len(rows_needed), stop - start))
        if valid.any():
            if full is not None:
                V[:, valid] = full[:, c[valid]]
            else:
                k0, k1 = int(c[valid].min()), int(c[valid].max()) + 1
                V[:, valid] = fit.columns(k0, k1)[rows_needed][:, c[valid] - k0]
        T = family.cdf(ux[:, None], P[None, start:stop])
        TL = left(ux[:, None], P[None, start:stop]) if left is not None else T
        _kernels.cell_sup_error(V, r0, r1, t, T, TL, ix, best)
    return best


def sup_error_cdf(
    fit: CdfFamilyFit, truth, schedule: RateSchedule, J=None, x_refine: int = 10
) -> float:
    """sup over x in I_n and y in J of |F^_x(y) - F_x(y)|.

    Exact in y for continuous truths, and exact in x for step interpolation
    and truths monotone in x; linear interpolation is checked on a grid with
    ``x_refine`` cells per design gap.
    """
    lo, hi = schedule.I_n
    px, j0, j1, t = _pieces(fit, lo, hi, x_refine)
    return float(_sup_over_y(fit, truth, px, j0, j1, t, J).max())


def _beta_grid(lo: float, hi: float, size: int) -> np.ndarray:
    return np.linspace(lo, hi, size + 2)[1:-1]


def _design_quantiles(fit, betas, rows, estimator):
    if estimator == "lower":
        return plugin_quantile_matrix(fit, betas, rows)
    if estimator == "upper":
        return plugin_quantile_matrix(fit, betas, rows, strict=True)
    lower = plugin_quantile_matrix(fit, betas)
    upper = plugin_quantile_matrix(fit, betas, strict=True)
    out = np.empty((fit.m, len(betas)))
    for i, beta in enumerate(betas):
        band = QuantileBand(float(beta), lower[:, i], upper[:, i], fit.groups)
        out[:, i] = smooth_band_curve(band).knots
    return out[rows]


def sup_error_quantile(
    fit: CdfFamilyFit,
    truth,
    schedule: RateSchedule,
    estimator: str = "lower",
    beta_grid_size: int = 101,
) -> float:
    """sup over x in I_n and beta in B_n of |Q^_x(beta) - Q_x(beta)|.

    Q^ is the plug-in estimator chosen by ``estimator`` (lower / upper band
    or the smooth curve). beta runs over an interior grid of B_n. In step
    modes the sup over x is exact for truths monotone in x; in linear mode
    only design points are used, and the error in a gap is then bounded by
    the errors at its ends plus the rise of the truth across it.
    """
    lo, hi = schedule.I_n
    betas = _beta_grid(*schedule.B_n, beta_grid_size)
    if fit.interpolation == "linear":
        rows = np.flatnonzero((fit.xs >= lo) & (fit.xs <= hi))
        px, j0 = fit.xs[rows], rows
    else:
        px, j0, _, _ = _pieces(fit, lo, hi)
    rows = np.unique(j0)
    Q = _design_quantiles(fit, betas, rows, estimator)[np.searchsorted(rows, j0)]
    T = truth.quantile(px[:, None], betas[None, :])
    return float(np.max(np.abs(Q - T)))


def _row_at(fit: CdfFamilyFit, x: float) -> np.ndarray:
    j0, j1, t = fit.interp_weights(x)
    rows = fit.rows([j0, j1])
    return (1.0 - t) * rows[0] + t * rows[1]


def pointwise_errors(
    fit: CdfFamilyFit,
    truth,
    x_o: float,
    schedule: RateSchedule,
    J=None,
    estimator: str = "lower",
    beta_grid_size: int = 101,
) -> tuple[float, float]:
    """(sup_y |F^_{x_o} - F_{x_o}|, sup_{beta in B_n} |Q^_{x_o} - Q_{x_o}|).

    The quantile error is NaN when B_n is empty.
    """
    a, b = schedule.interval
    if not a < x_o < b:
        raise ValueError("x_o must be interior to the interval")
    j0, j1, t = fit.interp_weights(x_o)
    e_cdf = _sup_over_y(
        fit, truth, np.array([x_o]), np.array([j0]), np.array([j1]), np.array([t]), J
    )[0]
    if not schedule.has_B_n:
        return float(e_cdf), float("nan")
    betas = _beta_grid(*schedule.B_n, beta_grid_size)
    if t == 0.0 and estimator != "smooth":
        q = _design_quantiles(fit, betas, np.array([j0]), estimator)[0]
    elif estimator == "smooth":
        knots = _design_quantiles(fit, betas, np.arange(fit.m), "smooth")
        q = np.array([np.interp(x_o, fit.xs, knots[:, i]) for i in range(len(betas))])
    else:
        row = _row_at(fit, x_o)
        side = "right" if estimator == "upper" else "left"
        q = fit.thresholds[np.searchsorted(row, betas, side=side)]
    e_q = float(np.max(np.abs(q - truth.quantile(x_o, betas))))
    return float(e_cdf), e_q


# --- M_n and the proof chain --------------------------------------------------


def m_statistic(groups: DesignGroups, truth, grid_size: int | None = None) -> float:
    """M_n = max_{r<=s} w_rs^{1/2} sup_y |pooled ECDF_rs - pooled truth_rs|.

    With ``grid_size=None`` the sup runs over all distinct responses and the
    result is exact (cost O(m^2 n)). Otherwise y is restricted to
    ``grid_size`` order statistics with one-cell slack added, which gives an
    upper bound at cost O(m^2 grid_size).
    """
    ys = np.unique(groups.y_flat)
    exact = grid_size is None or grid_size >= len(ys)
    if exact:
        grid = ys
    else:
        pick = np.unique(np.linspace(0, len(ys) - 1, grid_size).round().astype(int))
        grid = ys[pick]
    m, G = groups.m, len(grid)
    pos = np.searchsorted(grid, groups.y_flat, side="left")
    counts = np.zeros((m, G))
    np.add.at(counts, (groups.group_index, pos), 1.0)
    cum_counts = np.zeros((m + 1, G))
    cum_counts[1:] = np.cumsum(np.cumsum(counts, axis=1), axis=0)
    truth_vals = groups.weights[:, None] * truth.cdf(groups.xs[:, None], grid[None, :])
    cum_truth = np.zeros((m + 1, G))
    cum_truth[1:] = np.cumsum(truth_vals, axis=0)
    return float(_kernels.pair_sup_stat(cum_counts, cum_truth, exact))


def proof_chain_bound(schedule: RateSchedule, M_n: float, C1: float, C2: float) -> float:
    """(C2 n delta_n)^{-1/2} M_n + C1 delta_n^alpha."""
    d = schedule.delta
    return (C2 * schedule.n * d) ** -0.5 * M_n + C1 * d**schedule.alpha


def design_frequency_ratio(x, interval, delta: float, n: int | None = None) -> float:
    """inf of w_n(K) / (n |K|) over intervals K in ``interval`` of length in
    [delta, 2 delta].

    Longer intervals split into such pieces, so this is the infimum over all
    lengths >= delta. Starts are scanned exactly at every data point (and
    the left end) for the lengths delta, 1.25, 1.5, 1.75 and 2 times delta.
    """
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x) if n is None else n
    a, b = interval
    best = np.inf
    for factor in (1.0, 1.25, 1.5, 1.75, 2.0):
        L = factor * delta
        if L > b - a:
            break
        # count on [u, u + L] is smallest just after a point leaves the window
        starts = np.concatenate(([a], np.nextafter(x, np.inf), [b - L]))
        starts = starts[(starts >= a) & (starts <= b - L)]
        counts = np.searchsorted(x, starts + L, side="right") - np.searchsorted(
            x, starts, side="left"
        )
        best = min(best, counts.min() / (n * L))
    return float(best)


# --- studies ----------------------------------------------------------------


def run_trial(config: SimConfig, n: int, rep: int = 0) -> TrialResult:
    """One trial. Quantile errors are NaN when n is too small for B_n."""
    groups, truth = generate_trial(config, n, rep)
    fit = fit_cdf_family(groups, config.interpolation)
    uni = RateSchedule.from_config(config, n)
    pt = RateSchedule.from_config(config, n, pointwise=True)
    e_cdf = sup_error_cdf(fit, truth, uni)
    e_q = float("nan")
    if uni.has_B_n:
        e_q = sup_error_quantile(fit, truth, uni, config.quantile_estimator, config.beta_grid_size)
    p_cdf, p_q = pointwise_errors(
        fit, truth, config.x_o, pt, estimator=config.quantile_estimator,
        beta_grid_size=config.beta_grid_size,
    )
    M = m_statistic(groups, truth, config.m_stat_grid) if config.m_stat else float("nan")
    return TrialResult(n, rep, e_cdf, e_q, p_cdf, p_q, M)


def run_study(config: SimConfig, n_grid: Iterable[int]) -> list[TrialResult]:
    """All (n, rep) trials. Each trial owns its RNG stream, so the result
    does not depend on execution order."""
    return [run_trial(config, int(n), rep) for n in n_grid for rep in range(config.reps)]


@dataclass(frozen=True)
class RateSummary:
    which: str
    n_values: list[int]
    mean_errors: list[float]
    scaled_errors: list[float]
    slope: float
    max_scaled: float
    min_scaled: float

    @property
    def scaled_ratio(self) -> float:
        return self.max_scaled / self.min_scaled


def rate_fit(
    results: Sequence[TrialResult],
    which: str,
    rate_fn: Callable[[int], float],
    min_reps: int = 1,
) -> RateSummary:
    """Log-log slope of mean error against n, and error / rate_fn(n) extremes."""
    if which not in {f.name for f in fields(TrialResult)}:
        raise ValueError(f"unknown error field {which!r}")
    by_n: dict[int, list[float]] = {}
    for r in results:
        by_n.setdefault(r.n, []).append(getattr(r, which))
    ns = sorted(by_n)
    if len(ns) < 4 or any(len(by_n[n]) < min_reps for n in ns):
        raise ValueError("need at least 4 distinct n with enough reps each")
    means = np.array([np.mean(by_n[n]) for n in ns])
    slope = float(np.polyfit(np.log(ns), np.log(means), 1)[0])
    scaled = means / np.array([rate_fn(n) for n in ns])
    return RateSummary(
        which, ns, means.tolist(), scaled.tolist(), slope,
        float(scaled.max()), float(scaled.min()),
    )


def standard_rate_summaries(config: SimConfig, results) -> list[RateSummary]:
    """Rate fits of all four errors, scaled by their target rates."""

    def uniform_rate(n):
        return RateSchedule.from_config(config, n).rate

    def point_rate(n):
        return RateSchedule.from_config(config, n, pointwise=True).rate

    return [
        rate_fit(results, "sup_err_cdf", uniform_rate),
        rate_fit(results, "sup_err_quantile", uniform_rate),
        rate_fit(results, "pointwise_err_cdf", point_rate),
        rate_fit(results, "pointwise_err_quantile", point_rate),
    ]


def trials_to_csv(results: Sequence[TrialResult]) -> str:
    """One row per (n, rep); floats in round-trip form."""
    buf = io.StringIO()
    names = [f.name for f in fields(TrialResult)]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in results:
        w.writerow([repr(v) if isinstance(v, float) else v for v in astuple(r)])
    return buf.getvalue()


def summary_to_json(summaries: Sequence[RateSummary]) -> str:
    return json.dumps(
        {
            s.which: {
                "n_values": s.n_values,
                "mean_errors": s.mean_errors,
                "slope": s.slope,
                "max_scaled": s.max_scaled,
                "scaled_errors": s.scaled_errors,
            }
            for s in summaries
        },
        indent=2,
    )
