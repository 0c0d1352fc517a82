"""Quantile curves under the stochastic order constraint.

Two routes lead to the same pair of isotonic vectors (lower, upper):

* ``quantile_band``: smallest and largest minimizers of the check loss
  T_beta(q) = sum_i rho_beta(Y_i - q_{j(i)}) over non-decreasing q, via the
  min-max formulas applied to pooled sample quantiles.
* ``plugin_quantiles``: minimal and maximal beta-quantiles of the rows of a
  ``CdfFamilyFit``.

They agree exactly, which ``plugin_quantiles`` callers can rely on and which
the test suite checks on random data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .cdf_fit import CdfFamilyFit
from .isoreg import PinballOracle, minmax_band
from .order_core import DesignGroups, StepCDF, _check_beta, step_quantile

__all__ = [
    "QuantileBand",
    "PinballRisk",
    "quantile_band",
    "plugin_quantiles",
    "pinball_loss",
    "pinball_risk",
    "smooth_band_curve",
    "SmoothCurve",
    "quantile_shift_bounds",
    "quantile_lipschitz_check",
    "band_to_json",
    "band_from_json",
]


@dataclass(frozen=True, eq=False)
class QuantileBand:
    """Bounds lower <= q <= upper of the isotonic beta-quantile estimates."""

    beta: float
    lower: np.ndarray
    upper: np.ndarray
    groups: DesignGroups

    @property
    def xs(self) -> np.ndarray:
        return self.groups.xs

    def check(self) -> None:
        """Raise if the band violates its structural guarantees."""
        lo, up = self.lower, self.upper
        if np.any(np.diff(lo) < 0) or np.any(np.diff(up) < 0):
            raise AssertionError("band is not isotonic")
        if np.any(lo > up):
            raise AssertionError("lower exceeds upper")
        g = self.groups
        j = g.group_index
        inside = (g.y_flat > lo[j]) & (g.y_flat < up[j])
        if inside.any():
            raise AssertionError("an observation lies strictly inside the band")


@dataclass(frozen=True)
class PinballRisk:
    beta: float
    value: float


def quantile_band(groups: DesignGroups, beta: float) -> QuantileBand:
    """Smallest and largest isotonic minimizers of the check loss T_beta.

    lower_j = max_{r<=j} min_{s>=j} of the minimal pooled beta-quantile of
    groups r..s; upper_j uses the maximal pooled quantile in the min-max
    order. Both evaluation orders are computed and must agree.

    >>> from monodist.order_core import group_by_design
    >>> b = quantile_band(group_by_design([(0, 1), (1, 0)]), 0.5)
    >>> b.lower.tolist(), b.upper.tolist()
    ([0.0, 0.0], [1.0, 1.0])
    """
    beta = _check_beta(beta)
    band = minmax_band(PinballOracle(groups, beta))
    out = QuantileBand(beta, band.lower, band.upper, groups)
    out.check()
    return out


def plugin_quantiles(fit: CdfFamilyFit, beta: float) -> QuantileBand:
    """Row-wise minimal and maximal beta-quantiles of a fitted CDF family."""
    beta = _check_beta(beta)
    betas = np.array([beta])
    lower = np.empty(fit.m)
    upper = np.empty(fit.m)
    for j in range(fit.m):
        args = (fit.col_ptr, fit.block_end, fit.block_val, j, betas)
        lower[j] = fit.thresholds[_kernels.row_quantile_indices(*args, False)[0]]
        upper[j] = fit.thresholds[_kernels.row_quantile_indices(*args, True)[0]]
    return QuantileBand(beta, lower, upper, fit.groups)


def plugin_quantile_matrix(fit: CdfFamilyFit, betas, rows=None, strict: bool = False):
    """Quantiles of the fitted rows for many levels at once, shape (rows, betas)."""
    betas = np.asarray(betas, dtype=float)
    rows = np.arange(fit.m) if rows is None else np.asarray(rows, dtype=np.int64)
    out = np.empty((len(rows), len(betas)))
    for i, j in enumerate(rows):
        idx = _kernels.row_quantile_indices(
            fit.col_ptr, fit.block_end, fit.block_val, int(j), betas, strict
        )
        out[i] = fit.thresholds[idx]
    return out


def pinball_loss(z, beta: float):
    z = np.asarray(z, dtype=float)
    return np.where(z < 0, (beta - 1.0) * z, beta * z)


def pinball_risk(groups: DesignGroups, q, beta: float) -> PinballRisk:
    """T_beta(q): summed check loss of q_j against the responses at x_j."""
    beta = _check_beta(beta)
    q = np.asarray(q, dtype=float)
    if q.shape != (groups.m,):
        raise ValueError(f"q must have length {groups.m}")
    z = groups.y_flat - q[groups.group_index]
    return PinballRisk(beta, math.fsum(pinball_loss(z, beta)))


@dataclass(frozen=True)
class SmoothCurve:
    """Piecewise linear curve through (xs[j], knots[j])."""

    xs: np.ndarray
    knots: np.ndarray
    sweeps: int

    def __call__(self, x):
        return np.interp(x, self.xs, self.knots)

    def energy(self) -> float:
        """Integral of the squared derivative."""
        if len(self.xs) < 2:
            return 0.0
        return float(np.sum(np.diff(self.knots) ** 2 / np.diff(self.xs)))


def _stationarity_gap(q, lower, upper, h) -> float:
    """Largest violation of the KKT conditions of the box-constrained problem."""
    m = len(q)
    if m == 1:
        return 0.0
    slope = np.diff(q) / h
    grad = np.zeros(m)
    grad[:-1] -= 2 * slope
    grad[1:] += 2 * slope
    # at an active lower bound the gradient may be positive, at an upper
    # bound negative; anywhere else it must vanish
    gap = np.where(q <= lower, np.minimum(grad, 0.0), grad)
    gap = np.where(q >= upper, np.maximum(grad, 0.0), gap)
    gap = np.where((q <= lower) & (q >= upper), 0.0, gap)
    return float(np.max(np.abs(gap)))


def smooth_band_curve(
    band: QuantileBand, xs=None, tol: float = 1e-12, max_sweeps: int = 100_000,
    omega: float | None = None,
) -> SmoothCurve:
    """Least-energy piecewise linear curve threading the band.

    Minimizes sum_j (q_{j+1} - q_j)^2 / (x_{j+1} - x_j), the integral of q'^2
    for the linear interpolant, subject to lower_j <= q_j <= upper_j. Solved
    by projected coordinate updates, each one moving q_j toward the
    spacing-weighted average of its neighbours and clipping to the box.
    ``omega`` > 1 over-relaxes those moves (omega = 1 is plain cyclic
    coordinate minimization); the default picks the classical optimal factor
    for a chain of length m.
    """
    lower = np.asarray(band.lower, dtype=float)
    upper = np.asarray(band.upper, dtype=float)
    xs = np.asarray(band.xs if xs is None else xs, dtype=float)
    m = len(lower)
    if xs.shape != (m,) or upper.shape != (m,):
        raise ValueError("xs, lower and upper must have equal length")
    if np.any(lower > upper):
        raise ValueError("infeasible band: lower exceeds upper")
    if m == 1:
        return SmoothCurve(xs, np.array([0.5 * (lower[0] + upper[0])]), 0)
    h = np.diff(xs)
    if np.any(h <= 0):
        raise ValueError("xs must be strictly increasing")
    if omega is None:
        omega = 2.0 / (1.0 + math.sin(math.pi / (m + 1)))
    q0 = 0.5 * (lower + upper)
    q, sweeps = _kernels.smooth_knots(lower, upper, h, q0, float(omega), tol, max_sweeps)
    scale = (np.max(upper) - np.min(lower) + 1.0) / np.min(h)
    if _stationarity_gap(q, lower, upper, h) > 1e-10 * scale:
        # over-relaxation can stall on degenerate boxes; finish plainly
        q, more = _kernels.smooth_knots(lower, upper, h, q, 1.0, tol, max_sweeps)
        sweeps += more
    if np.any(np.diff(q) < -1e-12):
        raise RuntimeError("smooth curve solver returned a decreasing curve")
    return SmoothCurve(xs, q, int(sweeps))


def _sup_distance(F: StepCDF, G: StepCDF) -> float:
    pts = np.union1d(F.jump_points, G.jump_points)
    return float(np.max(np.abs(F(pts) - G(pts))))


def quantile_shift_bounds(F: StepCDF, G: StepCDF, beta: float, delta: float) -> bool:
    """Quantile comparison for two step CDFs within sup distance ``delta``.

    Checks G^{-1}(beta) >= F^{-1}(beta - delta) and
    G^{-1}(beta+) <= F^{-1}((beta + delta)+). Needs ||F - G|| <= delta < 1 and
    delta < beta < 1 - delta.
    """
    beta = _check_beta(beta)
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    if _sup_distance(F, G) > delta:
        raise ValueError("sup distance between F and G exceeds delta")
    if not delta < beta < 1.0 - delta:
        raise ValueError("need delta < beta < 1 - delta")
    first = step_quantile(G, beta, "minimal") >= step_quantile(F, beta - delta, "minimal")
    second = step_quantile(G, beta, "maximal") <= step_quantile(F, beta + delta, "maximal")
    return bool(first and second)


def quantile_lipschitz_check(
    quantile: Callable[[float], float],
    beta1: float,
    beta2: float,
    kappa: float,
    betas: tuple[float, float],
    rtol: float = 1e-12,
) -> bool:
    """Whether |Q(b) - Q(b')| <= |b - b'| / kappa for the pair ``betas``.

    ``quantile`` is the quantile function of a CDF whose growth on
    (beta1, beta2) is at least kappa; the caller vouches for that.
    """
    b, b2 = map(float, betas)
    if not (beta1 < b < beta2 and beta1 < b2 < beta2):
        raise ValueError("betas must lie inside (beta1, beta2)")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    lhs = abs(quantile(b) - quantile(b2))
    rhs = abs(b - b2) / kappa
    return bool(lhs <= rhs * (1 + rtol) + 1e-300)


def band_to_json(band: QuantileBand, smooth: SmoothCurve | None = None) -> dict:
    doc = {
        "beta": band.beta,
        "xs": [float(v) for v in band.xs],
        "lower": [float(v) for v in band.lower],
        "upper": [float(v) for v in band.upper],
    }
    if smooth is not None:
        doc["smooth"] = [float(v) for v in smooth.knots]
    return doc


def band_from_json(doc: dict, groups: DesignGroups) -> QuantileBand:
    if not np.array_equal(np.asarray(doc["xs"], dtype=float), groups.xs):
        raise ValueError("band xs do not match the data")
    return QuantileBand(
        float(doc["beta"]),
        np.asarray(doc["lower"], dtype=float),
        np.asarray(doc["upper"], dtype=float),
        groups,
    )
