"""Isotonic regression over a totally ordered index set.

Two layers live here. ``pava_antitonic_ls`` is the weighted least squares
projection used for the CDF fit. The rest handles general losses
R_1, ..., R_m whose interval sums R_ab = R_a + ... + R_b are minimal exactly
on a compact interval [L_ab, U_ab]. A ``LossOracle`` reports those intervals,
and from them we get the smallest and largest isotonic minimizers of
sum_j R_j(q_j) plus a membership test for the whole argmin set.

All indices are 0-based and intervals ``(a, b)`` are inclusive.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .order_core import DesignGroups, _check_beta

__all__ = [
    "SolutionBand",
    "LossOracle",
    "PinballOracle",
    "SquaredOracle",
    "pava_isotonic_ls",
    "pava_antitonic_ls",
    "minmax_band",
    "check_membership",
    "pinball_losses",
    "squared_losses",
    "brute_force_minimizers",
    "brute_force_band",
    "order_stat_index",
]


class OracleInconsistencyError(RuntimeError):
    """Raised when max-min and min-max evaluations of an oracle disagree."""


@dataclass(frozen=True)
class SolutionBand:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, up = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lo.shape != up.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be 1-d of equal length")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    def is_valid(self, atol: float = 0.0) -> bool:
        return bool(
            np.all(np.diff(self.lower) >= -atol)
            and np.all(np.diff(self.upper) >= -atol)
            and np.all(self.lower <= self.upper + atol)
        )


def _validate_ls(targets, weights):
    y = np.asarray(targets, dtype=float)
    if weights is None:
        w = np.ones_like(y)
    else:
        w = np.asarray(weights, dtype=float)
    if y.ndim != 1 or y.shape != w.shape:
        raise ValueError("targets and weights must be 1-d arrays of equal length")
    if np.any(~(w > 0)):
        raise ValueError("weights must be positive")
    return y, w


def pava_isotonic_ls(targets, weights=None) -> np.ndarray:
    """Weighted least squares projection onto non-decreasing vectors."""
    y, w = _validate_ls(targets, weights)
    if len(y) == 0:
        return y.copy()
    return _kernels.pava_increasing(y, w)


def pava_antitonic_ls(targets, weights=None) -> np.ndarray:
    """Weighted least squares projection onto non-increasing vectors.

    Solved as the isotonic problem on the reversed index order.

    >>> pava_antitonic_ls([0.0, 1.0], [1.0, 1.0]).tolist()
    [0.5, 0.5]
    """
    y, w = _validate_ls(targets, weights)
    if len(y) == 0:
        return y.copy()
    return _kernels.pava_increasing(y[::-1].copy(), w[::-1].copy())[::-1].copy()


class LossOracle:
    """Reports the minimizing interval [L_ab, U_ab] of R_a + ... + R_b.

    Subclasses implement ``interval_minimizers``; ``row`` can be overridden
    when all intervals sharing a left end are cheaper to produce together.
    ``atol`` is the tolerance used when comparing oracle values.
    """

    m: int
    atol: float = 0.0

    def interval_minimizers(self, a: int, b: int) -> tuple[float, float]:
        raise NotImplementedError

    def row(self, a: int) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (L_ab, U_ab) for b = a, ..., m - 1."""
        pairs = [self.interval_minimizers(a, b) for b in range(a, self.m)]
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return arr[:, 0].copy(), arr[:, 1].copy()

    def _check_interval(self, a, b):
        if not 0 <= a <= b < self.m:
            raise IndexError(f"need 0 <= a <= b < {self.m}, got ({a}, {b})")


def order_stat_index(beta: float, w, strict: bool = False) -> np.ndarray:
    """Smallest k in 1..w with ``k / w >= beta`` (``> beta`` if strict).

    The comparison uses the rounded float ``k / w``, the same predicate used
    on fitted CDF values, so both routes to sample quantiles agree bit for bit.
    """
    w = np.asarray(w, dtype=np.int64)
    k = np.clip(np.ceil(beta * w).astype(np.int64), 1, np.maximum(w, 1))

    def ok(kk):
        v = kk / np.maximum(w, 1)
        return v > beta if strict else v >= beta

    for _ in range(4):
        down = (k > 1) & ok(k - 1)
        up = ~ok(k) & (k < w)
        if not (down.any() or up.any()):
            break
        k = k - down + up
    return k


class PinballOracle(LossOracle):
    """Check-loss oracle: L_ab, U_ab are the minimal and maximal pooled
    sample beta-quantiles of groups a..b."""

    atol = 0.0

    def __init__(self, groups: DesignGroups, beta: float):
        self.groups = groups
        self.beta = _check_beta(beta)
        self.m = groups.m
        n = groups.n
        order = np.argsort(groups.y_flat, kind="stable")
        ranks = np.empty(n, dtype=np.int64)
        ranks[order] = np.arange(n)
        self._ranks = ranks
        self._values_by_rank = groups.y_flat[order].copy()
        sizes = np.arange(n + 1)
        self._kmin = order_stat_index(self.beta, sizes)
        self._kmax = order_stat_index(self.beta, sizes, strict=True)
        self._offsets = np.asarray(groups.offsets, dtype=np.int64)

    def interval_minimizers(self, a, b):
        self._check_interval(a, b)
        g = self.groups
        pool = np.sort(g.y_flat[g.offsets[a] : g.offsets[b + 1]])
        w = len(pool)
        return float(pool[self._kmin[w] - 1]), float(pool[self._kmax[w] - 1])

    def row(self, a):
        self._check_interval(a, a)
        return _kernels.pooled_quantile_row(
            a, self._ranks, self._offsets, self._values_by_rank, self._kmin, self._kmax
        )


class SquaredOracle(LossOracle):
    """Weighted squared loss; every R_ab has the single minimizer given by
    the weighted mean of targets a..b."""

    atol = 1e-12

    def __init__(self, targets, weights=None):
        y, w = _validate_ls(targets, weights)
        self.m = len(y)
        self._cw = np.concatenate(([0.0], np.cumsum(w)))
        self._cwy = np.concatenate(([0.0], np.cumsum(w * y)))

    def interval_minimizers(self, a, b):
        self._check_interval(a, b)
        v = (self._cwy[b + 1] - self._cwy[a]) / (self._cw[b + 1] - self._cw[a])
        return v, v

    def row(self, a):
        self._check_interval(a, a)
        v = (self._cwy[a + 1 :] - self._cwy[a]) / (self._cw[a + 1 :] - self._cw[a])
        return v, v.copy()


def _minmax_tables(oracle: LossOracle):
    """Both evaluation orders of the lower and upper min-max formulas.

    Streams over the left end a so memory stays O(m):
      maxmin[j] = max_{a<=j} min_{b>=j} V_ab    (suffix minima of each row)
      minmax[j] = min_{b>=j} max_{a<=j} V_ab    (running column maxima)
    """
    m = oracle.m
    out = {}
    for name in ("L", "U"):
        out[name + "_maxmin"] = np.full(m, -np.inf)
        out[name + "_minmax"] = np.empty(m)
        out[name + "_colmax"] = np.full(m, -np.inf)
    for a in range(m):
        row_l, row_u = oracle.row(a)
        for name, row in (("L", row_l), ("U", row_u)):
            suffix_min = np.minimum.accumulate(row[::-1])[::-1]
            np.maximum(out[name + "_maxmin"][a:], suffix_min, out=out[name + "_maxmin"][a:])
            colmax = out[name + "_colmax"]
            np.maximum(colmax[a:], row, out=colmax[a:])
            out[name + "_minmax"][a] = colmax[a:].min()
    return out


def minmax_band(oracle: LossOracle) -> SolutionBand:
    """Smallest and largest isotonic minimizers of sum_j R_j(q_j).

    lower_j = max_{a<=j} min_{b>=j} L_ab and upper_j = min_{b>=j} max_{a<=j} U_ab.
    The opposite evaluation orders are computed as well and must agree; a
    mismatch means the oracle does not describe convex-type losses.

    Cost is O(m^2) oracle values; for generic oracles keep m to a few hundred.
    """
    t = _minmax_tables(oracle)
    lower, lower2 = t["L_maxmin"], t["L_minmax"]
    upper, upper2 = t["U_minmax"], t["U_maxmin"]
    tol = oracle.atol
    if np.max(np.abs(lower - lower2)) > tol or np.max(np.abs(upper - upper2)) > tol:
        raise OracleInconsistencyError("max-min and min-max evaluations disagree")
    return SolutionBand(lower, upper)


def check_membership(oracle: LossOracle, x) -> bool:
    """Whether the isotonic vector ``x`` minimizes sum_j R_j(x_j).

    Uses the characterization: for all a <= b, x_a <= U_ab whenever
    x_{a-1} < x_a, and x_b >= L_ab whenever x_b < x_{b+1}, with
    x_{-1} = -inf and x_m = +inf.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (oracle.m,):
        raise ValueError(f"x must have length {oracle.m}")
    if np.any(np.diff(x) < 0):
        return False
    tol = oracle.atol
    rises_before = np.concatenate(([True], x[1:] > x[:-1]))
    rises_after = np.concatenate((x[1:] > x[:-1], [True]))
    for a in range(oracle.m):
        row_l, row_u = oracle.row(a)
        if rises_before[a] and x[a] > row_u.min() + tol:
            return False
        seg = rises_after[a:]
        if np.any(x[a:][seg] < row_l[seg] - tol):
            return False
    return True


Loss = Callable[[np.ndarray], np.ndarray]


def pinball_losses(groups: DesignGroups, beta: float) -> list[Loss]:
    """Per-group check losses q -> sum_i rho_beta(Y_i - q)."""
    beta = _check_beta(beta)

    def make(ys):
        def loss(q):
            z = ys[None, :] - np.asarray(q, dtype=float)[:, None]
            return np.sum(np.where(z < 0, (beta - 1.0) * z, beta * z), axis=1)

        return loss

    return [make(np.asarray(r)) for r in groups.responses]


def squared_losses(targets, weights=None) -> list[Loss]:
    y, w = _validate_ls(targets, weights)
    return [
        (lambda q, c=c, v=v: v * (np.asarray(q, dtype=float) - c) ** 2)
        for c, v in zip(y, w)
    ]


def brute_force_minimizers(
    losses: Sequence[Loss], grid, max_candidates: int = 2_000_000, rtol: float = 1e-10
):
    """Enumerate every non-decreasing vector with entries in ``grid``.

    Returns ``(min_value, argmin)`` where ``argmin`` stacks all vectors whose
    total loss is within ``rtol`` (relative) of the minimum.
    """
    m = len(losses)
    if m > 8:
        raise ValueError("brute force is limited to m <= 8")
    grid = np.unique(np.asarray(grid, dtype=float))
    G = len(grid)
    count = math.comb(G + m - 1, m)
    if count > max_candidates:
        raise ValueError(f"grid too large: {count} candidates exceed {max_candidates}")
    table = np.stack([np.asarray(R(grid), dtype=float) for R in losses])  # (m, G)
    idx = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations_with_replacement(range(G), m)),
        dtype=np.int64,
        count=count * m,
    ).reshape(count, m)
    totals = table[np.arange(m), idx].sum(axis=1)
    best = totals.min()
    keep = totals <= best + rtol * max(abs(best), 1.0)
    return float(best), grid[idx[keep]]


def brute_force_band(
    losses: Sequence[Loss], grid, max_candidates: int = 2_000_000, rtol: float = 1e-10
) -> SolutionBand:
    """Componentwise min and max of the grid argmin set (test oracle)."""
    _, argmin = brute_force_minimizers(losses, grid, max_candidates, rtol)
    return SolutionBand(argmin.min(axis=0), argmin.max(axis=0))
