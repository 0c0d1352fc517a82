"""Least squares estimation of a stochastically ordered family of CDFs.

For every threshold y the vector (F_{x_1}(y), ..., F_{x_m}(y)) is estimated by
the antitonic weighted least squares fit of the group-wise empirical CDF
values. Only distinct responses matter as thresholds: in between, the fit is
constant.

The m x ell value matrix is kept column-compressed (the PAVA blocks of every
column), which is what makes fits with m and ell in the tens of thousands
feasible. ``CdfFamilyFit.values`` materializes the dense matrix on demand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .order_core import DesignGroups

__all__ = [
    "INTERPOLATIONS",
    "CdfFamilyFit",
    "fit_cdf_family",
    "evaluate_cdf",
    "minmax_verify",
    "minmax_verify_maxmin",
    "fit_to_json",
    "fit_from_json",
]

#: step_left is left-continuous in x (x in (x_{j-1}, x_j] uses row j, the
#: larger CDF); step_right is right-continuous (x in [x_j, x_{j+1}) uses row j).
INTERPOLATIONS = ("linear", "step_left", "step_right")


@dataclass(frozen=True, eq=False)
class CdfFamilyFit:
    """Fitted CDF family on design points x_1 < ... < x_m.

    Attributes:
        groups: the data the fit came from.
        thresholds: distinct responses y_1 < ... < y_ell.
        col_ptr, block_end, block_val: blocks of column k are
            ``block_end[col_ptr[k]:col_ptr[k+1]]`` (last row of each block,
            ascending) with fitted values ``block_val[...]``.
        interpolation: how to extend the fit to covariates between design
            points; one of ``INTERPOLATIONS``.
    """

    groups: DesignGroups
    thresholds: np.ndarray
    col_ptr: np.ndarray = field(repr=False)
    block_end: np.ndarray = field(repr=False)
    block_val: np.ndarray = field(repr=False)
    interpolation: str = "linear"

    def __post_init__(self):
        if self.interpolation not in INTERPOLATIONS:
            raise ValueError(f"interpolation must be one of {INTERPOLATIONS}")

    @property
    def m(self) -> int:
        return self.groups.m

    @property
    def ell(self) -> int:
        return len(self.thresholds)

    @property
    def xs(self) -> np.ndarray:
        return self.groups.xs

    @cached_property
    def values(self) -> np.ndarray:
        """Dense (m, ell) matrix of fitted values F_{x_j}(y_k)."""
        out = self.columns(0, self.ell)
        out.setflags(write=False)
        return out

    def columns(self, k0: int, k1: int) -> np.ndarray:
        """Dense block of columns k0..k1-1."""
        return _kernels.dense_columns(
            self.col_ptr, self.block_end, self.block_val, self.m, k0, k1
        )

    def rows(self, rows) -> np.ndarray:
        rows = np.atleast_1d(np.asarray(rows, dtype=np.int64))
        return _kernels.dense_rows(self.col_ptr, self.block_end, self.block_val, rows)

    def with_interpolation(self, interpolation: str) -> "CdfFamilyFit":
        return CdfFamilyFit(
            self.groups,
            self.thresholds,
            self.col_ptr,
            self.block_end,
            self.block_val,
            interpolation,
        )

    def interp_weights(self, x: float) -> tuple[int, int, float]:
        """Rows (j0, j1) and weight t so the fit at x is (1-t) row j0 + t row j1."""
        if np.isnan(x):
            raise ValueError("x is NaN")
        xs = self.xs
        if x <= xs[0]:
            return 0, 0, 0.0
        if x >= xs[-1]:
            return self.m - 1, self.m - 1, 0.0
        j1 = int(np.searchsorted(xs, x, side="left"))
        if xs[j1] == x:
            return j1, j1, 0.0
        j0 = j1 - 1
        if self.interpolation == "step_left":
            return j1, j1, 0.0
        if self.interpolation == "step_right":
            return j0, j0, 0.0
        return j0, j1, float((x - xs[j0]) / (xs[j1] - xs[j0]))

    def threshold_index(self, y):
        """Column holding the fit at y; -1 when y is below every threshold."""
        return np.searchsorted(self.thresholds, y, side="right") - 1


def fit_cdf_family(groups: DesignGroups, interpolation: str = "linear") -> CdfFamilyFit:
    """Antitonic least squares fit of all threshold columns.

    Cost is one sort plus one linear PAVA pass per distinct response.
    """
    order = np.argsort(groups.y_flat, kind="stable")
    y_sorted = groups.y_flat[order]
    group_of = groups.group_index[order].astype(np.int64)
    # positions where the next sorted response is strictly larger
    last = np.flatnonzero(np.append(y_sorted[1:] != y_sorted[:-1], True))
    thresholds = y_sorted[last].copy()
    stop = (last + 1).astype(np.int64)
    col_ptr, block_end, block_val = _kernels.fit_cdf_columns(
        group_of, np.asarray(groups.weights, dtype=np.int64), stop
    )
    for a in (thresholds, col_ptr, block_end, block_val):
        a.setflags(write=False)
    return CdfFamilyFit(groups, thresholds, col_ptr, block_end, block_val, interpolation)


def evaluate_cdf(fit: CdfFamilyFit, x: float, y):
    """Fitted F_x(y); ``y`` may be a scalar or an array.

    Left of x_1 the first row is used, right of x_m the last; between design
    points the fit's interpolation mode applies. Between thresholds the value
    of the largest threshold <= y is used, and 0 below all of them.
    """
    x = float(x)
    y_arr = np.asarray(y, dtype=float)
    if np.isnan(x) or np.any(np.isnan(y_arr)):
        raise ValueError("NaN input")
    j0, j1, t = fit.interp_weights(x)
    k = np.atleast_1d(fit.threshold_index(y_arr))
    out = np.zeros(k.shape)
    valid = k >= 0
    for pos in np.flatnonzero(valid):
        kk = int(k[pos])
        v0 = _kernels.column_value(fit.col_ptr, fit.block_end, fit.block_val, kk, j0)
        if t:
            v1 = _kernels.column_value(fit.col_ptr, fit.block_end, fit.block_val, kk, j1)
            v0 = (1.0 - t) * v0 + t * v1
        out[pos] = v0
    out = out.reshape(y_arr.shape)
    return out if out.ndim else float(out)


def minmax_verify(fit: CdfFamilyFit, j: int, k: int) -> float:
    """min_{r<=j} max_{s>=j} of the pooled empirical CDFs at threshold k.

    Evaluated directly from counts, independently of the PAVA fit.
    """
    g = fit.groups
    if not (0 <= j < g.m and 0 <= k < fit.ell):
        raise IndexError("index out of range")
    y = fit.thresholds[k]
    cnt = np.array([np.searchsorted(r, y, side="right") for r in g.responses])
    cc = np.concatenate(([0], np.cumsum(cnt)))
    cw = np.concatenate(([0], np.cumsum(g.weights)))
    best = np.inf
    for r in range(j + 1):
        s = np.arange(j, g.m)
        pooled = (cc[s + 1] - cc[r]) / (cw[s + 1] - cw[r])
        best = min(best, pooled.max())
    return float(best)


def minmax_verify_maxmin(fit: CdfFamilyFit, j: int, k: int) -> float:
    """The same quantity in the max_{s>=j} min_{r<=j} order."""
    g = fit.groups
    y = fit.thresholds[k]
    cnt = np.array([np.searchsorted(r, y, side="right") for r in g.responses])
    cc = np.concatenate(([0], np.cumsum(cnt)))
    cw = np.concatenate(([0], np.cumsum(g.weights)))
    best = -np.inf
    r = np.arange(j + 1)
    for s in range(j, g.m):
        pooled = (cc[s + 1] - cc[r]) / (cw[s + 1] - cw[r])
        best = max(best, pooled.min())
    return float(best)


def fit_to_json(fit: CdfFamilyFit) -> str:
    """Serialize as {xs, weights, thresholds, values (row-major), interpolation}.

    Floats are written with ``repr``, which round-trips exactly.

    The raw responses are included too so a fit can be reloaded into a full
    ``CdfFamilyFit``.
    """
    g = fit.groups
    doc = {
        "xs": [float(v) for v in g.xs],
        "weights": [int(w) for w in g.weights],
        "thresholds": [float(v) for v in fit.thresholds],
        "values": [float(v) for v in fit.values.ravel()],
        "interpolation": fit.interpolation,
        "responses": [[float(v) for v in r] for r in g.responses],
    }
    return json.dumps(doc)


def fit_from_json(text: str) -> CdfFamilyFit:
    doc = json.loads(text)
    xs = np.asarray(doc["xs"], dtype=float)
    weights = np.asarray(doc["weights"], dtype=np.int64)
    if "responses" not in doc:
        raise ValueError("fit JSON lacks 'responses'; refit from raw data")
    x = np.repeat(xs, weights)
    y = np.concatenate([np.asarray(r, dtype=float) for r in doc["responses"]])
    fit = fit_cdf_family(DesignGroups.from_arrays(x, y), doc.get("interpolation", "linear"))
    stored = np.asarray(doc["values"], dtype=float).reshape(fit.m, fit.ell)
    if not np.array_equal(stored, fit.values):
        raise ValueError("stored values do not match a refit of the stored data")
    return fit
