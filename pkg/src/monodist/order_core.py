"""Grouped observations, empirical step CDFs and their quantiles."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Observation",
    "DesignGroups",
    "StepCDF",
    "group_by_design",
    "empirical_cdf",
    "pooled_cdf",
    "step_quantile",
]


class Observation(NamedTuple):
    x: float
    y: float


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DesignGroups:
    """Observations grouped by distinct covariate value.

    Covariates are grouped by exact floating point equality; round them
    beforehand if near-equal values should share a group.

    Attributes:
        xs: strictly increasing distinct covariates, shape (m,).
        weights: group sizes w_j, shape (m,).
        y_flat: responses sorted by group, then ascending within the group.
        offsets: group j occupies y_flat[offsets[j]:offsets[j + 1]].
    """

    xs: np.ndarray
    weights: np.ndarray
    y_flat: np.ndarray
    offsets: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.xs.ndim != 1 or len(self.xs) == 0:
            raise ValueError("no observations")
        if np.any(np.diff(self.xs) <= 0):
            raise ValueError("xs must be strictly increasing")
        if np.any(self.weights <= 0) or self.weights.sum() != len(self.y_flat):
            raise ValueError("weights must be positive and sum to n")

    @classmethod
    def from_arrays(cls, x: Sequence[float], y: Sequence[float]) -> "DesignGroups":
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        if x.shape != y.shape:
            raise ValueError("x and y must have the same length")
        if len(x) == 0:
            raise ValueError("no observations")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("observations must be finite")
        order = np.lexsort((y, x))
        xs, weights = np.unique(x[order], return_counts=True)
        offsets = np.concatenate(([0], np.cumsum(weights)))
        return cls(
            xs=_frozen(xs),
            weights=_frozen(weights.astype(np.int64)),
            y_flat=_frozen(y[order]),
            offsets=_frozen(offsets.astype(np.int64)),
        )

    @property
    def m(self) -> int:
        return len(self.xs)

    @property
    def n(self) -> int:
        return len(self.y_flat)

    @cached_property
    def responses(self) -> tuple[np.ndarray, ...]:
        """Per-group sorted responses."""
        return tuple(
            self.y_flat[self.offsets[j] : self.offsets[j + 1]] for j in range(self.m)
        )

    @cached_property
    def group_index(self) -> np.ndarray:
        """Group index of every entry of ``y_flat``."""
        return _frozen(np.repeat(np.arange(self.m), self.weights))

    def __len__(self) -> int:
        return self.n


def group_by_design(observations: Iterable) -> DesignGroups:
    """Group ``(x, y)`` pairs by exact covariate value.

    >>> g = group_by_design([(1, 5), (1, 3), (2, 4)])
    >>> g.xs.tolist(), g.weights.tolist(), [r.tolist() for r in g.responses]
    ([1.0, 2.0], [2, 1], [[3.0, 5.0], [4.0]])
    """
    pairs = list(observations)
    if not pairs:
        raise ValueError("no observations")
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("observations must be (x, y) pairs")
    return DesignGroups.from_arrays(arr[:, 0], arr[:, 1])


@dataclass(frozen=True, eq=False)
class StepCDF:
    """Right-continuous empirical distribution function.

    Cumulative counts are kept as integers next to the total so that values
    are always the correctly rounded fraction ``counts / total``; comparisons
    against a level beta use those floats consistently everywhere.
    """

    jump_points: np.ndarray
    counts: np.ndarray
    total: int

    def __post_init__(self):
        if len(self.jump_points) == 0:
            raise ValueError("a step CDF needs at least one jump")
        if np.any(np.diff(self.jump_points) <= 0) or np.any(np.diff(self.counts) <= 0):
            raise ValueError("jump points and counts must be strictly increasing")
        if self.counts[-1] != self.total or self.counts[0] <= 0:
            raise ValueError("counts must end at the total")

    @classmethod
    def from_sample(cls, sample: Sequence[float]) -> "StepCDF":
        s = np.sort(np.asarray(sample, dtype=float))
        if len(s) == 0:
            raise ValueError("empty sample")
        # last index of each distinct value
        last = np.flatnonzero(np.append(s[1:] != s[:-1], True))
        return cls(_frozen(s[last]), _frozen((last + 1).astype(np.int64)), len(s))

    @cached_property
    def values(self) -> np.ndarray:
        return _frozen(self.counts / self.total)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        idx = np.searchsorted(self.jump_points, y, side="right")
        vals = np.concatenate(([0.0], self.values))
        out = vals[idx]
        return out if out.ndim else float(out)

    def left_limit(self, y):
        y = np.asarray(y, dtype=float)
        idx = np.searchsorted(self.jump_points, y, side="left")
        out = np.concatenate(([0.0], self.values))[idx]
        return out if out.ndim else float(out)


def empirical_cdf(groups: DesignGroups, j: int) -> StepCDF:
    """Empirical CDF of group ``j`` (0-based)."""
    if not 0 <= j < groups.m:
        raise IndexError(f"group index {j} out of range for m={groups.m}")
    return StepCDF.from_sample(groups.responses[j])


def pooled_cdf(groups: DesignGroups, r: int, s: int) -> StepCDF:
    """Weight-averaged CDF of groups ``r..s`` inclusive (0-based).

    This is the empirical CDF of the concatenated responses of those groups.
    """
    if not (0 <= r <= s < groups.m):
        raise IndexError(f"need 0 <= r <= s < {groups.m}, got r={r}, s={s}")
    return StepCDF.from_sample(groups.y_flat[groups.offsets[r] : groups.offsets[s + 1]])


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    return beta


def step_quantile(F: StepCDF, beta: float, side: str = "minimal") -> float:
    """Minimal ``min{y: F(y) >= beta}`` or maximal ``inf{y: F(y) > beta}`` quantile."""
    beta = _check_beta(beta)
    if side == "minimal":
        k = np.searchsorted(F.values, beta, side="left")
    elif side == "maximal":
        k = np.searchsorted(F.values, beta, side="right")
    else:
        raise ValueError(f"side must be 'minimal' or 'maximal', got {side!r}")
    return float(F.jump_points[k])
