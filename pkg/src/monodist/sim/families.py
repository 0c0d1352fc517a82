"""Conditional distribution families x -> F_x used in simulations.

A family is any object with vectorized ``cdf(x, y)``, ``quantile(x, beta)``
and ``sample(x, rng)``; ``cdf`` must accept y = +-inf. The built-ins below
also carry the constants the rate theory needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = ["GaussianShift", "UniformShift", "FittedFamily", "FAMILIES", "get_family"]


@dataclass(frozen=True)
class GaussianShift:
    """F_x(y) = Phi(y - x).

    Lipschitz in x (alpha = 1) with C1 = sup density = (2 pi)^{-1/2}; on
    (beta1, beta2) the density is at least phi(Phi^{-1}(.)) at the more
    extreme level.
    """

    name: str = "gaussian_shift"
    alpha: float = 1.0
    C1: float = 1.0 / math.sqrt(2.0 * math.pi)

    def cdf(self, x, y):
        return special.ndtr(np.asarray(y, dtype=float) - np.asarray(x, dtype=float))

    def quantile(self, x, beta):
        return np.asarray(x, dtype=float) + special.ndtri(beta)

    def sample(self, x, rng: np.random.Generator):
        x = np.asarray(x, dtype=float)
        return x + rng.standard_normal(x.shape)

    def kappa(self, beta1: float, beta2: float) -> float:
        z = np.array([special.ndtri(beta1) if beta1 > 0 else -np.inf,
                      special.ndtri(beta2) if beta2 < 1 else np.inf])
        return float(np.min(np.exp(-0.5 * z**2)) / math.sqrt(2 * math.pi))


@dataclass(frozen=True)
class UniformShift:
    """F_x = Uniform(x, x + 1); alpha = 1, C1 = 1 and kappa = 1."""

    name: str = "uniform_shift"
    alpha: float = 1.0
    C1: float = 1.0

    def cdf(self, x, y):
        return np.clip(np.asarray(y, dtype=float) - np.asarray(x, dtype=float), 0.0, 1.0)

    def quantile(self, x, beta):
        return np.asarray(x, dtype=float) + np.asarray(beta, dtype=float)

    def sample(self, x, rng: np.random.Generator):
        x = np.asarray(x, dtype=float)
        return x + rng.random(x.shape)

    def kappa(self, beta1: float, beta2: float) -> float:
        return 1.0


class FittedFamily:
    """A fitted CDF family used as a truth, mainly to test error metrics.

    Quantiles are the minimal quantiles of the interpolated rows.
    """

    def __init__(self, fit):
        self.fit = fit
        self.name = "fitted"

    def _row(self, x: float) -> np.ndarray:
        j0, j1, t = self.fit.interp_weights(x)
        r = self.fit.rows([j0, j1])
        return (1.0 - t) * r[0] + t * r[1]

    def _apply(self, x, other, fn):
        x, other = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(other, dtype=float))
        out = np.empty(x.shape)
        flat_x, flat_o, flat_out = x.ravel(), other.ravel(), out.reshape(-1)
        ux, inv = np.unique(flat_x, return_inverse=True)
        for i, v in enumerate(ux):
            sel = inv == i
            flat_out[sel] = fn(self._row(float(v)), flat_o[sel])
        return out if out.ndim else float(out)

    def _lookup(self, row, y, side):
        k = np.searchsorted(self.fit.thresholds, y, side=side) - 1
        return np.where(k >= 0, row[np.maximum(k, 0)], 0.0)

    def cdf(self, x, y):
        return self._apply(x, y, lambda row, y: self._lookup(row, y, "right"))

    def cdf_left(self, x, y):
        return self._apply(x, y, lambda row, y: self._lookup(row, y, "left"))

    def quantile(self, x, beta):
        th = self.fit.thresholds
        return self._apply(x, beta, lambda row, b: th[np.searchsorted(row, b, side="left")])


FAMILIES = {f.name: f for f in (GaussianShift(), UniformShift())}


def get_family(name: str):
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
