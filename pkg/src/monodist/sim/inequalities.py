"""Monte Carlo checks of the exponential tail inequalities.

* ``dkw_mc``: P(sqrt(k) ||F^_k - F_bar|| >= eta) for independent, not
  necessarily identically distributed Y_1..Y_k with F_bar the mean CDF.
* ``lln_exp_mc``: P(max_{n_o <= n <= N_max} |S_n / n| >= eta) for sums of
  bounded centred increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

__all__ = [
    "TailEstimate",
    "DKW_CONSTANT",
    "dkw_bound",
    "classical_dkw_bound",
    "dkw_mc",
    "heterogeneous_uniforms",
    "hoeffding_c",
    "maximal_constant",
    "lln_bound",
    "lln_exp_mc",
    "single_n_tail",
]

#: constant of the heterogeneous DKW bound
DKW_CONSTANT = 2**2.5 * math.e


@dataclass(frozen=True)
class TailEstimate:
    """Exceedance frequencies with binomial standard errors."""

    eta: np.ndarray
    freq: np.ndarray
    reps: int

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(self.freq * (1 - self.freq) / self.reps)


def dkw_bound(eta, constant: float = DKW_CONSTANT):
    return constant * np.exp(-2.0 * np.asarray(eta, dtype=float) ** 2)


def classical_dkw_bound(eta):
    return dkw_bound(eta, 2.0)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def heterogeneous_uniforms(k: int):
    """F_i = Uniform(0, 1 + i/k), i = 1..k, and their exact mean CDF.

    The mean CDF is piecewise linear with kinks at 0 and the right ends, so
    linear interpolation between those knots is exact.
    """
    ends = 1.0 + np.arange(1, k + 1) / k
    dists = [stats.uniform(0.0, b) for b in ends]
    knots = np.concatenate(([0.0], ends))
    at_knots = np.clip(knots[:, None] / ends[None, :], 0.0, 1.0).mean(axis=1)

    def mean_cdf(y):
        return np.interp(y, knots, at_knots, left=0.0, right=1.0)

    return dists, mean_cdf


def dkw_mc(
    k: int,
    distributions: Sequence,
    eta_grid,
    reps: int,
    seed: int = 0,
    mean_cdf: Callable | None = None,
    batch: int = 10_000,
) -> TailEstimate:
    """Exceedance frequencies of sqrt(k) ||F^_k - F_bar||_inf.

    ``distributions`` holds k frozen scipy distributions (anything with
    ``rvs(size=, random_state=)`` and ``cdf``). The mean CDF must be
    continuous; then the sup distance of each sample is exactly
    max_i max(i/k - F_bar(Y_(i)), F_bar(Y_(i)) - (i-1)/k).
    """
    if k < 1 or reps < 1:
        raise ValueError("k and reps must be positive")
    if len(distributions) != k:
        raise ValueError("need exactly k distributions")
    if mean_cdf is None:
        def mean_cdf(y):
            return np.mean([d.cdf(y) for d in distributions], axis=0)
    eta = np.atleast_1d(np.asarray(eta_grid, dtype=float))
    rng = _rng(seed)
    hits = np.zeros(len(eta), dtype=np.int64)
    i = np.arange(1, k + 1)
    done = 0
    while done < reps:
        b = min(batch, reps - done)
        Y = np.empty((b, k))
        for col, d in enumerate(distributions):
            Y[:, col] = d.rvs(size=b, random_state=rng)
        Fb = mean_cdf(np.sort(Y, axis=1))
        D = np.maximum((i / k - Fb).max(axis=1), (Fb - (i - 1) / k).max(axis=1))
        stat = math.sqrt(k) * D
        hits += (stat[:, None] >= eta[None, :]).sum(axis=0)
        done += b
    return TailEstimate(eta, hits / reps, reps)


def hoeffding_c(scale: float) -> float:
    """c with P(|S_b - S_a| >= t) <= 2 exp(-c t^2 / (b - a)) for increments
    in [-scale, scale]."""
    return 1.0 / (2.0 * scale**2)


def maximal_constant(c: float, c_prime: float, C: float) -> float:
    """C' of the maximal inequality P(sup_{n>=n_o} |S_n/n| >= eta) <=
    C' exp(-c' n_o eta^2), given the single-increment bound
    P(|S_b - S_a| >= t) <= C exp(-c t^2 / (b - a)) and c' < c.
    """
    if not 0 < c_prime < c:
        raise ValueError("need 0 < c' < c")
    r = c / c_prime
    beta = (r + 1.0) ** 2 / (4.0 * r)
    p_o = min(1.0 / math.log(beta), math.log(4.0 * C))
    return 2.0 * C * (1.0 + 1.0 / (p_o * math.log(beta)))


def lln_bound(n_o: int, eta, c_prime: float, C_prime: float):
    return C_prime * np.exp(-c_prime * n_o * np.asarray(eta, dtype=float) ** 2)


def lln_exp_mc(
    n_o: int,
    eta_grid,
    reps: int,
    seed: int = 0,
    n_max: int = 5000,
    scale: float = 0.5,
    batch: int = 1000,
) -> TailEstimate:
    """Exceedance frequencies of max_{n_o <= n <= n_max} |S_n / n|.

    Increments are +-scale with equal probability. The sup is truncated at
    ``n_max``, so the frequencies estimate a lower bound of the untruncated
    probability.
    """
    if not 1 <= n_o <= n_max:
        raise ValueError("need 1 <= n_o <= n_max")
    eta = np.atleast_1d(np.asarray(eta_grid, dtype=float))
    rng = _rng(seed)
    n = np.arange(n_o, n_max + 1)
    hits = np.zeros(len(eta), dtype=np.int64)
    done = 0
    while done < reps:
        b = min(batch, reps - done)
        steps = rng.integers(0, 2, size=(b, n_max), dtype=np.int8) * 2 - 1
        S = np.cumsum(steps, axis=1, dtype=np.int32)[:, n_o - 1 :]
        sup = scale * (np.abs(S) / n).max(axis=1)
        hits += (sup[:, None] >= eta[None, :]).sum(axis=0)
        done += b
    return TailEstimate(eta, hits / reps, reps)


def single_n_tail(n: int, eta, scale: float = 0.5) -> np.ndarray:
    """Exact P(|S_n / n| >= eta) for +-scale increments.

    S_n = scale (2B - n) with B ~ Binomial(n, 1/2).
    """
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    b = np.arange(n + 1)
    mag = scale * np.abs(2 * b - n) / n
    pmf = stats.binom.pmf(b, n, 0.5)
    # small tolerance so ties at the boundary count as in the simulation
    return np.array([pmf[mag >= e * (1 - 1e-12)].sum() for e in eta])
