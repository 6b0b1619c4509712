"""Wasserstein geometry over quantile grids: distances and Frechet statistics.

For one-dimensional distributions the 2-Wasserstein distance is the L2
distance between quantile functions, so on a common midpoint grid every
operation reduces to plain vectorized arithmetic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .distribution import QuantileGrid


@dataclass(frozen=True)
class FrechetSummary:
    """Frechet mean grid, total variance, and pointwise sd curve of a cohort."""

    mean: QuantileGrid
    variance: float
    pointwise_sd: np.ndarray
    total_weight: float = 1.0


def _stack(grids) -> np.ndarray:
    """Stack a nonempty list of same-size grids into an (n, m) matrix."""
    if len(grids) == 0:
        raise ValueError("empty grid list")
    m = grids[0].m
    if any(g.m != m for g in grids):
        raise ValueError("grid mismatch")
    return np.stack([g.values for g in grids])


def _normalized_weights(weights, n: int) -> np.ndarray:
    if weights is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ValueError("weights must match the number of grids")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    return w / w.sum()


def wasserstein2(a: QuantileGrid, b: QuantileGrid) -> float:
    """2-Wasserstein distance: root mean square gap between quantile values."""
    if a.m != b.m:
        raise ValueError("grid mismatch")
    diff = a.values - b.values
    return float(np.sqrt(np.mean(diff * diff)))


def pairwise_wasserstein(grids) -> np.ndarray:
    """Symmetric matrix of pairwise distances, computed in fixed index order."""
    values = _stack(grids)
    m = values.shape[1]
    sq = ((values[:, None, :] - values[None, :, :]) ** 2).sum(axis=2) / m
    return np.sqrt(sq)


def frechet_mean(grids, weights=None) -> QuantileGrid:
    """Pointwise (weighted) average of quantile functions.

    A convex combination of nondecreasing functions is nondecreasing, so the
    result is always a valid quantile grid.
    """
    values = _stack(grids)
    w = _normalized_weights(weights, values.shape[0])
    return QuantileGrid(values=w @ values)


def frechet_variance(grids, mean: QuantileGrid, weights=None) -> float:
    """Dispersion around the Frechet mean in squared Wasserstein distance.

    Unweighted cohorts use the small-sample 1/(n-1) divisor; weighted cohorts
    average the squared distances with normalized weights.
    """
    values = _stack(grids)
    n = values.shape[0]
    if mean.m != values.shape[1]:
        raise ValueError("grid mismatch")
    sq_dist = np.mean((values - mean.values) ** 2, axis=1)
    if weights is None:
        if n < 2:
            raise ValueError("variance undefined")
        return float(sq_dist.sum() / (n - 1))
    w = _normalized_weights(weights, n)
    return float(w @ sq_dist)


def pointwise_sd_curve(grids, mean: QuantileGrid, weights=None) -> np.ndarray:
    """Per-grid-point (weighted) standard deviation of quantile values.

    The midpoint-rule integral of the squared curve over t equals the Frechet
    variance computed with the same divisor.
    """
    values = _stack(grids)
    n = values.shape[0]
    if mean.m != values.shape[1]:
        raise ValueError("grid mismatch")
    sq = (values - mean.values) ** 2
    if weights is None:
        if n < 2:
            raise ValueError("variance undefined")
        return np.sqrt(sq.sum(axis=0) / (n - 1))
    w = _normalized_weights(weights, n)
    return np.sqrt(w @ sq)


def frechet_objective(grids, candidate: QuantileGrid, weights=None) -> float:
    """Weighted sum of squared distances to a candidate grid (the functional
    the Frechet mean minimizes)."""
    values = _stack(grids)
    if candidate.m != values.shape[1]:
        raise ValueError("grid mismatch")
    w = _normalized_weights(weights, values.shape[0])
    sq_dist = np.mean((values - candidate.values) ** 2, axis=1)
    return float(w @ sq_dist)


def summarize(grids, weights=None) -> FrechetSummary:
    """Frechet mean, variance, and pointwise sd of a cohort in one pass.

    Single-grid cohorts get zero variance rather than the undefined n-1
    divisor; that case only arises for degenerate groups, which callers
    already warn about.
    """
    mean = frechet_mean(grids, weights)
    if weights is None and len(grids) < 2:
        m = mean.m
        variance, sd = 0.0, np.zeros(m)
        warnings.warn("single-grid cohort; variance set to 0", stacklevel=2)
    else:
        variance = frechet_variance(grids, mean, weights)
        sd = pointwise_sd_curve(grids, mean, weights)
    total = float(len(grids)) if weights is None else float(np.sum(weights))
    return FrechetSummary(mean=mean, variance=variance, pointwise_sd=sd, total_weight=total)
