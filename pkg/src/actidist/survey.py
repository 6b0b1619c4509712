"""Horvitz-Thompson weighted statistics for unequal-probability samples.

Every estimator takes per-unit survey weights w_i = 1/pi_i and normalizes by
their sum, so all results are invariant to rescaling the weights by a common
positive constant.
"""

from __future__ import annotations

import numpy as np


def _check_sample(values, weights) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("empty sample")
    if weights is None:
        w = np.ones_like(v)
    else:
        w = np.asarray(weights, dtype=float)
    if w.shape != v.shape:
        raise ValueError("values and weights must have equal length")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    return v, w


def ht_mean(values, weights=None) -> float:
    """Normalized Horvitz-Thompson mean: sum(w*y) / sum(w)."""
    v, w = _check_sample(values, weights)
    return float(np.sum(w * v) / np.sum(w))


def weighted_median(values, weights=None) -> float:
    """Left-continuous weighted median inf{x : F_w(x) >= 0.5}, no interpolation.

    The crossing test allows 1e-12 of relative slack so that cumulative
    weights landing on exactly 0.5 keep the same crossing point after the
    weights are rescaled by a common constant.
    """
    v, w = _check_sample(values, weights)
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    cdf = np.cumsum(w) / np.sum(w)
    idx = int(np.searchsorted(cdf, 0.5 * (1.0 - 1e-12), side="left"))
    return float(v[min(idx, v.size - 1)])


def median_heuristic_sigma(predictors, weights=None, distance=None) -> float:
    """Kernel scale from the weighted median of squared pairwise distances.

    Each unordered pair (i, j), i < j, enters the weighted-median CDF with
    weight w_i * w_j; the returned scale is the square root of that median.
    """
    n = len(predictors)
    if n < 2:
        raise ValueError("need at least two predictors")
    if distance is None:
        distance = lambda a, b: abs(a - b)
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,):
            raise ValueError("weights must match predictors")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")

    sq_dists = []
    pair_weights = []
    for i in range(n - 1):
        for j in range(i + 1, n):
            d = distance(predictors[i], predictors[j])
            sq_dists.append(d * d)
            pair_weights.append(w[i] * w[j])
    sq_dists = np.asarray(sq_dists)
    if np.all(sq_dists == 0):
        raise ValueError("degenerate predictor set")
    return float(np.sqrt(weighted_median(sq_dists, np.asarray(pair_weights))))


def median_heuristic_sigma_from_matrix(dist_matrix: np.ndarray, weights=None) -> float:
    """Same heuristic, fed a precomputed symmetric distance matrix."""
    d = np.asarray(dist_matrix, dtype=float)
    n = d.shape[0]
    if d.shape != (n, n) or n < 2:
        raise ValueError("need a square distance matrix of size >= 2")
    iu, ju = np.triu_indices(n, k=1)
    sq = d[iu, ju] ** 2
    if np.all(sq == 0):
        raise ValueError("degenerate predictor set")
    if weights is None:
        pair_w = np.ones(sq.size)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,):
            raise ValueError("weights must match the matrix")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        pair_w = w[iu] * w[ju]
    return float(np.sqrt(weighted_median(sq, pair_w)))


def weighted_r2(y, yhat_loo, weights=None) -> float:
    """Survey-weighted leave-one-out R-square.

    1 - sum(w*(y - yhat)^2) / sum(w*(y - mean_w(y))^2). May be negative when
    the out-of-sample predictions do worse than the weighted mean.
    """
    y, w = _check_sample(y, weights)
    yhat = np.asarray(yhat_loo, dtype=float)
    if yhat.shape != y.shape:
        raise ValueError("predictions must match responses")
    if np.any(~np.isfinite(yhat)):
        raise ValueError("predictions contain missing entries")
    center = np.sum(w * y) / np.sum(w)
    denom = np.sum(w * (y - center) ** 2)
    if denom <= 0:
        raise ValueError("zero variance response")
    num = np.sum(w * (y - yhat) ** 2)
    return float(1.0 - num / denom)
