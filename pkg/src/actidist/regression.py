"""Survey-weighted nonparametric regression over distributional predictors.

Two estimators are provided, both taking per-unit survey weights:

* a Nadaraya-Watson smoother whose local kernel weights are multiplied by
  the survey weights, valid for regression and (via its convexity) for
  binary classification without post hoc changes;
* kernel ridge regression solving (W K + lambda I) alpha = W Y with a
  Laplacian kernel, whose scale defaults to the survey-weighted median
  heuristic.

Distributional predictors are quantile grids compared with the Wasserstein
distance; scalar predictors use the absolute difference.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .distribution import QuantileGrid
from .survey import median_heuristic_sigma_from_matrix

_SQRT_2PI = np.sqrt(2.0 * np.pi)

GRID_KIND = "grid"
SCALAR_KIND = "scalar"

MODEL_FORMAT_VERSION = 1


def gaussian_kernel(u: np.ndarray) -> np.ndarray:
    """Standard Gaussian density; the smoother's default local kernel."""
    return np.exp(-0.5 * np.asarray(u) ** 2) / _SQRT_2PI


def epanechnikov_kernel(u: np.ndarray) -> np.ndarray:
    """Compact-support kernel 0.75 * (1 - u^2) on |u| <= 1."""
    u = np.asarray(u)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


def laplacian_kernel(dist, sigma: float):
    """exp(-dist / sigma); the reproducing kernel used for ridge regression."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d = np.asarray(dist, dtype=float)
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    out = np.exp(-d / sigma)
    return float(out) if np.isscalar(dist) else out


def gaussian_rbf_kernel(dist, sigma: float):
    """exp(-(dist / sigma)^2); optional alternative reproducing kernel."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d = np.asarray(dist, dtype=float)
    out = np.exp(-((d / sigma) ** 2))
    return float(out) if np.isscalar(dist) else out


_RKHS_KERNELS = {"laplacian": laplacian_kernel, "gaussian": gaussian_rbf_kernel}


class SurveySample:
    """Paired (predictor, response, weight) records for regression.

    Predictors are either all quantile grids or all scalars; responses are
    continuous, or 0/1 when the sample is used for classification.
    """

    def __init__(self, predictors, responses, weights=None):
        responses = np.asarray(responses, dtype=float)
        n = responses.size
        if n < 1:
            raise ValueError("empty sample")
        if weights is None:
            weights = np.ones(n)
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (n,) or responses.ndim != 1:
            raise ValueError("responses and weights must be aligned 1-d arrays")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")

        if len(predictors) != n:
            raise ValueError("predictors and responses must have equal length")
        if all(isinstance(p, QuantileGrid) for p in predictors):
            self.kind = GRID_KIND
            m = predictors[0].m
            if any(p.m != m for p in predictors):
                raise ValueError("grid mismatch")
            self._matrix = np.stack([p.values for p in predictors])
        else:
            arr = np.asarray(predictors, dtype=float)
            if arr.ndim != 1:
                raise ValueError("predictors must be quantile grids or scalars")
            self.kind = SCALAR_KIND
            self._matrix = arr
        self.predictors = list(predictors) if self.kind == GRID_KIND else self._matrix
        self.responses = responses
        self.weights = weights

    @property
    def n(self) -> int:
        return self.responses.size

    def is_binary(self) -> bool:
        return bool(np.all(np.isin(self.responses, (0.0, 1.0))))

    def distance_matrix(self) -> np.ndarray:
        """Pairwise predictor distances, fixed index order."""
        x = self._matrix
        if self.kind == GRID_KIND:
            m = x.shape[1]
            sq = ((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2) / m
            return np.sqrt(sq)
        return np.abs(x[:, None] - x[None, :])

    def distances_to(self, x) -> np.ndarray:
        """Distances from every training predictor to a query point."""
        if self.kind == GRID_KIND:
            if not isinstance(x, QuantileGrid):
                raise ValueError("query must be a quantile grid")
            if x.m != self._matrix.shape[1]:
                raise ValueError("grid mismatch")
            return np.sqrt(((self._matrix - x.values) ** 2).mean(axis=1))
        return np.abs(self._matrix - float(x))

    def subset(self, mask: np.ndarray) -> "SurveySample":
        idx = np.flatnonzero(mask)
        if self.kind == GRID_KIND:
            preds = [self.predictors[i] for i in idx]
        else:
            preds = self._matrix[idx]
        return SurveySample(preds, self.responses[idx], self.weights[idx])


_NW_KERNELS = {"gaussian": gaussian_kernel, "epanechnikov": epanechnikov_kernel}


@dataclass(frozen=True)
class NwConfig:
    """Smoother configuration: bandwidth, local kernel, distance selector."""

    bandwidth: float
    kernel_name: str = "gaussian"
    distance: str = "auto"
    kernel: object = None

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if self.distance not in ("auto", "wasserstein", "absolute"):
            raise ValueError(f"unknown distance {self.distance!r}")
        if self.kernel is None:
            if self.kernel_name not in _NW_KERNELS:
                raise ValueError(f"unknown kernel {self.kernel_name!r}")
            object.__setattr__(self, "kernel", _NW_KERNELS[self.kernel_name])


def _check_distance(sample: SurveySample, cfg: NwConfig) -> None:
    expected = "wasserstein" if sample.kind == GRID_KIND else "absolute"
    if cfg.distance not in ("auto", expected):
        raise ValueError(
            f"distance {cfg.distance!r} does not match {sample.kind} predictors")


def nw_predict(sample: SurveySample, cfg: NwConfig, x) -> float:
    """Survey-weighted Nadaraya-Watson prediction at a query point.

    s_i proportional to kernel(d(X_i, x) / h) * w_i, normalized to sum one.
    The result is a convex combination of the responses and is clipped to
    the observed response range so the bound also holds under floating
    point; binary responses therefore yield a probability in [0, 1].
    """
    _check_distance(sample, cfg)
    d = sample.distances_to(x)
    k = cfg.kernel(d / cfg.bandwidth) * sample.weights
    total = k.sum()
    if not total > 0:
        raise ValueError("empty neighborhood")
    pred = float(k @ sample.responses) / total
    return float(np.clip(pred, sample.responses.min(), sample.responses.max()))


def _nw_weight_matrix(sample: SurveySample, cfg: NwConfig) -> np.ndarray:
    d = sample.distance_matrix()
    return cfg.kernel(d / cfg.bandwidth) * sample.weights[None, :]


def nw_loo(sample: SurveySample, cfg: NwConfig) -> np.ndarray:
    """Leave-one-out smoother predictions at every training point.

    Entry i is the prediction at X_i with observation i removed. Points
    whose remaining kernel mass is zero come back as NaN so callers can
    surface them instead of silently dropping subjects.
    """
    if sample.n < 2:
        raise ValueError("need at least two observations")
    _check_distance(sample, cfg)
    k = _nw_weight_matrix(sample, cfg)
    np.fill_diagonal(k, 0.0)
    totals = k.sum(axis=1)
    y = sample.responses
    out = np.full(sample.n, np.nan)
    ok = totals > 0
    out[ok] = (k[ok] @ y) / totals[ok]
    np.clip(out, y.min(), y.max(), out=out)
    return out


def nw_select_bandwidth(sample: SurveySample, cfg_template: NwConfig, h_grid) -> float:
    """Pick the bandwidth minimizing weighted leave-one-out squared error.

    Candidates producing any empty leave-one-out neighborhood are skipped;
    ties break toward the smaller bandwidth.
    """
    h_grid = np.sort(np.asarray(h_grid, dtype=float))
    if h_grid.size == 0:
        raise ValueError("empty bandwidth grid")
    if np.any(h_grid <= 0):
        raise ValueError("bandwidths must be positive")
    best_h, best_err = None, np.inf
    for h in h_grid:
        cfg = NwConfig(bandwidth=float(h), kernel_name=cfg_template.kernel_name,
                       distance=cfg_template.distance, kernel=cfg_template.kernel)
        preds = nw_loo(sample, cfg)
        if np.any(~np.isfinite(preds)):
            continue
        err = float(np.sum(sample.weights * (sample.responses - preds) ** 2))
        if err < best_err:
            best_h, best_err = float(h), err
    if best_h is None:
        raise ValueError("empty neighborhood at every bandwidth")
    return best_h


def distance_quantile_grid(sample: SurveySample, probs=None) -> np.ndarray:
    """Default bandwidth grid: quantiles of the positive pairwise distances."""
    if probs is None:
        probs = np.linspace(0.05, 0.95, 10)
    d = sample.distance_matrix()
    iu, ju = np.triu_indices(sample.n, k=1)
    pos = d[iu, ju]
    pos = pos[pos > 0]
    if pos.size == 0:
        raise ValueError("degenerate predictor set")
    return np.unique(np.quantile(pos, probs))


@dataclass(frozen=True)
class KrrModel:
    """Fitted kernel ridge regressor; immutable and safe to share."""

    kind: str
    training_matrix: np.ndarray
    alpha: np.ndarray
    sigma: float
    lam: float
    kernel_name: str = "laplacian"
    format_version: int = MODEL_FORMAT_VERSION

    def training_predictions(self) -> np.ndarray:
        k = _kernel_matrix(self.training_matrix, self.training_matrix, self.kind,
                           self.sigma, self.kernel_name)
        return k @ self.alpha


def _cross_distances(a: np.ndarray, b: np.ndarray, kind: str) -> np.ndarray:
    if kind == GRID_KIND:
        m = a.shape[1]
        sq = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2) / m
        return np.sqrt(sq)
    return np.abs(a[:, None] - b[None, :])


def _kernel_matrix(a, b, kind, sigma, kernel_name) -> np.ndarray:
    return _RKHS_KERNELS[kernel_name](_cross_distances(a, b, kind), sigma)


def krr_fit(sample: SurveySample, lam: float, sigma: float | None = None,
            kernel_name: str = "laplacian") -> KrrModel:
    """Fit survey-weighted kernel ridge regression.

    Solves (W K + lam I) alpha = W Y by LU factorization with partial
    pivoting, where K_ij = kernel(d(X_i, X_j)) and W = diag(weights). The
    kernel scale defaults to the weighted median heuristic on the training
    predictors. A warning is emitted when the system's condition number
    exceeds 1e12.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if kernel_name not in _RKHS_KERNELS:
        raise ValueError(f"unknown kernel {kernel_name!r}")
    x = sample._matrix
    d = sample.distance_matrix()
    if sigma is None:
        sigma = median_heuristic_sigma_from_matrix(d, sample.weights)
    if not sigma > 0:
        raise ValueError("sigma must be positive")

    k = _RKHS_KERNELS[kernel_name](d, sigma)
    w = sample.weights
    a = w[:, None] * k + lam * np.eye(sample.n)
    cond = np.linalg.cond(a)
    if cond > 1e12:
        warnings.warn(f"ill-conditioned kernel system (cond ~ {cond:.2e})", stacklevel=2)
    try:
        alpha = np.linalg.solve(a, w * sample.responses)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular kernel system; increase lambda") from exc
    return KrrModel(kind=sample.kind, training_matrix=x.copy(), alpha=alpha,
                    sigma=float(sigma), lam=float(lam), kernel_name=kernel_name)


def _query_matrix(model: KrrModel, x) -> np.ndarray:
    if model.kind == GRID_KIND:
        if not isinstance(x, QuantileGrid):
            raise ValueError("query must be a quantile grid")
        if x.m != model.training_matrix.shape[1]:
            raise ValueError("grid mismatch")
        return x.values[None, :]
    return np.asarray([float(x)])


def krr_predict(model: KrrModel, x) -> float:
    """Representer-form prediction sum_i alpha_i * kernel(d(x, X_i))."""
    q = _query_matrix(model, x)
    k = _kernel_matrix(q, model.training_matrix, model.kind, model.sigma,
                       model.kernel_name)
    return float((k @ model.alpha)[0])


def krr_predict_batch(model: KrrModel, predictors) -> np.ndarray:
    """Predictions at several query points (grids or scalars)."""
    if model.kind == GRID_KIND:
        q = np.stack([p.values for p in predictors])
    else:
        q = np.asarray(predictors, dtype=float)
    k = _kernel_matrix(q, model.training_matrix, model.kind, model.sigma,
                       model.kernel_name)
    return k @ model.alpha


def _krr_loo_refit(sample: SurveySample, lam: float, sigma: float | None,
                   kernel_name: str, indices=None) -> np.ndarray:
    n = sample.n
    if indices is None:
        indices = range(n)
    out = np.full(n, np.nan)
    for i in indices:
        mask = np.ones(n, dtype=bool)
        mask[i] = False
        model = krr_fit(sample.subset(mask), lam, sigma=sigma, kernel_name=kernel_name)
        query = sample.predictors[i] if sample.kind == GRID_KIND else sample._matrix[i]
        out[i] = krr_predict(model, query)
    return out


def _krr_loo_hat(sample: SurveySample, lam: float, sigma: float,
                 kernel_name: str) -> tuple[np.ndarray, np.ndarray]:
    """Hat-matrix shortcut: H = K (WK + lam I)^-1 W, loo_i = (yhat_i - H_ii y_i) / (1 - H_ii)."""
    d = sample.distance_matrix()
    k = _RKHS_KERNELS[kernel_name](d, sigma)
    w = sample.weights
    a = w[:, None] * k + lam * np.eye(sample.n)
    try:
        b = np.linalg.solve(a, np.diag(w))
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular kernel system; increase lambda") from exc
    h = k @ b
    hii = np.diag(h)
    yhat = h @ sample.responses
    denom = 1.0 - hii
    with np.errstate(divide="ignore", invalid="ignore"):
        loo = (yhat - hii * sample.responses) / denom
    return loo, denom


def krr_loo(sample: SurveySample, lam: float, sigma: float | None = None,
            kernel_name: str = "laplacian", method: str = "auto",
            recompute_sigma: bool = False) -> np.ndarray:
    """Leave-one-out ridge predictions with the kernel scale held fixed.

    method "refit" refits the model once per left-out observation and is
    the ground truth; "hat" uses the linear-smoother shortcut; "auto" takes
    the shortcut but falls back to an explicit refit for any entry whose
    shortcut denominator 1 - H_ii drops below 1e-10, where the formula is
    no longer trustworthy. With ``recompute_sigma`` the median-heuristic
    scale is re-derived inside every fold, which forces explicit refits.
    """
    if sample.n < 2:
        raise ValueError("need at least two observations")
    if recompute_sigma:
        return _krr_loo_refit(sample, lam, None, kernel_name)
    if sigma is None:
        sigma = median_heuristic_sigma_from_matrix(sample.distance_matrix(),
                                                   sample.weights)
    if method == "refit":
        return _krr_loo_refit(sample, lam, sigma, kernel_name)
    loo, denom = _krr_loo_hat(sample, lam, sigma, kernel_name)
    if method == "hat":
        return loo
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    bad = np.flatnonzero((denom < 1e-10) | ~np.isfinite(loo))
    if bad.size:
        refit = _krr_loo_refit(sample, lam, sigma, kernel_name, indices=bad)
        loo[bad] = refit[bad]
    return loo


def krr_select_lambda(sample: SurveySample, sigma: float, lambda_grid) -> float:
    """Pick the ridge penalty minimizing weighted leave-one-out squared error.

    Ties break toward the larger penalty (stronger regularization).
    """
    grid = np.sort(np.asarray(lambda_grid, dtype=float))[::-1]
    if grid.size == 0:
        raise ValueError("empty lambda grid")
    if np.any(grid <= 0):
        raise ValueError("lambda grid entries must be positive")
    best_lam, best_err = None, np.inf
    for lam in grid:
        preds = krr_loo(sample, float(lam), sigma=sigma)
        err = float(np.sum(sample.weights * (sample.responses - preds) ** 2))
        if err < best_err:
            best_lam, best_err = float(lam), err
    return best_lam


def save_model(model: KrrModel, path) -> None:
    """Persist a fitted model as a self-describing JSON text artifact."""
    payload = {
        "format_version": model.format_version,
        "kind": model.kind,
        "kernel_name": model.kernel_name,
        "sigma": model.sigma,
        "lambda": model.lam,
        "alpha": model.alpha.tolist(),
        "training_matrix": model.training_matrix.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_model(path) -> KrrModel:
    """Read back a model written by save_model."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    return KrrModel(
        kind=payload["kind"],
        training_matrix=np.asarray(payload["training_matrix"], dtype=float),
        alpha=np.asarray(payload["alpha"], dtype=float),
        sigma=float(payload["sigma"]),
        lam=float(payload["lambda"]),
        kernel_name=payload["kernel_name"],
        format_version=version,
    )
