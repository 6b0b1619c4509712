"""End-to-end analysis drivers: R-square comparisons, mortality
classification, risk grouping, and stratified Frechet profiles."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import geometry
from .distribution import (
    CensorSpec,
    DEFAULT_GRID_SIZE,
    NO_CENSOR,
    build_mixed,
    tac_per_day,
)
from .regression import (
    NwConfig,
    SurveySample,
    distance_quantile_grid,
    krr_loo,
    krr_select_lambda,
    nw_loo,
    nw_select_bandwidth,
)
from .survey import median_heuristic_sigma_from_matrix, weighted_r2

DEFAULT_LAMBDA_GRID = np.logspace(-4, 2, 13)

RISK_GROUP_A = "A_risk"
RISK_GROUP_B = "B_nonrisk"
UNASSIGNED = "unassigned"

AGE_STRATA = ((68, 75), (76, 80), (81, 85))


def survey_sample_from_subjects(subjects, predictor: str = "quantiles",
                                response: str = "response",
                                censor: CensorSpec = NO_CENSOR,
                                m: int = DEFAULT_GRID_SIZE) -> SurveySample:
    """Assemble a regression sample from activity series.

    predictor "quantiles" builds each subject's mixed-distribution quantile
    grid; "tac" uses the scalar per-day total activity count.
    """
    if predictor == "quantiles":
        predictors = [build_mixed(s, censor=censor, m=m).quantiles for s in subjects]
    elif predictor == "tac":
        predictors = np.asarray([tac_per_day(s) for s in subjects])
    else:
        raise ValueError(f"unknown predictor kind {predictor!r}")
    responses = np.asarray([float(s.covariates[response]) for s in subjects])
    weights = np.asarray([s.survey_weight for s in subjects])
    return SurveySample(predictors, responses, weights)


@dataclass(frozen=True)
class FitReport:
    """Tuning and fit quality of one kernel ridge regression run."""

    r2: float
    lam: float
    sigma: float


@dataclass(frozen=True)
class R2Comparison:
    distribution: FitReport
    tac: FitReport

    @property
    def r2_distribution(self) -> float:
        return self.distribution.r2

    @property
    def r2_tac(self) -> float:
        return self.tac.r2


def _fit_report(sample: SurveySample, lambda_grid) -> FitReport:
    sigma = median_heuristic_sigma_from_matrix(sample.distance_matrix(),
                                               sample.weights)
    lam = krr_select_lambda(sample, sigma, lambda_grid)
    loo = krr_loo(sample, lam, sigma=sigma)
    r2 = weighted_r2(sample.responses, loo, sample.weights)
    return FitReport(r2=r2, lam=lam, sigma=sigma)


def compare_r2(distribution_sample: SurveySample, tac_sample: SurveySample,
               lambda_grid=None) -> R2Comparison:
    """Leave-one-out R-square of the distributional representation versus
    the scalar daily-total baseline on the same subjects.

    Both samples must carry identical responses and weights; each side gets
    its own median-heuristic kernel scale and its own penalty selected by
    leave-one-out cross-validation.
    """
    if distribution_sample.n != tac_sample.n:
        raise ValueError("samples must cover the same subjects")
    if not np.array_equal(distribution_sample.responses, tac_sample.responses):
        raise ValueError("responses differ between samples")
    if not np.array_equal(distribution_sample.weights, tac_sample.weights):
        raise ValueError("weights differ between samples")
    if lambda_grid is None:
        lambda_grid = DEFAULT_LAMBDA_GRID
    return R2Comparison(
        distribution=_fit_report(distribution_sample, lambda_grid),
        tac=_fit_report(tac_sample, lambda_grid),
    )


@dataclass(frozen=True)
class ClassificationOutcome:
    """Per-subject leave-one-out probabilities and weighted confusion counts.

    Subjects whose leave-one-out neighborhood was empty keep a NaN
    probability, are excluded from the confusion counts, and are flagged in
    the classified mask.
    """

    probabilities: np.ndarray
    predicted: np.ndarray
    actual: np.ndarray
    weights: np.ndarray
    classified: np.ndarray
    threshold: float
    bandwidth: float
    tp: float
    fp: float
    tn: float
    fn: float
    auc: float

    @property
    def weighted_accuracy(self) -> float:
        total = self.tp + self.fp + self.tn + self.fn
        return (self.tp + self.tn) / total if total > 0 else float("nan")


def weighted_auc(probabilities, actual, weights) -> float:
    """Area under the survey-weighted empirical ROC curve.

    Weighted probability that a random positive outranks a random negative,
    counting ties as half. NaN when either class is absent.
    """
    p = np.asarray(probabilities, dtype=float)
    y = np.asarray(actual, dtype=float)
    w = np.asarray(weights, dtype=float)
    pos, neg = y == 1, y == 0
    w_pos, w_neg = w[pos], w[neg]
    if w_pos.size == 0 or w_neg.size == 0:
        return float("nan")
    diff = p[pos][:, None] - p[neg][None, :]
    wins = np.where(diff > 0, 1.0, np.where(diff == 0, 0.5, 0.0))
    pair_w = w_pos[:, None] * w_neg[None, :]
    return float((wins * pair_w).sum() / pair_w.sum())


def classify_mortality(sample: SurveySample, cfg: NwConfig | None = None,
                       threshold: float = 0.5) -> ClassificationOutcome:
    """Leave-one-out mortality probabilities from the survey smoother.

    With no explicit configuration the bandwidth is selected by weighted
    leave-one-out error over the pairwise-distance quantile grid. A subject
    is predicted deceased when its probability reaches the threshold.
    """
    if not sample.is_binary():
        raise ValueError("responses must be 0/1 for classification")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    if cfg is None:
        h = nw_select_bandwidth(sample, NwConfig(bandwidth=1.0),
                                distance_quantile_grid(sample))
        cfg = NwConfig(bandwidth=h)

    probs = nw_loo(sample, cfg)
    classified = np.isfinite(probs)
    predicted = np.where(classified & (probs >= threshold), 1, 0)
    actual = sample.responses.astype(int)
    w = sample.weights

    use = classified
    tp = float(w[use & (predicted == 1) & (actual == 1)].sum())
    fp = float(w[use & (predicted == 1) & (actual == 0)].sum())
    tn = float(w[use & (predicted == 0) & (actual == 0)].sum())
    fn = float(w[use & (predicted == 0) & (actual == 1)].sum())
    auc = weighted_auc(probs[use], actual[use], w[use])

    return ClassificationOutcome(
        probabilities=probs, predicted=predicted, actual=actual, weights=w,
        classified=classified, threshold=threshold, bandwidth=cfg.bandwidth,
        tp=tp, fp=fp, tn=tn, fn=fn, auc=auc,
    )


def assign_risk_groups(outcome: ClassificationOutcome) -> list[str]:
    """Risk-group label per subject from (predicted, actual) mortality.

    A_risk: predicted deceased but survived. B_nonrisk: survived and
    correctly classified. Everyone else (including the unclassified) is
    unassigned.
    """
    labels = []
    for ok, pred, act in zip(outcome.classified, outcome.predicted, outcome.actual):
        if not ok:
            labels.append(UNASSIGNED)
        elif pred == 1 and act == 0:
            labels.append(RISK_GROUP_A)
        elif pred == 0 and act == 0:
            labels.append(RISK_GROUP_B)
        else:
            labels.append(UNASSIGNED)
    return labels


def stratify_age(ages, breaks=AGE_STRATA) -> list[str]:
    """Closed-interval age stratum label ("68-75", ...) per subject.

    Ages must be whole years inside one of the intervals; anything else is
    outside the target population.
    """
    labels = []
    for age in ages:
        age_f = float(age)
        if age_f != int(age_f):
            raise ValueError(f"subject outside target population: age {age!r}")
        age_i = int(age_f)
        for lo, hi in breaks:
            if lo <= age_i <= hi:
                labels.append(f"{lo}-{hi}")
                break
        else:
            raise ValueError(f"subject outside target population: age {age_i}")
    return labels


def group_profiles(grids, weights, group_labels, groups=None) -> dict:
    """Weighted Frechet summary (mean, variance, sd curve) per group.

    Groups listed in `groups` but absent from the labels are skipped with a
    warning rather than failing the whole report.
    """
    labels = list(group_labels)
    if len(labels) != len(grids):
        raise ValueError("labels must match grids")
    w = np.asarray(weights, dtype=float)
    if groups is None:
        groups = sorted(set(labels))
    out = {}
    for group in groups:
        mask = np.asarray([lab == group for lab in labels])
        if not mask.any():
            warnings.warn(f"empty group {group!r} skipped", stacklevel=2)
            continue
        members = [g for g, keep in zip(grids, mask) if keep]
        out[group] = geometry.summarize(members, w[mask])
    return out
