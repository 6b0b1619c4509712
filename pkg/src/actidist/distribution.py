"""Mixed-distribution representation of nonnegative activity time series.

A subject's minute-level activity readings are summarized as a probability
distribution with an atom at the inactivity value (zero, or the lower
censoring cutoff) plus a continuous part for active movement. The workhorse
object is the quantile function of the full mixed distribution evaluated on
a uniform midpoint grid, which is what all downstream Wasserstein machinery
consumes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

MINUTES_PER_DAY = 1440.0
_SQRT_2PI = np.sqrt(2.0 * np.pi)

DEFAULT_GRID_SIZE = 500


@dataclass(frozen=True)
class ActivitySeries:
    """One subject's timestamped activity readings plus survey metadata.

    timestamps are minutes since an arbitrary epoch, strictly increasing;
    readings are nonnegative counts aligned with the timestamps.
    """

    subject_id: str
    timestamps: np.ndarray
    readings: np.ndarray
    survey_weight: float = 1.0
    covariates: dict = field(default_factory=dict)

    def __post_init__(self):
        timestamps = np.asarray(self.timestamps, dtype=float)
        readings = np.asarray(self.readings, dtype=float)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "readings", readings)
        object.__setattr__(self, "survey_weight", float(self.survey_weight))
        if readings.size == 0:
            raise ValueError("empty series")
        if readings.shape != timestamps.shape or readings.ndim != 1:
            raise ValueError("timestamps and readings must be 1-d and aligned")
        if np.any(readings < 0) or not np.all(np.isfinite(readings)):
            raise ValueError("readings must be finite and nonnegative")
        if timestamps.size > 1 and np.any(np.diff(timestamps) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if not self.survey_weight > 0:
            raise ValueError("survey_weight must be positive")

    @property
    def n_obs(self) -> int:
        return self.readings.size


@dataclass(frozen=True)
class CensorSpec:
    """Optional lower/upper censoring cutoffs for the readings.

    Readings at or below ``lower`` count as inactive and are collapsed onto
    the cutoff; readings above ``upper`` are truncated down to it.
    """

    lower: float | None = None
    upper: float | None = None

    def __post_init__(self):
        if self.lower is not None and self.lower < 0:
            raise ValueError("invalid censor bounds")
        if self.upper is not None and self.upper <= 0:
            raise ValueError("invalid censor bounds")
        if self.lower is not None and self.upper is not None and self.lower >= self.upper:
            raise ValueError("invalid censor bounds")

    @property
    def atom_value(self) -> float:
        """Location of the inactivity atom (0 without a lower cutoff)."""
        return 0.0 if self.lower is None else float(self.lower)


NO_CENSOR = CensorSpec()


@dataclass(frozen=True)
class QuantileGrid:
    """Quantile function values on the uniform midpoint grid.

    Entry k corresponds to probability level t_k = (k + 0.5) / m for
    k = 0..m-1. Values must be nondecreasing and nonnegative.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("quantile values must be a nonempty 1-d array")
        if not np.all(np.isfinite(values)):
            raise ValueError("quantile values must be finite")
        if np.any(np.diff(values) < 0):
            raise ValueError("quantile values must be nondecreasing")
        if values[0] < 0:
            raise ValueError("quantile values must be nonnegative")

    @property
    def m(self) -> int:
        return self.values.size

    @property
    def levels(self) -> np.ndarray:
        m = self.m
        return (np.arange(1, m + 1) - 0.5) / m

    def mean(self) -> float:
        """Mean of the represented distribution (midpoint rule)."""
        return float(np.mean(self.values))


@dataclass(frozen=True)
class DensityCurve:
    """Smoothed density of the active part, for exploration and plots."""

    abscissae: np.ndarray
    ordinates: np.ndarray
    bandwidth: float

    def __post_init__(self):
        x = np.asarray(self.abscissae, dtype=float)
        y = np.asarray(self.ordinates, dtype=float)
        object.__setattr__(self, "abscissae", x)
        object.__setattr__(self, "ordinates", y)
        if x.shape != y.shape or x.ndim != 1 or x.size < 2:
            raise ValueError("density curve needs aligned 1-d abscissae/ordinates")
        if np.any(np.diff(x) <= 0) or x[0] <= 0:
            raise ValueError("abscissae must be increasing and positive")
        if np.any(y < 0):
            raise ValueError("ordinates must be nonnegative")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    def mass(self) -> float:
        """Trapezoid integral of the curve; close to 1 - p_inactive on a wide grid."""
        return float(np.trapezoid(self.ordinates, self.abscissae))


@dataclass(frozen=True)
class MixedDistribution:
    """Inactivity atom plus quantile grid of the full mixed distribution."""

    p_inactive: float
    quantiles: QuantileGrid
    atom_value: float = 0.0
    active_density: DensityCurve | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_inactive <= 1.0:
            raise ValueError("p_inactive must lie in [0, 1]")


def _is_inactive(readings: np.ndarray, censor: CensorSpec) -> np.ndarray:
    if censor.lower is None:
        return readings == 0.0
    return readings <= censor.lower


def inactive_proportion(series: ActivitySeries, censor: CensorSpec = NO_CENSOR) -> float:
    """Fraction of readings in the inactive range (== 0, or <= lower cutoff)."""
    return float(np.mean(_is_inactive(series.readings, censor)))


def censor_series(series: ActivitySeries, censor: CensorSpec) -> ActivitySeries:
    """Clamp readings into [lower, upper]; timestamps and metadata unchanged."""
    readings = series.readings
    if censor.lower is not None:
        readings = np.maximum(readings, censor.lower)
    if censor.upper is not None:
        readings = np.minimum(readings, censor.upper)
    return ActivitySeries(
        subject_id=series.subject_id,
        timestamps=series.timestamps,
        readings=readings,
        survey_weight=series.survey_weight,
        covariates=series.covariates,
    )


def quantiles_from_values(values: np.ndarray, m: int) -> QuantileGrid:
    """Empirical quantile function of a sample on the midpoint grid.

    Uses the left-continuous generalized inverse inf{x : F(x) >= t} of the
    empirical CDF, evaluated at t_k = (k - 0.5) / m. For a sorted sample of
    size n this is the order statistic with rank ceil(t_k * n); the rank is
    computed in exact integer arithmetic so grid/sample-size coincidences
    never fall on the wrong side of a floating-point boundary.
    """
    if m < 2:
        raise ValueError("grid size m must be at least 2")
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty series")
    ordered = np.sort(values)
    n = ordered.size
    k = np.arange(1, m + 1, dtype=np.int64)
    ranks = (n * (2 * k - 1) + 2 * m - 1) // (2 * m)  # ceil(n * (2k-1) / (2m))
    return QuantileGrid(values=ordered[ranks - 1])


def empirical_quantiles(series: ActivitySeries, m: int = DEFAULT_GRID_SIZE) -> QuantileGrid:
    """Empirical quantile grid of a subject's readings."""
    return quantiles_from_values(series.readings, m)


def silverman_bandwidth(positive_readings: np.ndarray) -> float:
    """Rule-of-thumb bandwidth 0.9 * min(sd, IQR/1.34) * n^(-1/5).

    The IQR uses linear interpolation between order statistics. When the
    IQR is zero but the sample still has spread, the scale falls back to
    the standard deviation so the bandwidth stays positive.
    """
    x = np.asarray(positive_readings, dtype=float)
    if np.unique(x).size < 2:
        raise ValueError("degenerate active sample")
    sd = float(np.std(x, ddof=1))
    iqr = float(np.percentile(x, 75) - np.percentile(x, 25))
    scale = min(sd, iqr / 1.34)
    if scale <= 0:
        scale = sd
    return 0.9 * scale * x.size ** (-0.2)


def _active_values(series: ActivitySeries, censor: CensorSpec) -> np.ndarray:
    censored = censor_series(series, censor)
    return censored.readings[~_is_inactive(censored.readings, censor)]


def kde_active(
    series: ActivitySeries,
    censor: CensorSpec = NO_CENSOR,
    bandwidth: float | None = None,
    eval_points: int | np.ndarray = 512,
) -> DensityCurve:
    """Gaussian kernel density of the active part, scaled by 1 - p_inactive.

    f(x) = (1 - p_inactive) * (1 / (n_active * h)) * sum_j phi((X_j - x) / h)
    over the active (non-atom) censored readings. The default bandwidth is
    Silverman's rule on the active values, falling back to 1.0 count unit
    with a warning when the active sample is degenerate.
    """
    active = _active_values(series, censor)
    if active.size == 0:
        raise ValueError("all readings inactive")
    p_inactive = inactive_proportion(series, censor)

    if bandwidth is None:
        try:
            bandwidth = silverman_bandwidth(active)
        except ValueError:
            warnings.warn(
                "degenerate active sample; falling back to bandwidth 1.0",
                stacklevel=2,
            )
            bandwidth = 1.0
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")

    if np.isscalar(eval_points):
        lo = max(float(active.min()) - 4.0 * bandwidth, 1e-12)
        hi = float(active.max()) + 4.0 * bandwidth
        grid = np.linspace(lo, hi, int(eval_points))
    else:
        grid = np.asarray(eval_points, dtype=float)

    z = (active[None, :] - grid[:, None]) / bandwidth
    density = np.exp(-0.5 * z * z).sum(axis=1) / (active.size * bandwidth * _SQRT_2PI)
    density *= 1.0 - p_inactive
    return DensityCurve(abscissae=grid, ordinates=density, bandwidth=float(bandwidth))


def build_mixed(
    series: ActivitySeries,
    censor: CensorSpec = NO_CENSOR,
    m: int = DEFAULT_GRID_SIZE,
    with_density: bool = False,
) -> MixedDistribution:
    """Two-step construction: inactivity proportion, then censored quantiles.

    The quantile grid covers the full mixed distribution, so every level
    below p_inactive sits at the atom value. The optional density curve is
    only built when at least one active reading exists.
    """
    p_inactive = inactive_proportion(series, censor)
    censored = censor_series(series, censor)
    quantiles = empirical_quantiles(censored, m)

    density = None
    if with_density and p_inactive < 1.0:
        density = kde_active(series, censor)

    return MixedDistribution(
        p_inactive=p_inactive,
        quantiles=quantiles,
        atom_value=censor.atom_value,
        active_density=density,
    )


def tac_per_day(series: ActivitySeries) -> float:
    """Total activity count normalized by the monitored span in days.

    The span is (last - first + one sampling interval) where the sampling
    interval is the gap between the first two timestamps, so an exactly
    two-day recording at one-minute resolution counts as 2.0 days.
    """
    if series.n_obs < 2:
        raise ValueError("span undefined")
    t = series.timestamps
    interval = t[1] - t[0]
    span_days = (t[-1] - t[0] + interval) / MINUTES_PER_DAY
    return float(series.readings.sum() / span_days)
