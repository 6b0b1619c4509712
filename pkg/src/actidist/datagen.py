"""Synthetic finite populations with known ground truth, plus survey designs.

Populations are built stratum by stratum: each subject's minute readings are
i.i.d. draws that are zero with the subject's inactivity rate and otherwise
follow the stratum's positive intensity law. All randomness flows from the
explicit seed through per-subject derived streams, so generation is
deterministic regardless of evaluation order.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .distribution import ActivitySeries, tac_per_day


@dataclass(frozen=True)
class IntensityLaw:
    """Positive intensity law for active minutes.

    kinds:
      lognormal(mu, sigma)
      gamma(shape, scale)
      lognormal_fixed_mean(mean_level, s_lo, s_hi): per-subject spread s drawn
        uniformly from [s_lo, s_hi] with mu = log(mean_level) - s^2/2, so every
        subject shares the same mean intensity while the shape varies.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in ("lognormal", "gamma", "lognormal_fixed_mean"):
            raise ValueError(f"unknown intensity law {self.kind!r}")


@dataclass(frozen=True)
class ResponseModel:
    """Per-stratum rule mapping a generated subject to a scalar response.

    kinds: "tac" (scale * daily total + noise), "spread" (scale * the
    subject's intensity spread parameter + noise), "noise", "constant".
    """

    kind: str
    scale: float = 1.0
    noise_sd: float = 0.0
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("tac", "spread", "noise", "constant"):
            raise ValueError(f"unknown response model {self.kind!r}")


@dataclass(frozen=True)
class StratumSpec:
    name: str
    proportion: float
    inactivity_range: tuple
    intensity: IntensityLaw
    age_range: tuple = (68, 85)
    mortality_rate: float = 0.0
    response: ResponseModel | None = None


@dataclass(frozen=True)
class PopulationSpec:
    size: int
    strata: tuple
    minutes: int = 1440
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strata", tuple(self.strata))
        if self.size < 1:
            raise ValueError("population size must be at least 1")
        if self.minutes < 2:
            raise ValueError("need at least 2 minutes per subject")
        props = [s.proportion for s in self.strata]
        if not props or abs(sum(props) - 1.0) > 1e-9 or any(p < 0 for p in props):
            raise ValueError("stratum proportions must be nonnegative and sum to 1")
        lo_hi = [s.inactivity_range for s in self.strata]
        if any(not (0 <= lo <= hi <= 1) for lo, hi in lo_hi):
            raise ValueError("inactivity ranges must satisfy 0 <= lo <= hi <= 1")


def _allocate(size: int, proportions) -> list[int]:
    """Largest-remainder allocation of `size` units to the strata."""
    exact = np.asarray(proportions) * size
    counts = np.floor(exact).astype(int)
    remainder = size - counts.sum()
    order = np.argsort(-(exact - counts), kind="stable")
    for idx in order[:remainder]:
        counts[idx] += 1
    return counts.tolist()


def _draw_subject(rng, stratum: StratumSpec, minutes: int):
    """Readings plus the subject's true latent parameters."""
    lo, hi = stratum.inactivity_range
    rate = float(rng.uniform(lo, hi)) if hi > lo else float(lo)

    law = stratum.intensity
    if law.kind == "lognormal":
        mu, s = law.params
    elif law.kind == "lognormal_fixed_mean":
        mean_level, s_lo, s_hi = law.params
        s = float(rng.uniform(s_lo, s_hi))
        mu = float(np.log(mean_level) - 0.5 * s * s)
    else:
        shape, scale = law.params

    inactive = rng.random(minutes) < rate
    if law.kind == "gamma":
        positive = rng.gamma(shape, scale, size=minutes)
        spread = float(np.sqrt(shape) * scale)
    else:
        positive = rng.lognormal(mu, s, size=minutes)
        spread = float(s)
    readings = np.where(inactive, 0.0, np.maximum(positive, 1e-9))
    return readings, rate, spread


def _evaluate_response(rng, model: ResponseModel, series: ActivitySeries,
                       spread: float) -> float:
    noise = model.noise_sd * rng.standard_normal() if model.noise_sd > 0 else 0.0
    if model.kind == "tac":
        return model.scale * tac_per_day(series) + noise
    if model.kind == "spread":
        return model.scale * spread + noise
    if model.kind == "noise":
        return float(rng.standard_normal() * (model.noise_sd or 1.0))
    return model.value


def simulate_population(spec: PopulationSpec):
    """Generate the finite population and its true summary means.

    Returns (subjects, truth) where truth maps each numeric covariate name
    to its exact finite-population mean.
    """
    counts = _allocate(spec.size, [s.proportion for s in spec.strata])
    subjects = []
    index = 0
    for stratum, count in zip(spec.strata, counts):
        for _ in range(count):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=spec.seed, spawn_key=(index,)))
            readings, rate, spread = _draw_subject(rng, stratum, spec.minutes)
            age = int(rng.integers(stratum.age_range[0], stratum.age_range[1] + 1))
            mortality = int(rng.random() < stratum.mortality_rate)
            covariates = {
                "stratum": stratum.name,
                "age": age,
                "mortality": mortality,
                "inactivity_rate": rate,
                "intensity_spread": spread,
            }
            series = ActivitySeries(
                subject_id=f"S{index:05d}",
                timestamps=np.arange(spec.minutes, dtype=float),
                readings=readings,
                survey_weight=1.0,
                covariates=covariates,
            )
            if stratum.response is not None:
                covariates["response"] = float(
                    _evaluate_response(rng, stratum.response, series, spread))
            subjects.append(series)
            index += 1

    numeric = [
        name
        for name in subjects[0].covariates
        if all(isinstance(s.covariates.get(name), (int, float)) for s in subjects)
    ]
    truth = {name: float(np.mean([s.covariates[name] for s in subjects]))
             for name in numeric}
    return subjects, truth


@dataclass(frozen=True)
class StratifiedDesign:
    """Fixed-size without-replacement sampling with per-stratum fractions.

    Every unit in a stratum shares the exact inclusion probability
    n_s / N_s, where n_s = round(fraction * N_s).
    """

    fractions: dict

    def __post_init__(self):
        if not self.fractions:
            raise ValueError("fractions must name at least one stratum")
        for name, f in self.fractions.items():
            if not 0 < f <= 1:
                raise ValueError(f"fraction for stratum {name!r} must be in (0, 1]")


@dataclass(frozen=True)
class PoissonDesign:
    """Independent Bernoulli sampling with size-proportional probabilities.

    pi_i = expected_n * size_i / sum(size); with no size covariate every
    unit gets the equal probability expected_n / N.
    """

    expected_n: int
    size_covariate: str | None = None

    def __post_init__(self):
        if self.expected_n < 1:
            raise ValueError("expected sample size must be at least 1")


def _stratum_indices(population) -> dict:
    groups: dict = {}
    for i, subject in enumerate(population):
        groups.setdefault(subject.covariates.get("stratum", "all"), []).append(i)
    return groups


def inclusion_probabilities(population, design) -> np.ndarray:
    """Per-unit inclusion probability pi_i implied by the design."""
    n = len(population)
    pi = np.zeros(n)
    if isinstance(design, StratifiedDesign):
        groups = _stratum_indices(population)
        missing = set(groups) - set(design.fractions)
        if missing:
            raise ValueError(f"design omits strata: {sorted(missing)}")
        for name, idx in groups.items():
            n_s = len(idx)
            take = max(1, round(design.fractions[name] * n_s))
            pi[idx] = take / n_s
        return pi
    if isinstance(design, PoissonDesign):
        if design.size_covariate is None:
            size = np.ones(n)
        else:
            size = np.asarray(
                [float(s.covariates[design.size_covariate]) for s in population])
            if np.any(size <= 0):
                raise ValueError("size covariate must be positive")
        pi = design.expected_n * size / size.sum()
        if np.any(pi > 1):
            raise ValueError("expected sample size too large for size measure")
        return pi
    raise TypeError(f"unknown design {type(design).__name__}")


def draw_sample(population, design, seed: int):
    """Draw one survey sample; selected subjects carry weight exactly 1/pi_i.

    Stratified designs take a fixed-size simple random sample within each
    stratum; Poisson designs flip an independent coin per unit.
    """
    pi = inclusion_probabilities(population, design)
    rng = np.random.default_rng(seed)

    if isinstance(design, StratifiedDesign):
        selected = []
        for name, idx in sorted(_stratum_indices(population).items()):
            n_s = len(idx)
            take = max(1, round(design.fractions[name] * n_s))
            chosen = rng.choice(n_s, size=take, replace=False)
            selected.extend(idx[int(c)] for c in chosen)
        selected = sorted(selected)
    else:
        selected = np.flatnonzero(rng.random(len(population)) < pi).tolist()

    if not selected:
        raise ValueError("empty sample; increase n")

    sample = []
    for i in selected:
        subject = population[i]
        weight = 1.0 / pi[i]
        sample.append(dataclasses.replace(
            subject,
            survey_weight=weight,
            covariates={**subject.covariates, "pi": float(pi[i])},
        ))
    return sample


# Preset populations used by the verification suite and the demo scripts.

def spread_response_spec(size: int, seed: int, minutes: int = 1440,
                         mean_level: float = 80.0,
                         spread_range=(0.3, 1.5),
                         inactivity: float = 0.55) -> PopulationSpec:
    """Cohort whose response is the intensity spread while every subject
    shares the same mean intensity, so the daily total carries essentially
    no signal about the response."""
    stratum = StratumSpec(
        name="all",
        proportion=1.0,
        inactivity_range=(inactivity, inactivity),
        intensity=IntensityLaw("lognormal_fixed_mean",
                               (mean_level, spread_range[0], spread_range[1])),
        response=ResponseModel("spread", scale=1.0),
    )
    return PopulationSpec(size=size, strata=(stratum,), minutes=minutes, seed=seed)


def tac_response_spec(size: int, seed: int, minutes: int = 1440,
                      scale: float = 0.01) -> PopulationSpec:
    """Cohort whose response is exactly proportional to the daily total."""
    stratum = StratumSpec(
        name="all",
        proportion=1.0,
        inactivity_range=(0.2, 0.8),
        intensity=IntensityLaw("lognormal", (4.0, 0.8)),
        response=ResponseModel("tac", scale=scale),
    )
    return PopulationSpec(size=size, strata=(stratum,), minutes=minutes, seed=seed)


def two_cluster_spec(size: int, seed: int, minutes: int = 720) -> PopulationSpec:
    """Two well-separated activity profiles with pure mortality labels."""
    frail = StratumSpec(
        name="frail",
        proportion=0.5,
        inactivity_range=(0.82, 0.90),
        intensity=IntensityLaw("lognormal", (2.8, 0.5)),
        age_range=(76, 85),
        mortality_rate=1.0,
    )
    active = StratumSpec(
        name="active",
        proportion=0.5,
        inactivity_range=(0.20, 0.30),
        intensity=IntensityLaw("lognormal", (5.6, 0.5)),
        age_range=(68, 75),
        mortality_rate=0.0,
    )
    return PopulationSpec(size=size, strata=(frail, active), minutes=minutes, seed=seed)


def three_stratum_spec(size: int = 5000, seed: int = 0,
                       minutes: int = 4) -> PopulationSpec:
    """Small-series population with age strongly tied to stratum, used to
    demonstrate design bias when weights are ignored."""
    strata = (
        StratumSpec("young", 0.4, (0.3, 0.5),
                    IntensityLaw("gamma", (2.0, 60.0)), age_range=(68, 72)),
        StratumSpec("mid", 0.4, (0.4, 0.6),
                    IntensityLaw("gamma", (2.0, 45.0)), age_range=(73, 79)),
        StratumSpec("old", 0.2, (0.5, 0.8),
                    IntensityLaw("gamma", (2.0, 25.0)), age_range=(80, 85)),
    )
    return PopulationSpec(size=size, strata=strata, minutes=minutes, seed=seed)
