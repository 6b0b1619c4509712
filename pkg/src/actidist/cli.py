"""Batch command-line front end for the distribution/regression pipeline.

Subcommands: build-dist, regress, classify, simulate, predict. Values come
from flags first, then the optional JSON config file, then the built-in
defaults (printable with --print-config). Exit codes: 0 success, 1 I/O
failure, 2 validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import datagen, io
from .distribution import CensorSpec, build_mixed, tac_per_day
from .evaluation import (
    DEFAULT_LAMBDA_GRID,
    assign_risk_groups,
    classify_mortality,
    compare_r2,
    group_profiles,
    stratify_age,
)
from .regression import SurveySample, krr_fit, krr_predict_batch, load_model, save_model

DEFAULTS = {
    "build-dist": {"m": 500, "censor_lower": None, "censor_upper": None,
                   "with_summary": True},
    "regress": {"responses": ["response"],
                "lambda_grid": [float(x) for x in DEFAULT_LAMBDA_GRID],
                "save_models": False, "seed": 0},
    "classify": {"response": "mortality", "threshold": 0.5, "stratify_age": False,
                 "seed": 0},
    "simulate": {"seed": 0, "sample_seed": 1},
    "predict": {},
}


class _RunOutputs:
    """Tracks files written during one run so failures leave no partial output."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.created: list[Path] = []
        out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.created.append(p)
        return p

    def cleanup(self) -> None:
        for p in self.created:
            p.unlink(missing_ok=True)


def _merged(args, command: str) -> dict:
    """flag > config file > default, per option."""
    merged = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            merged.update(json.load(fh))
    for key in merged:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _censor(cfg: dict) -> CensorSpec:
    return CensorSpec(lower=cfg.get("censor_lower"), upper=cfg.get("censor_upper"))


def cmd_build_dist(args) -> int:
    cfg = _merged(args, "build-dist")
    censor = _censor(cfg)
    subjects = io.load_series(args.input, args.subjects)
    out = _RunOutputs(Path(args.out))
    try:
        mixed = [build_mixed(s, censor=censor, m=int(cfg["m"])) for s in subjects]
        ids = [s.subject_id for s in subjects]
        io.write_quantile_csv(out.path("quantiles.csv"), ids, [mx.quantiles for mx in mixed])
        if cfg["with_summary"]:
            tacs = [tac_per_day(s) for s in subjects]
            io.write_summary_csv(out.path("summary.csv"), ids, mixed, tacs)
    except Exception:
        out.cleanup()
        raise
    return 0


def _read_regression_inputs(args):
    ids, grids = io.read_quantile_csv(args.input)
    meta = io.read_subjects_csv(args.subjects)
    missing = sorted(set(ids) - set(meta))
    if missing:
        raise io.InputValidationError(
            f"subjects file lacks entries for: {', '.join(missing)}")
    weights = np.asarray([meta[sid][0] for sid in ids])
    covariates = [meta[sid][1] for sid in ids]
    return ids, grids, weights, covariates


def _tac_values(args, ids, grids) -> np.ndarray:
    """Daily totals from the summary file when given, else recovered from
    the distribution as 1440 * mean quantile value."""
    summary_path = getattr(args, "summary", None)
    if summary_path:
        rows = io.read_summary_csv(summary_path)
        missing = sorted(set(ids) - set(rows))
        if missing:
            raise io.InputValidationError(
                f"summary file lacks entries for: {', '.join(missing)}")
        return np.asarray([rows[sid][1] for sid in ids])
    return np.asarray([1440.0 * g.mean() for g in grids])


def cmd_regress(args) -> int:
    cfg = _merged(args, "regress")
    responses = cfg["responses"]
    if isinstance(responses, str):
        responses = [r.strip() for r in responses.split(",") if r.strip()]
    if not responses:
        raise ValueError("no response columns requested")

    ids, grids, weights, covariates = _read_regression_inputs(args)
    tac = _tac_values(args, ids, grids)
    lambda_grid = np.asarray(cfg["lambda_grid"], dtype=float)

    out = _RunOutputs(Path(args.out))
    try:
        report_rows = []
        for name in responses:
            bad = [sid for sid, cov in zip(ids, covariates) if name not in cov]
            if bad:
                raise io.InputValidationError(
                    f"missing response column {name!r} for: {', '.join(bad[:5])}")
            y = np.asarray([float(cov[name]) for cov in covariates])
            dist_sample = SurveySample(grids, y, weights)
            tac_sample = SurveySample(tac, y, weights)
            result = compare_r2(dist_sample, tac_sample, lambda_grid=lambda_grid)
            report_rows.append([
                name,
                result.distribution.r2, result.tac.r2,
                result.distribution.lam, result.tac.lam,
                result.distribution.sigma, result.tac.sigma,
            ])
            if cfg["save_models"]:
                model = krr_fit(dist_sample, result.distribution.lam,
                                sigma=result.distribution.sigma)
                save_model(model, out.path(f"model_{name}.json"))
        io.write_rows(
            out.path("report.csv"),
            ["response", "r2_distribution", "r2_tac", "lambda_distribution",
             "lambda_tac", "sigma_distribution", "sigma_tac"],
            report_rows,
        )
    except Exception:
        out.cleanup()
        raise
    return 0


def cmd_classify(args) -> int:
    cfg = _merged(args, "classify")
    ids, grids, weights, covariates = _read_regression_inputs(args)
    name = cfg["response"]
    bad = [sid for sid, cov in zip(ids, covariates) if name not in cov]
    if bad:
        raise io.InputValidationError(
            f"missing response column {name!r} for: {', '.join(bad[:5])}")
    y = np.asarray([float(cov[name]) for cov in covariates])
    sample = SurveySample(grids, y, weights)
    if not sample.is_binary():
        raise ValueError(f"response column {name!r} is not binary 0/1")

    outcome = classify_mortality(sample, threshold=float(cfg["threshold"]))
    risk = assign_risk_groups(outcome)
    labels = list(risk)
    if cfg["stratify_age"]:
        ages = [cov["age"] for cov in covariates]
        strata = stratify_age(ages)
        labels = [f"{r}/{s}" for r, s in zip(risk, strata)]

    out = _RunOutputs(Path(args.out))
    try:
        io.write_rows(
            out.path("predictions.csv"),
            ["subject_id", "probability", "predicted_label", "actual_label",
             "survey_weight", "risk_group"],
            (
                [sid, p, int(pred), int(act), w, grp]
                for sid, p, pred, act, w, grp in zip(
                    ids, outcome.probabilities, outcome.predicted,
                    outcome.actual, outcome.weights, risk)
            ),
        )
        io.write_rows(
            out.path("confusion.csv"),
            ["tp", "fp", "tn", "fn", "weighted_accuracy", "auc",
             "threshold", "bandwidth"],
            [[outcome.tp, outcome.fp, outcome.tn, outcome.fn,
              outcome.weighted_accuracy, outcome.auc,
              outcome.threshold, outcome.bandwidth]],
        )
        io.write_rows(out.path("risk_groups.csv"), ["subject_id", "group"],
                       zip(ids, risk))
        profiles = group_profiles(grids, weights, labels)
        io.write_frechet_summary_csv(out.path("group_profiles.csv"), profiles)
    except Exception:
        out.cleanup()
        raise
    return 0


def _population_spec_from_config(cfg: dict) -> datagen.PopulationSpec:
    pop = cfg.get("population")
    if not isinstance(pop, dict) or "strata" not in pop:
        raise ValueError("config must define population.strata")
    strata = []
    for entry in pop["strata"]:
        intensity = datagen.IntensityLaw(entry["intensity"]["kind"],
                                         tuple(entry["intensity"]["params"]))
        response = None
        if entry.get("response"):
            response = datagen.ResponseModel(**entry["response"])
        strata.append(datagen.StratumSpec(
            name=entry["name"],
            proportion=float(entry["proportion"]),
            inactivity_range=tuple(entry["inactivity_range"]),
            intensity=intensity,
            age_range=tuple(entry.get("age_range", (68, 85))),
            mortality_rate=float(entry.get("mortality_rate", 0.0)),
            response=response,
        ))
    return datagen.PopulationSpec(
        size=int(pop["size"]),
        strata=tuple(strata),
        minutes=int(pop.get("minutes", 1440)),
        seed=int(cfg["seed"]),
    )


def _design_from_config(cfg: dict):
    design = cfg.get("design")
    if not isinstance(design, dict) or "kind" not in design:
        raise ValueError("config must define design.kind")
    if design["kind"] == "stratified":
        return datagen.StratifiedDesign(fractions=dict(design["fractions"]))
    if design["kind"] == "poisson":
        return datagen.PoissonDesign(
            expected_n=int(design["expected_n"]),
            size_covariate=design.get("size_covariate"),
        )
    raise ValueError(f"unknown design kind {design['kind']!r}")


def cmd_simulate(args) -> int:
    cfg = _merged(args, "simulate")
    spec = _population_spec_from_config(cfg)
    design = _design_from_config(cfg)

    population, truth = datagen.simulate_population(spec)
    pi = datagen.inclusion_probabilities(population, design)
    sample = datagen.draw_sample(population, design, seed=int(cfg["sample_seed"]))

    out = _RunOutputs(Path(args.out))
    try:
        io.write_readings_csv(out.path("population_readings.csv"), population)
        io.write_subjects_csv(out.path("population_subjects.csv"), population)
        io.write_readings_csv(out.path("sample_readings.csv"), sample)
        io.write_subjects_csv(out.path("sample_subjects.csv"), sample)
        io.write_ground_truth_csv(out.path("ground_truth.csv"), truth, population, pi)
    except Exception:
        out.cleanup()
        raise
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    ids, grids = io.read_quantile_csv(args.input)
    preds = krr_predict_batch(model, grids)
    out = _RunOutputs(Path(args.out))
    try:
        io.write_rows(out.path("predictions.csv"), ["subject_id", "prediction"],
                       zip(ids, preds))
    except Exception:
        out.cleanup()
        raise
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actidist",
        description="Activity-distribution representations and survey regression.",
    )
    parser.add_argument("--print-config", action="store_true",
                        help="print built-in defaults for every subcommand and exit")
    sub = parser.add_subparsers(dest="command")

    def common(p, needs_subjects=True):
        p.add_argument("--input", required=True, help="input CSV")
        if needs_subjects:
            p.add_argument("--subjects", required=True, help="subject metadata CSV")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--seed", type=int, help="random seed")

    p = sub.add_parser("build-dist", help="raw readings to quantile grids")
    common(p)
    p.add_argument("--m", type=int, help="quantile grid size")
    p.add_argument("--censor-lower", dest="censor_lower", type=float,
                   help="inactivity cutoff; readings at or below collapse onto it")
    p.add_argument("--censor-upper", dest="censor_upper", type=float,
                   help="upper truncation for high-intensity readings")

    p = sub.add_parser("regress", help="distribution-vs-TAC R-square report")
    common(p)
    p.add_argument("--responses", help="comma-separated response column names")
    p.add_argument("--summary", help="summary CSV with exact tac_per_day")
    p.add_argument("--save-models", dest="save_models", action="store_const",
                   const=True, help="persist one fitted model per response")

    p = sub.add_parser("classify", help="five-year mortality classification")
    common(p)
    p.add_argument("--response", help="binary response column (default mortality)")
    p.add_argument("--threshold", type=float, help="classification threshold")
    p.add_argument("--stratify-age", dest="stratify_age", action="store_const",
                   const=True, help="profile groups by risk group and age stratum")

    p = sub.add_parser("simulate", help="synthetic population and survey sample")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", required=True, help="JSON population/design config")
    p.add_argument("--seed", type=int, help="population seed override")
    p.add_argument("--sample-seed", dest="sample_seed", type=int,
                   help="sampling seed override")

    p = sub.add_parser("predict", help="score a quantile table with a saved model")
    p.add_argument("--model", required=True, help="model JSON artifact")
    p.add_argument("--input", required=True, help="quantile CSV")
    p.add_argument("--out", required=True, help="output directory")

    return parser


_COMMANDS = {
    "build-dist": cmd_build_dist,
    "regress": cmd_regress,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "predict": cmd_predict,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.print_config:
        print(json.dumps(DEFAULTS, indent=2))
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
