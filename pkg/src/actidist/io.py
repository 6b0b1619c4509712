"""CSV input and output for the batch pipeline.

All files are comma-separated UTF-8 with a mandatory header row and '.' as
the decimal separator. Floats are written with repr-style shortest
round-trip formatting so reruns on identical inputs are byte-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .distribution import ActivitySeries, QuantileGrid


class InputValidationError(ValueError):
    """Malformed input rows; the message carries the offending line numbers."""


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_rows(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_readings_csv(path) -> dict:
    """Long-format readings (subject_id, timestamp_min, count) grouped by subject.

    Collects every malformed row and reports them together with their line
    numbers, so a dirty file surfaces all problems in one pass.
    """
    per_subject: dict = {}
    bad: list[str] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != [
                "subject_id", "timestamp_min", "count"]:
            raise InputValidationError(
                f"{path}: expected header subject_id,timestamp_min,count")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                bad.append(f"line {lineno}: expected 3 fields")
                continue
            sid = row[0].strip()
            try:
                t = float(row[1])
                count = float(row[2])
            except ValueError:
                bad.append(f"line {lineno}: non-numeric value")
                continue
            if count < 0:
                bad.append(f"line {lineno}: negative count")
                continue
            per_subject.setdefault(sid, ([], []))
            per_subject[sid][0].append(t)
            per_subject[sid][1].append(count)
    if bad:
        raise InputValidationError(f"{path}: " + "; ".join(bad))
    if not per_subject:
        raise InputValidationError(f"{path}: no data rows")
    return per_subject


def read_subject_readings_csv(path, subject_id=None) -> dict:
    """Single-subject readings file (timestamp_min, count)."""
    sid = subject_id if subject_id is not None else Path(path).stem
    out = ([], [])
    bad: list[str] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["timestamp_min", "count"]:
            raise InputValidationError(f"{path}: expected header timestamp_min,count")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                t, count = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                bad.append(f"line {lineno}: malformed row")
                continue
            if count < 0:
                bad.append(f"line {lineno}: negative count")
                continue
            out[0].append(t)
            out[1].append(count)
    if bad:
        raise InputValidationError(f"{path}: " + "; ".join(bad))
    return {sid: out}


def _parse_covariate(text: str):
    try:
        value = float(text)
    except ValueError:
        return text
    return int(value) if value.is_integer() and "." not in text else value


def read_subjects_csv(path) -> dict:
    """Subject metadata keyed by id: (survey_weight, covariates)."""
    out: dict = {}
    bad: list[str] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "subject_id" not in reader.fieldnames \
                or "survey_weight" not in reader.fieldnames:
            raise InputValidationError(
                f"{path}: expected columns subject_id and survey_weight")
        for lineno, row in enumerate(reader, start=2):
            sid = (row.get("subject_id") or "").strip()
            try:
                weight = float(row["survey_weight"])
            except (TypeError, ValueError):
                bad.append(f"line {lineno}: bad survey_weight")
                continue
            if weight <= 0 or not sid:
                bad.append(f"line {lineno}: bad subject row")
                continue
            covariates = {
                key: _parse_covariate(val)
                for key, val in row.items()
                if key not in ("subject_id", "survey_weight") and val not in (None, "")
            }
            out[sid] = (weight, covariates)
    if bad:
        raise InputValidationError(f"{path}: " + "; ".join(bad))
    return out


def load_series(readings_path, subjects_path) -> list:
    """Join readings and subject metadata into ActivitySeries objects."""
    readings = read_readings_csv(readings_path)
    subjects = read_subjects_csv(subjects_path)
    missing = sorted(set(readings) - set(subjects))
    if missing:
        raise InputValidationError(
            f"subjects file lacks entries for: {', '.join(missing)}")
    series = []
    for sid in sorted(readings):
        t, counts = readings[sid]
        order = np.argsort(t, kind="stable")
        weight, covariates = subjects[sid]
        series.append(ActivitySeries(
            subject_id=sid,
            timestamps=np.asarray(t)[order],
            readings=np.asarray(counts)[order],
            survey_weight=weight,
            covariates=covariates,
        ))
    return series


def read_summary_csv(path) -> dict:
    """Read a distribution summary back as {subject_id: (p_inactive, tac)}."""
    out: dict = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"subject_id", "p_inactive", "tac_per_day"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise InputValidationError(f"{path}: not a summary table")
        for row in reader:
            out[row["subject_id"]] = (float(row["p_inactive"]),
                                      float(row["tac_per_day"]))
    return out


def write_quantile_csv(path, subject_ids, grids) -> None:
    """Quantile-grid table: one row per subject, columns t_1..t_m."""
    m = grids[0].m
    header = ["subject_id"] + [f"t_{k}" for k in range(1, m + 1)]
    rows = ([sid, *grid.values] for sid, grid in zip(subject_ids, grids))
    write_rows(path, header, rows)


def read_quantile_csv(path):
    """Read back a quantile table as (subject_ids, list of QuantileGrid)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "subject_id" or len(header) < 3:
            raise InputValidationError(f"{path}: not a quantile table")
        ids, grids = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputValidationError(f"{path}: line {lineno}: wrong field count")
            ids.append(row[0])
            try:
                grids.append(QuantileGrid(values=np.asarray(row[1:], dtype=float)))
            except ValueError as exc:
                raise InputValidationError(f"{path}: line {lineno}: {exc}") from exc
    return ids, grids


def write_summary_csv(path, subject_ids, mixed: list, tacs) -> None:
    """Per-subject distribution summary (p_inactive, tac_per_day)."""
    rows = (
        [sid, mix.p_inactive, tac]
        for sid, mix, tac in zip(subject_ids, mixed, tacs)
    )
    write_rows(path, ["subject_id", "p_inactive", "tac_per_day"], rows)


def write_distance_matrix_csv(path, subject_ids, matrix: np.ndarray) -> None:
    """Square subject-by-subject distance matrix."""
    header = ["subject_id"] + list(subject_ids)
    rows = ([sid, *matrix[i]] for i, sid in enumerate(subject_ids))
    write_rows(path, header, rows)


def write_frechet_summary_csv(path, summaries: dict) -> None:
    """Per-group Frechet curves: (group, t, mean, sd) rows."""
    def rows():
        for group, summary in summaries.items():
            levels = summary.mean.levels
            for t, mu, sd in zip(levels, summary.mean.values, summary.pointwise_sd):
                yield [group, t, mu, sd]
    write_rows(path, ["group", "t", "mean", "sd"], rows())


def write_subjects_csv(path, subjects) -> None:
    """Subject metadata table; covariate columns follow the common schema."""
    names: list = []
    for s in subjects:
        for key in s.covariates:
            if key not in names:
                names.append(key)
    header = ["subject_id", "survey_weight"] + names
    rows = (
        [s.subject_id, s.survey_weight] + [s.covariates.get(k, "") for k in names]
        for s in subjects
    )
    write_rows(path, header, rows)


def write_readings_csv(path, subjects) -> None:
    """Long-format readings for a list of subjects."""
    def rows():
        for s in subjects:
            for t, c in zip(s.timestamps, s.readings):
                yield [s.subject_id, t, c]
    write_rows(path, ["subject_id", "timestamp_min", "count"], rows())


def write_ground_truth_csv(path, true_means: dict, subjects, pi: np.ndarray) -> None:
    """Long-format ground truth: population means plus per-subject stratum and pi."""
    def rows():
        for name in sorted(true_means):
            yield ["population_mean", name, true_means[name]]
        for s in subjects:
            yield ["stratum", s.subject_id, s.covariates.get("stratum", "all")]
        for s, p in zip(subjects, pi):
            yield ["pi", s.subject_id, p]
    write_rows(path, ["record", "name", "value"], rows())
