"""Loan CSV ingestion, imputation, ordinal encoding and z-scoring."""
from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import DataError

logger = logging.getLogger(__name__)

ID_COLUMN = "Loan_ID"
LABEL_COLUMN = "Loan_Status"

CATEGORICAL_LEVELS = {
    "Gender": ("Female", "Male"),
    "Married": ("No", "Yes"),
    "Education": ("Not Graduate", "Graduate"),
    "Self_Employed": ("No", "Yes"),
    "Property_Area": ("Rural", "Semiurban", "Urban"),
}
NUMERIC_COLUMNS = (
    "Dependents",
    "ApplicantIncome",
    "CoapplicantIncome",
    "LoanAmount",
    "Loan_Amount_Term",
    "Credit_History",
)
MANDATORY_COLUMNS = (ID_COLUMN,) + tuple(CATEGORICAL_LEVELS) + NUMERIC_COLUMNS

DEFAULT_FEATURES = (
    "Credit_History",
    "ApplicantIncome",
    "CoapplicantIncome",
    "LoanAmount",
    "Loan_Amount_Term",
    "Property_Area",
)

LABEL_CODES = {"Y": 1, "N": 0}


@dataclass
class RawRecord:
    loan_id: str
    values: dict
    loan_status: Optional[str] = None
    row: int = 0

    def get(self, column):
        return self.values.get(column)


@dataclass
class Sample:
    features: np.ndarray
    label: Optional[int]
    loan_id: str = ""


@dataclass
class Dataset:
    X: np.ndarray
    y: Optional[np.ndarray] = None
    ids: list = field(default_factory=list)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=float)
            if self.y.shape != (len(self.X),):
                raise ValueError(f"label vector shape {self.y.shape} does not match {len(self.X)} samples")

    def __len__(self):
        return len(self.X)

    @property
    def labeled(self) -> bool:
        return self.y is not None

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], n_features: Optional[int] = None) -> "Dataset":
        if not samples:
            return cls(np.zeros((0, n_features or 0)), None if n_features is None else np.zeros(0))
        X = np.stack([s.features for s in samples])
        labels = [s.label for s in samples]
        y = None if any(lab is None for lab in labels) else np.array(labels, dtype=float)
        return cls(X, y, [s.loan_id for s in samples])


@dataclass
class NormalizationStats:
    feature_set: list
    mean: list
    std: list
    fill: dict

    def to_dict(self) -> dict:
        return {"feature_set": self.feature_set, "mean": self.mean, "std": self.std, "fill": self.fill}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationStats":
        return cls(list(d["feature_set"]), list(d["mean"]), list(d["std"]), dict(d["fill"]))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "NormalizationStats":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def load_csv(path) -> list:
    """Read a loan-eligibility CSV into ``RawRecord`` objects; blank cells become None."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: cannot read file ({exc})") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in MANDATORY_COLUMNS if c not in header]
        if missing:
            raise DataError(f"{path}: missing mandatory column(s) {', '.join(missing)}")
        records, seen = [], {}
        for row_no, row in enumerate(reader, start=2):
            loan_id = (row.get(ID_COLUMN) or "").strip()
            if not loan_id:
                raise DataError(f"{path}: row {row_no}: empty {ID_COLUMN}")
            if loan_id in seen:
                raise DataError(f"{path}: row {row_no}: duplicate {ID_COLUMN} {loan_id!r} (first seen row {seen[loan_id]})")
            seen[loan_id] = row_no
            values = {}
            for col in MANDATORY_COLUMNS[1:]:
                cell = (row.get(col) or "").strip()
                values[col] = cell or None
            status = (row.get(LABEL_COLUMN) or "").strip() or None
            records.append(RawRecord(loan_id, values, status, row_no))
    return records


def _parse_numeric(record: RawRecord, column: str) -> Optional[float]:
    cell = record.get(column)
    if cell is None:
        return None
    if column == "Dependents" and cell == "3+":
        return 3.0
    try:
        return float(cell)
    except ValueError as exc:
        raise DataError(f"row {record.row}: column {column}: cannot parse {cell!r} as a number") from exc


def _raw_column(records, column):
    if column in CATEGORICAL_LEVELS:
        return [r.get(column) for r in records]
    if column in NUMERIC_COLUMNS:
        return [_parse_numeric(r, column) for r in records]
    raise DataError(f"unknown feature column {column!r}")


def _fit_fill(values, column):
    present = [v for v in values if v is not None]
    if not present:
        raise DataError(f"column {column} has no values to impute from")
    if column in CATEGORICAL_LEVELS:
        levels = CATEGORICAL_LEVELS[column]
        known = [v for v in present if v in levels]
        if not known:
            raise DataError(f"column {column} has no recognised levels")
        # mode; ties resolve to the earliest level in the documented order
        counts = [known.count(level) for level in levels]
        return levels[int(np.argmax(counts))]
    return float(np.median(present))


def _encode_column(values, column, fill):
    levels = CATEGORICAL_LEVELS.get(column)
    out = []
    for v in values:
        if v is None:
            v = fill
        if levels is not None:
            if v not in levels:
                logger.warning("column %s: unknown level %r mapped to training mode %r", column, v, fill)
                v = fill
            v = float(levels.index(v))
        out.append(v)
    return np.array(out, dtype=float)


def label_of(record: RawRecord) -> Optional[int]:
    if record.loan_status is None:
        return None
    try:
        return LABEL_CODES[record.loan_status]
    except KeyError:
        raise DataError(f"row {record.row}: unknown {LABEL_COLUMN} {record.loan_status!r}") from None


def preprocess(records, stats: Optional[NormalizationStats] = None, feature_set=DEFAULT_FEATURES,
               require_labels: bool = True):
    """Turn raw records into normalized samples.

    When ``stats`` is None the fill values, means and (population) standard
    deviations are computed from ``records``; otherwise the supplied training
    statistics are applied. Returns ``(samples, stats)``.
    """
    feature_set = list(feature_set)
    if stats is not None and list(stats.feature_set) != feature_set:
        raise DataError(f"feature set {feature_set} does not match statistics for {stats.feature_set}")
    if stats is None and not records:
        raise DataError("cannot compute normalization statistics from an empty record list")

    labels = [label_of(r) for r in records]
    if require_labels:
        unlabeled = [r for r, lab in zip(records, labels) if lab is None]
        if unlabeled:
            raise DataError(f"row {unlabeled[0].row}: missing {LABEL_COLUMN} (use prediction-only mode)")

    columns, fill = [], {}
    for col in feature_set:
        values = _raw_column(records, col)
        fill[col] = stats.fill[col] if stats is not None else _fit_fill(values, col)
        columns.append(_encode_column(values, col, fill[col]))
    raw = np.stack(columns, axis=1) if records else np.zeros((0, len(feature_set)))

    if stats is None:
        mean = raw.mean(axis=0)
        std = raw.std(axis=0)
        constant = [c for c, s in zip(feature_set, std) if not s > 0]
        if constant:
            raise DataError(f"constant feature column(s) cannot be normalized: {', '.join(constant)}")
        stats = NormalizationStats(feature_set, mean.tolist(), std.tolist(), fill)
    X = (raw - np.array(stats.mean)) / np.array(stats.std)
    samples = [Sample(x, lab, r.loan_id) for x, r, lab in zip(X, records, labels)]
    return samples, stats


def split(items, test_fraction: float, seed, labels=None):
    """Stratified, seeded partition of ``items`` into ``(train, test)`` lists.

    ``labels`` defaults to each item's ``label`` attribute.
    """
    if not 0 < test_fraction < 1:
        raise ValueError(f"test_fraction must lie strictly between 0 and 1, got {test_fraction}")
    if labels is None:
        labels = [item.label for item in items]
    labels = list(labels)
    rng = np.random.default_rng(seed)
    test_idx = []
    for cls in sorted(set(labels), key=str):
        members = [i for i, lab in enumerate(labels) if lab == cls]
        if len(members) < 2:
            raise DataError(f"class {cls!r} has fewer than 2 members; cannot stratify")
        members = [members[i] for i in rng.permutation(len(members))]
        n_test = min(max(1, int(round(test_fraction * len(members)))), len(members) - 1)
        test_idx.extend(members[:n_test])
    test_set = set(test_idx)
    train = [item for i, item in enumerate(items) if i not in test_set]
    test = [item for i, item in enumerate(items) if i in test_set]
    return train, test


def has_labels(records) -> bool:
    return bool(records) and all(r.loan_status is not None for r in records)


def write_samples(path, samples: Sequence[Sample]) -> None:
    n = len(samples[0].features) if samples else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["loan_id"] + [f"f{i}" for i in range(n)] + ["label"])
        for s in samples:
            label = "" if s.label is None else str(int(s.label))
            writer.writerow([s.loan_id] + [repr(float(v)) for v in s.features] + [label])


def read_samples(path) -> list:
    if not os.path.exists(path):
        raise DataError(f"{path}: file not found")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "loan_id" or header[-1] != "label":
            raise DataError(f"{path}: not a preprocessed sample file")
        samples = []
        for row_no, row in enumerate(reader, start=2):
            try:
                features = np.array([float(v) for v in row[1:-1]])
            except ValueError as exc:
                raise DataError(f"{path}: row {row_no}: {exc}") from exc
            label = int(row[-1]) if row[-1] != "" else None
            samples.append(Sample(features, label, row[0]))
    return samples
