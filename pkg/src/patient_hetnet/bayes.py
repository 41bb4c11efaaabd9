"""Naive Bayes stroke-risk scoring for outpatients.

Four categorical features are used, each with three levels:

==========  ============================  =====================================
feature     raw reading                   levels (lower edge inclusive)
==========  ============================  =====================================
f1          total cholesterol, mg/dl      Optimal <200, Normal 200-239, High 240+
f2          systolic BP, mmHg             Normal <120, Pre-hypertension 120-139,
                                          High Hypertension 140+
f3          diastolic BP, mmHg            Normal <80, Pre-hypertension 80-89,
                                          High Hypertension 90+
f4          smoking, cigarettes/day       Light <=10 (0 included), Moderate
                                          11-19, Heavy 20+
==========  ============================  =====================================

The classifier is trained on one outpatient's daily record and queried with
the current sensor state. Its normalized posterior for ``stroke = yes`` is the
stroke likelihood ``delta`` that sets the user priority ``1 + alpha * delta``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "FEATURES",
    "LEVELS",
    "CLASSES",
    "CurrentState",
    "RecordRow",
    "MedicalRecord",
    "TrainedClassifier",
    "ClassifierMetrics",
    "DegenerateTrainingError",
    "discretize",
    "train",
    "posterior",
    "classify",
    "evaluate",
    "priority",
    "builtin_current_states",
    "read_record_csv",
    "write_record_csv",
    "synthetic_raw_rows",
    "synthetic_record",
    "builtin_records",
]

FEATURES = ("cholesterol", "systolic", "diastolic", "smoking")

LEVELS: tuple[tuple[str, ...], ...] = (
    ("Optimal", "Normal", "High"),
    ("Normal", "Pre-hypertension", "High Hypertension"),
    ("Normal", "Pre-hypertension", "High Hypertension"),
    ("Light", "Moderate", "Heavy"),
)

CLASSES = ("yes", "no")

# lower edges of the 2nd and 3rd band of each feature
_CUTS = ((200.0, 240.0), (120.0, 140.0), (80.0, 90.0), (11.0, 20.0))

RAW_HEADER = ("day", "total_cholesterol", "systolic_bp", "diastolic_bp", "cigarettes_per_day", "stroke")
LEVEL_HEADER = ("day", "f1", "f2", "f3", "f4", "stroke")


class DegenerateTrainingError(ValueError):
    """Both class scores vanished, so the posterior is 0/0."""


@dataclass(frozen=True)
class CurrentState:
    """One level per feature, in feature order."""

    cholesterol: str
    systolic: str
    diastolic: str
    smoking: str

    def __post_init__(self):
        for i, level in enumerate(self.levels):
            if level not in LEVELS[i]:
                raise ValueError(
                    f"{level!r} is not a level of feature f{i + 1} ({FEATURES[i]}); "
                    f"expected one of {LEVELS[i]}"
                )

    @property
    def levels(self) -> tuple[str, str, str, str]:
        return (self.cholesterol, self.systolic, self.diastolic, self.smoking)

    def __iter__(self):
        return iter(self.levels)

    def __str__(self):
        return ", ".join(self.levels)


class RecordRow(NamedTuple):
    day: int
    state: CurrentState
    label: str  # "yes" | "no"


@dataclass(frozen=True)
class MedicalRecord:
    """Daily observations of one outpatient with stroke labels."""

    rows: tuple[RecordRow, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        if len(rows) < 2:
            raise ValueError(f"a medical record needs at least 2 rows, got {len(rows)}")
        for r in rows:
            if r.label not in CLASSES:
                raise ValueError(f"label must be one of {CLASSES}, got {r.label!r}")
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return len(self.rows)

    @classmethod
    def from_levels(cls, rows: Iterable[tuple[Sequence[str], str]]) -> "MedicalRecord":
        """Build from ``[(levels, label), ...]``; days are numbered from 1."""
        return cls(
            tuple(RecordRow(i + 1, CurrentState(*levels), label) for i, (levels, label) in enumerate(rows))
        )


def discretize(cholesterol: float, systolic: float, diastolic: float, cigarettes: float) -> CurrentState:
    """Map raw sensor readings onto feature levels.

    Non-smokers (0 cigarettes/day) are put in the ``Light`` band, which is
    the lowest one available.

    >>> discretize(195, 118, 78, 5)
    CurrentState(cholesterol='Optimal', systolic='Normal', diastolic='Normal', smoking='Light')
    """
    raw = (cholesterol, systolic, diastolic, cigarettes)
    levels = []
    for i, value in enumerate(raw):
        value = float(value)
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"{FEATURES[i]} reading must be a non-negative number, got {value}")
        lo, hi = _CUTS[i]
        levels.append(LEVELS[i][0 if value < lo else 1 if value < hi else 2])
    return CurrentState(*levels)


@dataclass(frozen=True)
class TrainedClassifier:
    """Count tables of a categorical naive Bayes model.

    Attributes:
        class_counts: ``{class: N(C=c)}``.
        feature_counts: per feature, ``{(level, class): N(F_i=level, C=c)}``.
        smoothing: additive (Laplace) pseudo-count.
    """

    class_counts: dict
    feature_counts: tuple
    smoothing: float = 1.0

    @property
    def total(self) -> int:
        return sum(self.class_counts.values())

    def prior(self, c: str) -> float:
        """``N(C=c) / N``. If a class never occurs and smoothing is on, both
        priors get the same additive treatment over the two classes."""
        n_c = self.class_counts[c]
        if self.smoothing > 0 and min(self.class_counts.values()) == 0:
            return (n_c + self.smoothing) / (self.total + self.smoothing * len(CLASSES))
        return n_c / self.total

    def cond(self, feature: int, level: str, c: str) -> float:
        """Smoothed ``P(F_feature = level | C = c)``."""
        if level not in LEVELS[feature]:
            raise ValueError(f"{level!r} is not a level of feature f{feature + 1}")
        num = self.feature_counts[feature].get((level, c), 0) + self.smoothing
        den = self.class_counts[c] + self.smoothing * len(LEVELS[feature])
        if den == 0:
            return 0.0
        return num / den

    def joint(self, state: CurrentState, c: str) -> float:
        """Unnormalized class score ``P(C=c) * prod_i P(F_i=f_i | C=c)``."""
        u = self.prior(c)
        for i, level in enumerate(state.levels):
            u *= self.cond(i, level, c)
        return u

    def to_dict(self) -> dict:
        return {
            "smoothing": self.smoothing,
            "class_counts": dict(self.class_counts),
            "priors": {c: self.prior(c) for c in CLASSES},
            "features": [
                {
                    "name": FEATURES[i],
                    "counts": {
                        c: {lv: self.feature_counts[i].get((lv, c), 0) for lv in LEVELS[i]} for c in CLASSES
                    },
                    "conditional": {c: {lv: self.cond(i, lv, c) for lv in LEVELS[i]} for c in CLASSES},
                }
                for i in range(len(FEATURES))
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedClassifier":
        fc = []
        for i, feat in enumerate(d["features"]):
            fc.append({(lv, c): int(n) for c, by_level in feat["counts"].items() for lv, n in by_level.items()})
        return cls(dict(d["class_counts"]), tuple(fc), float(d["smoothing"]))


def train(record: MedicalRecord, smoothing: float = 1.0) -> TrainedClassifier:
    """Tally class and (level, class) frequencies of ``record``."""
    if smoothing < 0 or not math.isfinite(smoothing):
        raise ValueError(f"smoothing must be a finite number >= 0, got {smoothing}")
    if not record.rows:
        raise ValueError("cannot train on an empty record")
    class_counts = {c: 0 for c in CLASSES}
    feature_counts: list[dict] = [{} for _ in FEATURES]
    for row in record.rows:
        class_counts[row.label] += 1
        for i, level in enumerate(row.state.levels):
            key = (level, row.label)
            feature_counts[i][key] = feature_counts[i].get(key, 0) + 1
    return TrainedClassifier(class_counts, tuple(feature_counts), float(smoothing))


def posterior(clf: TrainedClassifier, state: CurrentState, positive: str = "yes") -> float:
    """Normalized two-class posterior of ``positive`` (the stroke likelihood)."""
    if positive not in CLASSES:
        raise ValueError(f"unknown class {positive!r}")
    other = CLASSES[1] if positive == CLASSES[0] else CLASSES[0]
    u_pos = clf.joint(state, positive)
    u_neg = clf.joint(state, other)
    if u_pos + u_neg == 0:
        raise DegenerateTrainingError(
            f"both class scores are zero for state ({state}); the record never shows "
            "these levels (train with smoothing > 0)"
        )
    return u_pos / (u_pos + u_neg)


def classify(clf: TrainedClassifier, state: CurrentState) -> str:
    """``"yes"`` when the stroke likelihood is at least 0.5 (ties raise the alarm)."""
    return "yes" if posterior(clf, state) >= 0.5 else "no"


@dataclass(frozen=True)
class ClassifierMetrics:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def fpr(self) -> float | None:
        """``FP / (FP + TN)``; ``None`` without negative rows."""
        neg = self.fp + self.tn
        return self.fp / neg if neg else None

    @property
    def tpr(self) -> float | None:
        pos = self.tp + self.fn
        return self.tp / pos if pos else None

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn, "tpr": self.tpr, "fpr": self.fpr}


def evaluate(clf: TrainedClassifier, labeled: MedicalRecord, predict=None) -> ClassifierMetrics:
    """Confusion counts of ``predict`` (default :func:`classify`) on ``labeled``."""
    predict = predict or (lambda state: classify(clf, state))
    tp = fp = tn = fn = 0
    for row in labeled.rows:
        pred = predict(row.state)
        if pred == "yes":
            if row.label == "yes":
                tp += 1
            else:
                fp += 1
        elif row.label == "no":
            tn += 1
        else:
            fn += 1
    return ClassifierMetrics(tp, fp, tn, fn)


def priority(delta: float, alpha: float, is_outpatient: bool) -> float:
    """User priority weight: 1 for normal users, ``1 + alpha * delta`` for outpatients."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    if not is_outpatient:
        return 1.0
    return 1.0 + alpha * delta


_TABLE_STATES = (
    ("Normal", "Pre-hypertension", "Normal", "Heavy"),
    ("High", "High Hypertension", "Normal", "Light"),
    ("Normal", "High Hypertension", "High Hypertension", "Moderate"),
    ("High", "High Hypertension", "High Hypertension", "Heavy"),
    ("Normal", "High Hypertension", "Pre-hypertension", "Light"),
    ("Normal", "High Hypertension", "High Hypertension", "Light"),
    ("High", "High Hypertension", "High Hypertension", "Light"),
)


def builtin_current_states() -> list[CurrentState]:
    """The seven reference outpatient states, in order."""
    return [CurrentState(*levels) for levels in _TABLE_STATES]


# -- record files --------------------------------------------------------------


def read_record_csv(source) -> MedicalRecord:
    """Load a record from CSV.

    Two headers are accepted: raw readings
    (``day,total_cholesterol,systolic_bp,diastolic_bp,cigarettes_per_day,stroke``),
    discretized on load, or level names (``day,f1,f2,f3,f4,stroke``).
    ``source`` is a path or a file-like object.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(h.strip() for h in next(reader))
    except StopIteration:
        raise ValueError("empty CSV") from None
    if header not in (RAW_HEADER, LEVEL_HEADER):
        raise ValueError(f"unrecognized header {','.join(header)}; expected {','.join(RAW_HEADER)} "
                         f"or {','.join(LEVEL_HEADER)}")
    rows = []
    for line_no, fields in enumerate(reader, start=2):
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) != 6:
            raise ValueError(f"line {line_no}: expected 6 fields, got {len(fields)}")
        fields = [f.strip() for f in fields]
        try:
            day = int(fields[0])
            if header == RAW_HEADER:
                state = discretize(*(float(v) for v in fields[1:5]))
            else:
                state = CurrentState(*fields[1:5])
        except ValueError as exc:
            raise ValueError(f"line {line_no}: {exc}") from None
        label = fields[5].lower()
        if label not in CLASSES:
            raise ValueError(f"line {line_no}: stroke must be yes or no, got {fields[5]!r}")
        rows.append(RecordRow(day, state, label))
    return MedicalRecord(tuple(rows))


def write_record_csv(record: MedicalRecord, path) -> None:
    """Write a record in the level-name form."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LEVEL_HEADER)
        for r in record.rows:
            w.writerow([r.day, *r.state.levels, r.label])


# class-conditional means/sds of the raw readings used for synthetic records
_SYNTH = {
    "yes": ((245.0, 30.0), (145.0, 15.0), (91.0, 9.0), (18.0, 8.0)),
    "no": ((205.0, 30.0), (124.0, 14.0), (79.0, 8.0), (8.0, 6.0)),
}


def synthetic_raw_rows(seed: int, days: int = 30, stroke_rate: float = 0.4) -> list[tuple]:
    """Raw daily readings ``(day, chol, sys, dia, cigs, label)`` with
    class-dependent Gaussian readings, rounded to integers and clipped at 0."""
    rng = np.random.default_rng(seed)
    rows = []
    for day in range(1, days + 1):
        label = "yes" if rng.random() < stroke_rate else "no"
        vals = [max(0, int(round(rng.normal(mu, sd)))) for mu, sd in _SYNTH[label]]
        rows.append((day, *vals, label))
    return rows


def synthetic_record(seed: int, days: int = 30, stroke_rate: float = 0.4) -> MedicalRecord:
    """A record with Framingham-like marginals (no real patient data)."""
    return MedicalRecord(
        tuple(RecordRow(d, discretize(*vals), label) for d, *vals, label in synthetic_raw_rows(seed, days, stroke_rate))
    )


def builtin_records() -> list[MedicalRecord]:
    """The three packaged 30-day outpatient records (users 8, 9, 10)."""
    data = Path(__file__).with_name("data")
    return [read_record_csv(data / f"outpatient_{k}.csv") for k in (8, 9, 10)]
