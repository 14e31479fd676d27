"""Stratified splits, macro-averaged metrics and confusion matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .core import LabeledDataset, Rng
from .errors import ClassTooSmall, LengthMismatch


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    validation_fraction: float = 0.2
    stratified: bool = True
    with_validation: bool = True

    def __post_init__(self):
        for f in (self.test_fraction, self.validation_fraction):
            if not 0.0 < f < 1.0:
                raise ValueError("split fractions must lie in (0, 1)")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _carve(indices: np.ndarray, fraction: float, rng: Rng) -> tuple[np.ndarray, np.ndarray]:
    shuffled = rng.permutation(indices)
    n = shuffled.size
    k = min(max(1, _round_half_up(n * fraction)), n - 1)
    return np.sort(shuffled[k:]), np.sort(shuffled[:k])


def split_indices(labels: Sequence[int], spec: SplitSpec, rng: Rng) -> dict[str, np.ndarray]:
    """Index arrays ``train``/``test`` (and ``validation``), stratified per class.

    Each class contributes ``round(n * fraction)`` samples (at least one) to
    the held-out part.  Validation is carved out of the training part.
    """
    labels = np.asarray(labels)
    need = 3 if spec.with_validation else 2
    if spec.stratified:
        groups = [np.flatnonzero(labels == c) for c in np.unique(labels)]
    else:
        groups = [np.arange(labels.size)]
    for c, g in zip(np.unique(labels), groups):
        if g.size < need:
            raise ClassTooSmall(f"class {c} has {g.size} samples, needs >= {need}")
    out = {"train": [], "test": []}
    if spec.with_validation:
        out["validation"] = []
    for g in groups:
        train, test = _carve(g, spec.test_fraction, rng)
        if spec.with_validation:
            train, val = _carve(train, spec.validation_fraction, rng)
            out["validation"].append(val)
        out["train"].append(train)
        out["test"].append(test)
    return {k: np.sort(np.concatenate(v)) for k, v in out.items()}


def stratified_split(dataset: LabeledDataset, spec: SplitSpec, rng: Rng):
    """Split into ``(train, test)`` or ``(train, validation, test)`` datasets."""
    idx = split_indices(dataset.label_indices(), spec, rng)
    if spec.with_validation:
        return dataset.subset(idx["train"]), dataset.subset(idx["validation"]), dataset.subset(idx["test"])
    return dataset.subset(idx["train"]), dataset.subset(idx["test"])


@dataclass(frozen=True, eq=False)
class ClassMetrics:
    classes: tuple
    precision: np.ndarray
    recall: np.ndarray
    f_score: np.ndarray
    support: np.ndarray

    @property
    def macro_precision(self) -> float:
        return float(np.mean(self.precision))

    @property
    def macro_recall(self) -> float:
        return float(np.mean(self.recall))

    @property
    def macro_f(self) -> float:
        return float(np.mean(self.f_score))


def _encode(truth, predicted, classes):
    if len(truth) != len(predicted):
        raise LengthMismatch(f"{len(truth)} true labels vs {len(predicted)} predictions")
    index = {c: i for i, c in enumerate(classes)}
    try:
        t = np.array([index[c] for c in truth], dtype=np.int64)
        p = np.array([index[c] for c in predicted], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} not in classes") from None
    return t, p


def confusion_counts(truth, predicted, classes) -> np.ndarray:
    t, p = _encode(truth, predicted, classes)
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return counts


def macro_metrics(truth, predicted, classes) -> ClassMetrics:
    """One-vs-rest precision, recall and F-score per class and their macro mean.

    Zero denominators give 0; classes absent from ``truth`` still count in
    the macro average.
    """
    counts = confusion_counts(truth, predicted, classes)
    tp = np.diag(counts).astype(np.float64)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp
    with np.errstate(divide="ignore", invalid="ignore"):
        pr = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        re = np.where(tp + fn > 0, tp / (tp + fn), 0.0)
        f = np.where(pr + re > 0, 2 * pr * re / (pr + re), 0.0)
    return ClassMetrics(tuple(classes), pr, re, f, counts.sum(axis=1))


def normalize_rows_to_100(counts: np.ndarray) -> np.ndarray:
    """Integer row percentages summing to exactly 100 (largest remainder).

    Empty rows stay zero.  Remainder ties go to the lower column index.
    """
    counts = np.asarray(counts)
    out = np.zeros(counts.shape, dtype=np.int64)
    for i, row in enumerate(counts):
        total = row.sum()
        if total == 0:
            continue
        exact = row * 100.0 / total
        base = np.floor(exact).astype(np.int64)
        missing = 100 - int(base.sum())
        order = np.argsort(-(exact - base), kind="stable")
        base[order[:missing]] += 1
        out[i] = base
    return out


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    classes: tuple
    counts: np.ndarray

    @property
    def normalized(self) -> np.ndarray:
        return normalize_rows_to_100(self.counts)


def confusion(truth, predicted, classes) -> ConfusionMatrix:
    return ConfusionMatrix(tuple(classes), confusion_counts(truth, predicted, classes))


@dataclass(eq=False)
class EvalReport:
    """Scores of one model/classifier pair on the test set."""

    model: dict[str, Any]
    metrics: ClassMetrics
    confusion: ConfusionMatrix
    mean_active_power: np.ndarray
    n_train: int
    n_test: int
    runtime_seconds: float = 0.0
    extra: dict[str, Any] = field(default_factory=dict)
    artifacts: dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def macro_f(self) -> float:
        return self.metrics.macro_f

    @property
    def label(self) -> str:
        clf = self.model.get("classifier")
        return f"{self.model['model']}+{clf}" if clf else self.model["model"]

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready form.  Runtime is left out so reports are reproducible."""
        m = self.metrics
        per_class = [
            {"class": c, "precision": float(m.precision[i]), "recall": float(m.recall[i]),
             "f_score": float(m.f_score[i]), "support": int(m.support[i]),
             "mean_active_power": float(self.mean_active_power[i])}
            for i, c in enumerate(m.classes)
        ]
        return {
            "model": self.model,
            "macro": {"precision": m.macro_precision, "recall": m.macro_recall, "f_score": m.macro_f},
            "per_class": per_class,
            "confusion": self.confusion.counts.tolist(),
            "confusion_normalized": self.confusion.normalized.tolist(),
            "n_train": self.n_train,
            "n_test": self.n_test,
            **({"extra": self.extra} if self.extra else {}),
        }
