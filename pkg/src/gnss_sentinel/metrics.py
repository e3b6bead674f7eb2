"""Classification metrics, stratified shuffle splitting, and grid search.

ROC curves are one-vs-rest per class: a threshold sweep over the distinct
scores with tied scores collapsed into single steps, so the trapezoidal
area equals the concordance probability P(s+ > s-) + 0.5 P(s+ = s-).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .rng import make_rng
from .tabular import TabularDataset

log = logging.getLogger(__name__)


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (K, K), entry (i, j) = true i predicted j

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.counts.sum())


@dataclass
class MetricsReport:
    accuracy: float
    precision: np.ndarray  # per class
    recall: np.ndarray
    f1: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


@dataclass
class RocResult:
    curves: dict[int, RocCurve]  # class code -> curve; absent classes omitted
    macro_auc: float
    absent_classes: list[int] = field(default_factory=list)


def confusion(y_true: np.ndarray, y_pred: np.ndarray, K: int) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) != len(y_pred):
        raise DataError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    for name, arr in (("true", y_true), ("predicted", y_pred)):
        if len(arr) and (arr.min() < 0 or arr.max() >= K):
            raise DataError(f"{name} labels outside 0..{K - 1}")
    counts = np.zeros((K, K), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts)


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    counts = cm.counts.astype(np.float64)
    if counts.sum() <= 0:
        raise DataError("empty confusion matrix")
    diag = np.diag(counts)
    col = counts.sum(axis=0)
    row = counts.sum(axis=1)
    precision = np.zeros(len(diag))
    recall = np.zeros(len(diag))
    for j in range(len(diag)):
        if col[j] > 0:
            precision[j] = diag[j] / col[j]
        else:
            log.warning("class %d never predicted; precision 0/0 reported as 0", j)
        if row[j] > 0:
            recall[j] = diag[j] / row[j]
        else:
            log.warning("class %d absent from truth; recall 0/0 reported as 0", j)
    f1 = np.zeros(len(diag))
    nonzero = (precision + recall) > 0
    f1[nonzero] = 2 * precision[nonzero] * recall[nonzero] / (precision[nonzero] + recall[nonzero])
    return MetricsReport(
        accuracy=cm.accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
    )


def _roc_curve_binary(positive: np.ndarray, scores: np.ndarray) -> RocCurve:
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    p = positive[order].astype(np.float64)
    # Collapse tied scores into single threshold steps.
    boundaries = np.flatnonzero(np.diff(s)) + 1
    tp = np.concatenate([[0.0], np.cumsum(p)[np.concatenate([boundaries - 1, [len(s) - 1]])]])
    fp = np.concatenate([[0.0], np.cumsum(1 - p)[np.concatenate([boundaries - 1, [len(s) - 1]])]])
    tpr = tp / n_pos
    fpr = fp / n_neg
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr, tpr, auc)


def roc_auc_ovr(y_true: np.ndarray, proba: np.ndarray) -> RocResult:
    """One-vs-rest ROC per class from a row-stochastic score matrix."""
    y_true = np.asarray(y_true, dtype=np.int64)
    proba = np.asarray(proba, dtype=np.float64)
    if proba.ndim != 2 or len(proba) != len(y_true):
        raise DataError(f"probability matrix shape {proba.shape} does not match {len(y_true)} labels")
    K = proba.shape[1]
    curves: dict[int, RocCurve] = {}
    absent: list[int] = []
    for c in range(K):
        positive = y_true == c
        if positive.all() or not positive.any():
            absent.append(c)
            continue
        curves[c] = _roc_curve_binary(positive, proba[:, c])
    if not curves:
        raise DataError("no class has both positives and negatives; ROC undefined")
    macro = float(np.mean([cv.auc for cv in curves.values()]))
    return RocResult(curves, macro, absent)


def stratified_shuffle_splits(
    y: np.ndarray, n_splits: int, test_fraction: float, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Independent stratified shuffles; per class, round(fraction*count) test rows."""
    y = np.asarray(y, dtype=np.int64)
    if not (0.0 < test_fraction < 1.0):
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if n_splits < 1:
        raise DataError("n_splits must be >= 1")
    classes = np.unique(y)
    for cls in classes:
        if np.sum(y == cls) < 2:
            raise DataError(f"class {cls} has fewer than 2 samples")
    splits = []
    for s in range(n_splits):
        train_parts, test_parts = [], []
        for cls in classes:
            members = np.flatnonzero(y == cls)
            order = make_rng(seed, "shuffle-split", s, int(cls)).permutation(len(members))
            members = members[order]
            n_test = int(np.floor(test_fraction * len(members) + 0.5))
            test_parts.append(members[:n_test])
            train_parts.append(members[n_test:])
        splits.append((np.concatenate(train_parts), np.concatenate(test_parts)))
    return splits


@dataclass
class GridCandidate:
    index: int
    hyper_dict: dict
    mean_accuracy: float
    std_accuracy: float
    fold_accuracies: list[float]
    error: str | None = None


@dataclass
class GridSearchResult:
    candidates: list[GridCandidate]
    best_index: int
    best_hyper: object
    best_mean_accuracy: float

    def log_lines(self) -> list[str]:
        lines = []
        for cand in self.candidates:
            status = f"mean={cand.mean_accuracy:.4f} std={cand.std_accuracy:.4f}"
            if cand.error:
                status = f"FAILED ({cand.error})"
            marker = " <- selected" if cand.index == self.best_index else ""
            lines.append(f"candidate {cand.index}: {cand.hyper_dict} {status}{marker}")
        return lines


def grid_search(
    kind,
    grid: list,
    ds: TabularDataset,
    n_splits: int = 5,
    test_fraction: float = 0.2,
    seed: int = 0,
) -> GridSearchResult:
    """Mean CV accuracy over a shared split list; earliest argmax wins."""
    from . import classical

    if not grid:
        raise DataError("empty hyperparameter grid")
    splits = stratified_shuffle_splits(ds.y, n_splits, test_fraction, seed)
    candidates: list[GridCandidate] = []
    for i, hyper in enumerate(grid):
        accs: list[float] = []
        error = None
        try:
            for train_idx, test_idx in splits:
                model = classical.fit(kind, hyper, ds.subset(train_idx), seed=seed)
                pred = model.predict(ds.X[test_idx])
                accs.append(float(np.mean(pred == ds.y[test_idx])))
        except Exception as exc:  # candidate excluded, run continues
            error = f"{type(exc).__name__}: {exc}"
            log.warning("grid candidate %d failed: %s", i, error)
        if error is None:
            candidates.append(
                GridCandidate(i, classical.hyper_to_dict(hyper), float(np.mean(accs)), float(np.std(accs)), accs)
            )
        else:
            candidates.append(GridCandidate(i, classical.hyper_to_dict(hyper), float("nan"), float("nan"), [], error))
    usable = [c for c in candidates if c.error is None]
    if not usable:
        raise DataError("every grid candidate failed to fit")
    best = max(usable, key=lambda c: (c.mean_accuracy, -c.index))
    return GridSearchResult(candidates, best.index, grid[best.index], best.mean_accuracy)


# ---------------------------------------------------------------------------
# CSV report writers
# ---------------------------------------------------------------------------


def write_confusion_csv(path: str | Path, cm: ConfusionMatrix, class_names: list[str] | None = None) -> Path:
    path = Path(path)
    K = len(cm.counts)
    names = class_names or [str(i) for i in range(K)]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true\\pred"] + names)
        for i in range(K):
            writer.writerow([names[i]] + [int(v) for v in cm.counts[i]])
    return path


def read_confusion_csv(path: str | Path) -> ConfusionMatrix:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    counts = np.array([[int(v) for v in row[1:]] for row in rows[1:]], dtype=np.int64)
    return ConfusionMatrix(counts)


def write_metrics_csv(path: str | Path, report: MetricsReport, class_names: list[str] | None = None) -> Path:
    path = Path(path)
    K = len(report.precision)
    names = class_names or [str(i) for i in range(K)]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "precision", "recall", "f1"])
        for i in range(K):
            writer.writerow([names[i], repr(report.precision[i]), repr(report.recall[i]), repr(report.f1[i])])
        writer.writerow(["macro", repr(report.macro_precision), repr(report.macro_recall), repr(report.macro_f1)])
        writer.writerow(["accuracy", repr(report.accuracy), "", ""])
    return path


def write_roc_csv(path: str | Path, curve: RocCurve) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fpr", "tpr"])
        for f, t in zip(curve.fpr, curve.tpr):
            writer.writerow([repr(float(f)), repr(float(t))])
    return path
