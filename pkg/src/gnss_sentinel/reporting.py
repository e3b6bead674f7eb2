"""Evaluation report bundles: CSV tables, SVG plots, JSON summary."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .metrics import (
    confusion,
    metrics,
    read_confusion_csv,
    roc_auc_ovr,
    write_confusion_csv,
    write_metrics_csv,
    write_roc_csv,
)
from .plots import accuracy_bars_svg, confusion_svg, roc_svg, write_svg


def write_eval_report(
    out_dir: str | Path,
    y_true: np.ndarray,
    proba: np.ndarray,
    class_names: list[str] | None = None,
) -> dict:
    """Write confusion/metrics/ROC CSVs plus SVG plots; returns the summary."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    K = proba.shape[1]
    names = class_names or [str(i) for i in range(K)]
    y_pred = np.argmax(proba, axis=1)
    cm = confusion(y_true, y_pred, K)
    rep = metrics(cm)
    roc = roc_auc_ovr(y_true, proba)
    write_confusion_csv(out_dir / "confusion.csv", cm, names)
    write_metrics_csv(out_dir / "metrics.csv", rep, names)
    for cls, curve in sorted(roc.curves.items()):
        write_roc_csv(out_dir / f"roc_class{cls}.csv", curve)
    write_svg(out_dir / "confusion.svg", confusion_svg(cm, names))
    write_svg(out_dir / "roc.svg", roc_svg(roc, dict(enumerate(names))))
    summary = {
        "accuracy": rep.accuracy,
        "macro_f1": rep.macro_f1,
        "macro_precision": rep.macro_precision,
        "macro_recall": rep.macro_recall,
        "macro_auc": roc.macro_auc,
        "per_class_auc": {names[c]: curve.auc for c, curve in sorted(roc.curves.items())},
        "class_names": names,
        "n_samples": int(len(y_true)),
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return summary


def write_accuracy_bars(out_dir: str | Path, accuracies: dict, title: str) -> Path:
    return write_svg(Path(out_dir) / "accuracy_bars.svg", accuracy_bars_svg(accuracies, title))


def rerender_report(report_dir: str | Path) -> list[Path]:
    """Rebuild the SVG plots of an existing report directory from its CSVs."""
    from .errors import DataError
    from .metrics import RocCurve, RocResult

    report_dir = Path(report_dir)
    written: list[Path] = []
    summary_path = report_dir / "summary.json"
    if not summary_path.exists():
        raise DataError(f"{report_dir}: no summary.json; not a report directory")
    summary = json.loads(summary_path.read_text())
    names = summary.get("class_names") or []
    cm_path = report_dir / "confusion.csv"
    if cm_path.exists():
        cm = read_confusion_csv(cm_path)
        written.append(write_svg(report_dir / "confusion.svg", confusion_svg(cm, names or None)))
    curves: dict[int, RocCurve] = {}
    for csv_path in sorted(report_dir.glob("roc_class*.csv")):
        cls = int(csv_path.stem.replace("roc_class", ""))
        rows = np.loadtxt(csv_path, delimiter=",", skiprows=1)
        rows = np.atleast_2d(rows)
        fpr, tpr = rows[:, 0], rows[:, 1]
        auc = float(np.trapezoid(tpr, fpr))
        curves[cls] = RocCurve(fpr, tpr, auc)
    if curves:
        macro = float(np.mean([c.auc for c in curves.values()]))
        roc = RocResult(curves, macro)
        written.append(write_svg(report_dir / "roc.svg", roc_svg(roc, dict(enumerate(names)) if names else None)))
    return written
