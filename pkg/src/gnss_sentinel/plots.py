"""Self-contained SVG reports: ROC curves, confusion heatmap, accuracy bars.

Plain line/rect/text primitives templated directly from the data, so the
report files carry no rendering dependency.
"""

from __future__ import annotations

from pathlib import Path

from .metrics import ConfusionMatrix, RocResult

_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"]


def _svg(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">'
    )
    return "\n".join([head, *body, "</svg>"])


def roc_svg(result: RocResult, class_names: dict[int, str] | None = None) -> str:
    w, h, m = 480, 420, 50
    plot_w, plot_h = w - 2 * m, h - 2 * m
    body = [
        f'<rect x="{m}" y="{m}" width="{plot_w}" height="{plot_h}" fill="white" stroke="black"/>',
        f'<line x1="{m}" y1="{m + plot_h}" x2="{m + plot_w}" y2="{m}" stroke="#999" stroke-dasharray="4 3"/>',
        f'<text x="{w / 2}" y="{h - 8}" text-anchor="middle">false positive rate</text>',
        f'<text x="14" y="{h / 2}" text-anchor="middle" transform="rotate(-90 14 {h / 2})">true positive rate</text>',
        f'<text x="{w / 2}" y="20" text-anchor="middle">one-vs-rest ROC (macro AUC {result.macro_auc:.4f})</text>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = m + tick * plot_w
        y = m + plot_h - tick * plot_h
        body.append(f'<text x="{x:.1f}" y="{m + plot_h + 14}" text-anchor="middle">{tick:g}</text>')
        body.append(f'<text x="{m - 6}" y="{y + 4:.1f}" text-anchor="end">{tick:g}</text>')
    for i, (cls, curve) in enumerate(sorted(result.curves.items())):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(
            f"{m + f * plot_w:.2f},{m + plot_h - t * plot_h:.2f}" for f, t in zip(curve.fpr, curve.tpr)
        )
        name = (class_names or {}).get(cls, f"class {cls}")
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        body.append(
            f'<text x="{m + plot_w - 6}" y="{m + 16 + 14 * i}" text-anchor="end" fill="{color}">'
            f"{name}: AUC {curve.auc:.4f}</text>"
        )
    return _svg(w, h, body)


def confusion_svg(cm: ConfusionMatrix, class_names: list[str] | None = None) -> str:
    K = len(cm.counts)
    names = class_names or [str(i) for i in range(K)]
    cell = max(28, 300 // K)
    m = 80
    w = m + K * cell + 20
    h = m + K * cell + 20
    peak = max(1, int(cm.counts.max()))
    body = [f'<text x="{w / 2}" y="20" text-anchor="middle">confusion matrix (rows true, columns predicted)</text>']
    for i in range(K):
        body.append(
            f'<text x="{m - 6}" y="{m + i * cell + cell / 2 + 4}" text-anchor="end">{names[i]}</text>'
        )
        body.append(
            f'<text x="{m + i * cell + cell / 2}" y="{m - 8}" text-anchor="middle">{names[i]}</text>'
        )
        for j in range(K):
            v = int(cm.counts[i, j])
            shade = 255 - int(round(195 * v / peak))
            body.append(
                f'<rect x="{m + j * cell}" y="{m + i * cell}" width="{cell}" height="{cell}" '
                f'fill="rgb({shade},{shade},255)" stroke="#666"/>'
            )
            body.append(
                f'<text x="{m + j * cell + cell / 2}" y="{m + i * cell + cell / 2 + 4}" '
                f'text-anchor="middle">{v}</text>'
            )
    return _svg(w, h, body)


def accuracy_bars_svg(accuracies: dict[str, float], title: str = "model accuracy") -> str:
    """Grouped bars; values may be single floats or (validation, test) pairs."""
    names = list(accuracies)
    pairs = []
    for name in names:
        v = accuracies[name]
        pairs.append(tuple(v) if isinstance(v, (tuple, list)) else (float(v),))
    n_series = max(len(p) for p in pairs)
    bar_w = 26 if n_series > 1 else 40
    group_w = bar_w * n_series + 24
    m_left, m_bottom, m_top = 50, 70, 36
    w = m_left + group_w * len(names) + 20
    h = 320
    plot_h = h - m_bottom - m_top
    body = [f'<text x="{w / 2}" y="20" text-anchor="middle">{title}</text>']
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = m_top + plot_h - tick * plot_h
        body.append(f'<line x1="{m_left}" y1="{y:.1f}" x2="{w - 20}" y2="{y:.1f}" stroke="#ddd"/>')
        body.append(f'<text x="{m_left - 6}" y="{y + 4:.1f}" text-anchor="end">{tick:g}</text>')
    series_names = ["validation", "test"] if n_series == 2 else [""]
    for gi, (name, values) in enumerate(zip(names, pairs)):
        x0 = m_left + gi * group_w + 12
        for si, v in enumerate(values):
            color = _COLORS[si % len(_COLORS)]
            bh = v * plot_h
            body.append(
                f'<rect x="{x0 + si * bar_w:.1f}" y="{m_top + plot_h - bh:.1f}" width="{bar_w - 4}" '
                f'height="{bh:.1f}" fill="{color}"/>'
            )
            body.append(
                f'<text x="{x0 + si * bar_w + (bar_w - 4) / 2:.1f}" y="{m_top + plot_h - bh - 4:.1f}" '
                f'text-anchor="middle" font-size="9">{v:.3f}</text>'
            )
        label_x = x0 + (bar_w * len(values)) / 2
        body.append(
            f'<text x="{label_x:.1f}" y="{h - m_bottom + 14}" text-anchor="middle" '
            f'transform="rotate(30 {label_x:.1f} {h - m_bottom + 14})" font-size="10">{name}</text>'
        )
    if n_series == 2:
        for si, sname in enumerate(series_names):
            color = _COLORS[si]
            body.append(f'<rect x="{m_left + si * 110}" y="{h - 18}" width="12" height="12" fill="{color}"/>')
            body.append(f'<text x="{m_left + si * 110 + 16}" y="{h - 8}">{sname}</text>')
    return _svg(w, h, body)


def write_svg(path: str | Path, content: str) -> Path:
    path = Path(path)
    path.write_text(content)
    return path


def training_curves_svg(history: list[dict]) -> str:
    """Loss and validation accuracy per epoch from a training history."""
    if not history:
        return _svg(300, 100, ['<text x="20" y="50">no history</text>'])
    w, h, m = 480, 320, 50
    plot_w, plot_h = w - 2 * m, h - 2 * m
    losses = [row["train_loss"] for row in history] + [row["val_loss"] for row in history]
    lo, hi = min(losses), max(losses)
    span = (hi - lo) or 1.0
    body = [
        f'<rect x="{m}" y="{m}" width="{plot_w}" height="{plot_h}" fill="white" stroke="black"/>',
        f'<text x="{w / 2}" y="20" text-anchor="middle">training curves</text>',
        f'<text x="{w / 2}" y="{h - 8}" text-anchor="middle">epoch</text>',
    ]
    n = len(history)
    xs = [m + plot_w * (i / max(n - 1, 1)) for i in range(n)]
    for key, color in (("train_loss", _COLORS[0]), ("val_loss", _COLORS[1])):
        pts = " ".join(
            f"{x:.1f},{m + plot_h - (row[key] - lo) / span * plot_h:.1f}" for x, row in zip(xs, history)
        )
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    acc_pts = " ".join(
        f"{x:.1f},{m + plot_h - row['val_acc'] * plot_h:.1f}" for x, row in zip(xs, history)
    )
    body.append(f'<polyline points="{acc_pts}" fill="none" stroke="{_COLORS[2]}" stroke-width="1.5" stroke-dasharray="5 3"/>')
    for i, (label, color) in enumerate((("train loss", _COLORS[0]), ("val loss", _COLORS[1]), ("val accuracy", _COLORS[2]))):
        body.append(f'<rect x="{m + i * 120}" y="{h - 24}" width="12" height="12" fill="{color}"/>')
        body.append(f'<text x="{m + i * 120 + 16}" y="{h - 14}">{label}</text>')
    return _svg(w, h, body)
