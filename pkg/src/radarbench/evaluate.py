"""Classification metrics: accuracy vs SNR, 90%-accuracy sensitivity,
per-SNR confusion matrices, and deterministic CSV/SVG reports.

Metric functions take a ``classifier``: any callable mapping a batch of
complex signals (N, T) to predicted class indices (N,). Use
:func:`model_classifier` to wrap a trained model; test stubs can pass
plain functions.

CSV schemas:
    curves      scope,class_name,snr_db,accuracy,n_examples
    sensitivity scope,class_name,threshold,snr_db
    confusion   snr_db,true_class,pred_class,count

SVG output is built from fixed-format strings only, so identical inputs
produce identical bytes.
"""

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .lstm import Model
from .train import predict_classes


@dataclass
class AccuracyCurve:
    """Accuracy per SNR grid point for one scope (overall or one class)."""

    snr_db: tuple
    accuracy: tuple
    n_examples: tuple
    scope: str = "overall"  # "overall" or "class"
    class_name: str = ""

    def as_dict(self) -> dict:
        return dict(zip(self.snr_db, self.accuracy))


@dataclass
class ConfusionMatrix:
    """Counts at one SNR; rows are true classes, columns predictions."""

    snr_db: int
    counts: np.ndarray
    class_names: tuple

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / max(1, self.counts.sum()))


def model_classifier(model: Model, batch_size: int = 256):
    """Adapter turning a model into a classifier callable."""

    def classify(signals: np.ndarray) -> np.ndarray:
        return predict_classes(model, signals, batch_size)

    return classify


def _predictions(classifier, split) -> np.ndarray:
    preds = np.asarray(classifier(split.signals))
    if preds.shape != (len(split),):
        raise ValueError(f"classifier returned shape {preds.shape} for {len(split)} signals")
    return preds


def curves_from_predictions(split, preds, class_names: Sequence[str]) -> list:
    """Overall curve followed by one per-class curve.

    SNR grid points with no examples are omitted with a warning; classes
    missing at a given SNR are omitted from that class's curve.
    """
    preds = np.asarray(preds)
    grid = sorted(int(s) for s in np.unique(split.snr_db))
    correct = preds == split.class_index
    curves = []

    points = []
    for snr in grid:
        mask = split.snr_db == snr
        n = int(mask.sum())
        if n == 0:
            warnings.warn(f"no examples at {snr} dB; point omitted")
            continue
        points.append((snr, float(correct[mask].mean()), n))
    curves.append(
        AccuracyCurve(
            snr_db=tuple(p[0] for p in points),
            accuracy=tuple(p[1] for p in points),
            n_examples=tuple(p[2] for p in points),
            scope="overall",
        )
    )

    for ci, name in enumerate(class_names):
        cls_mask = split.class_index == ci
        points = []
        for snr in grid:
            mask = cls_mask & (split.snr_db == snr)
            n = int(mask.sum())
            if n == 0:
                continue
            points.append((snr, float(correct[mask].mean()), n))
        curves.append(
            AccuracyCurve(
                snr_db=tuple(p[0] for p in points),
                accuracy=tuple(p[1] for p in points),
                n_examples=tuple(p[2] for p in points),
                scope="class",
                class_name=name,
            )
        )
    return curves


def accuracy_by_snr(classifier, split, class_names: Sequence[str]) -> list:
    """Overall and per-class accuracy curves over the split's SNR grid."""
    return curves_from_predictions(split, _predictions(classifier, split), class_names)


def sensitivity(curve: AccuracyCurve, threshold: float = 0.9) -> Optional[int]:
    """Smallest grid SNR from which accuracy stays at or above threshold.

    A dip back below the threshold at a higher SNR disqualifies earlier
    points; returns None when no suffix of the curve qualifies.
    """
    if not curve.snr_db:
        raise ValueError("sensitivity of an empty curve")
    result = None
    for snr, acc in zip(curve.snr_db, curve.accuracy):
        if acc >= threshold:
            if result is None:
                result = snr
        else:
            result = None
    return result


def confusion_matrix(classifier, split, snr_db: int, class_names: Sequence[str]) -> ConfusionMatrix:
    """Prediction counts over all examples at one SNR."""
    mask = split.snr_db == snr_db
    if not mask.any():
        raise ValueError(f"no examples at {snr_db} dB")
    preds = np.asarray(classifier(split.signals[mask]))
    n = len(class_names)
    counts = np.zeros((n, n), dtype=np.int64)
    np.add.at(counts, (split.class_index[mask].astype(np.int64), preds), 1)
    return ConfusionMatrix(snr_db=int(snr_db), counts=counts, class_names=tuple(class_names))


def confusion_from_predictions(split, preds, snr_db: int, class_names) -> ConfusionMatrix:
    mask = split.snr_db == snr_db
    if not mask.any():
        raise ValueError(f"no examples at {snr_db} dB")
    n = len(class_names)
    counts = np.zeros((n, n), dtype=np.int64)
    np.add.at(
        counts,
        (split.class_index[mask].astype(np.int64), np.asarray(preds)[mask]),
        1,
    )
    return ConfusionMatrix(snr_db=int(snr_db), counts=counts, class_names=tuple(class_names))


@dataclass
class SensitivityEntry:
    scope: str
    class_name: str
    threshold: float
    snr_db: Optional[int]


def sensitivity_table(curves, threshold: float = 0.9) -> list:
    return [
        SensitivityEntry(c.scope, c.class_name, threshold, sensitivity(c, threshold))
        for c in curves
    ]


# -- report files -------------------------------------------------------------

def curves_csv(curves) -> str:
    lines = ["scope,class_name,snr_db,accuracy,n_examples"]
    for c in curves:
        for snr, acc, n in zip(c.snr_db, c.accuracy, c.n_examples):
            lines.append(f"{c.scope},{c.class_name},{snr},{acc:.6f},{n}")
    return "\n".join(lines) + "\n"


def sensitivity_csv(entries) -> str:
    lines = ["scope,class_name,threshold,snr_db"]
    for e in entries:
        value = "NA" if e.snr_db is None else str(e.snr_db)
        lines.append(f"{e.scope},{e.class_name},{e.threshold:.2f},{value}")
    return "\n".join(lines) + "\n"


def confusion_csv(matrices) -> str:
    lines = ["snr_db,true_class,pred_class,count"]
    for m in matrices:
        for i, true_name in enumerate(m.class_names):
            for j, pred_name in enumerate(m.class_names):
                lines.append(f"{m.snr_db},{true_name},{pred_name},{m.counts[i, j]}")
    return "\n".join(lines) + "\n"


_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
    "#98df8a", "#ff9896", "#c5b0d5", "#c49c94", "#f7b6d2", "#c7c7c7",
    "#dbdb8d", "#9edae5", "#393b79", "#637939", "#8c6d31", "#843c39",
)


def curves_svg(curves, title: str = "accuracy vs SNR") -> str:
    """Self-contained line chart; accuracy on [0, 1] against grid SNR."""
    width, height = 720, 480
    ml, mr, mt, mb = 60, 180, 40, 50
    plot_w, plot_h = width - ml - mr, height - mt - mb
    snrs = sorted({s for c in curves for s in c.snr_db})
    if not snrs:
        raise ValueError("no curve points to plot")
    lo, hi = min(snrs), max(snrs)
    span = max(1, hi - lo)

    def sx(s):
        return ml + plot_w * (s - lo) / span

    def sy(a):
        return mt + plot_h * (1.0 - a)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml}" y="24" font-family="monospace" font-size="14">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 0.9, 1.0):
        y = sy(frac)
        parts.append(
            f'<line x1="{ml}" y1="{y:.1f}" x2="{ml + plot_w}" y2="{y:.1f}" '
            f'stroke="#ddd" stroke-dasharray="3,3"/>'
        )
        parts.append(
            f'<text x="{ml - 8}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{frac:.2f}</text>'
        )
    for s in snrs:
        x = sx(s)
        parts.append(
            f'<text x="{x:.1f}" y="{mt + plot_h + 18}" text-anchor="middle" '
            f'font-family="monospace" font-size="11">{s}</text>'
        )
    parts.append(
        f'<text x="{ml + plot_w / 2:.1f}" y="{height - 12}" text-anchor="middle" '
        f'font-family="monospace" font-size="12">SNR (dB)</text>'
    )
    for k, c in enumerate(curves):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{sx(s):.2f},{sy(a):.2f}" for s, a in zip(c.snr_db, c.accuracy))
        label = c.class_name if c.scope == "class" else "overall"
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = mt + 14 * (k + 1)
        parts.append(
            f'<line x1="{ml + plot_w + 10}" y1="{ly - 4}" x2="{ml + plot_w + 30}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="3"/>'
        )
        parts.append(
            f'<text x="{ml + plot_w + 35}" y="{ly}" font-family="monospace" '
            f'font-size="11">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def confusion_svg(matrix: ConfusionMatrix) -> str:
    """Heatmap with one annotated cell per count."""
    n = len(matrix.class_names)
    cell = max(22, min(40, 640 // max(1, n)))
    ml, mt = 110, 60
    width = ml + n * cell + 20
    height = mt + n * cell + 110
    peak = max(1, int(matrix.counts.max()))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml}" y="24" font-family="monospace" font-size="14">'
        f"confusion at {matrix.snr_db} dB</text>",
    ]
    for i in range(n):
        for j in range(n):
            v = int(matrix.counts[i, j])
            shade = 255 - int(200 * v / peak)
            x, y = ml + j * cell, mt + i * cell
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="rgb({shade},{shade},255)" stroke="#999"/>'
            )
            parts.append(
                f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 + 4:.1f}" '
                f'text-anchor="middle" font-family="monospace" font-size="10">{v}</text>'
            )
    for i, name in enumerate(matrix.class_names):
        parts.append(
            f'<text x="{ml - 6}" y="{mt + i * cell + cell / 2 + 4:.1f}" text-anchor="end" '
            f'font-family="monospace" font-size="10">{name}</text>'
        )
        x = ml + i * cell + cell / 2
        y = mt + n * cell + 10
        parts.append(
            f'<text x="{x:.1f}" y="{y}" font-family="monospace" font-size="10" '
            f'transform="rotate(45 {x:.1f} {y})">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_report(curves, sensitivities, matrices, out_dir, prefix: str = "") -> dict:
    """Write the CSV and SVG report files; returns written paths.

    Output bytes are a pure function of the inputs.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    def put(name, text):
        p = out_dir / f"{prefix}{name}"
        p.write_text(text, encoding="utf-8")
        paths[name] = p

    put("accuracy_curves.csv", curves_csv(curves))
    put("sensitivity.csv", sensitivity_csv(sensitivities))
    put("confusion.csv", confusion_csv(matrices))
    put("accuracy.svg", curves_svg(curves))
    for m in matrices:
        tag = f"{m.snr_db:+d}".replace("+", "p").replace("-", "m")
        put(f"confusion_{tag}db.svg", confusion_svg(m))
    return paths
