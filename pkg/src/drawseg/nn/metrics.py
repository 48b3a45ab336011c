"""Confusion matrices and per-class precision/recall (rows are ground truth)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def confusion(truth, pred, num_classes: int) -> np.ndarray:
    truth = np.asarray(truth, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if truth.shape != pred.shape:
        raise ValueError("truth and prediction lengths differ")
    m = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(m, (truth, pred), 1)
    return m


@dataclass
class Metrics:
    confusion: np.ndarray
    precision: list[float | None]  # percent; None where a column is empty
    recall: list[float | None]
    accuracy: float

    def to_dict(self, classes=None) -> dict:
        d = {"confusion": self.confusion.tolist(), "precision": self.precision,
             "recall": self.recall, "accuracy": self.accuracy}
        if classes is not None:
            d["classes"] = list(classes)
        return d


def compute_metrics(m) -> Metrics:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("confusion matrix must be square")
    if np.any(m < 0):
        raise ValueError("confusion counts must be non-negative")
    total = m.sum()
    if total == 0:
        raise ValueError("all-zero confusion matrix")
    diag = np.diag(m).astype(np.float64)
    cols = m.sum(axis=0)
    rows = m.sum(axis=1)
    precision = [100.0 * d / c if c else None for d, c in zip(diag, cols)]
    recall = [100.0 * d / r if r else None for d, r in zip(diag, rows)]
    return Metrics(m, precision, recall, 100.0 * float(diag.sum()) / float(total))


def _pct(v) -> str:
    return "-" if v is None else f"{v:.2f}%"


def format_table(mt: Metrics, classes) -> str:
    """Plain-text confusion table: GT rows, predicted columns, recall on the right."""
    classes = list(classes)
    w = max(10, *(len(c) + 2 for c in classes))
    head = "GT \\ Pred".ljust(w) + "".join(c.rjust(w) for c in classes) + "Recall".rjust(w)
    lines = [head]
    for i, c in enumerate(classes):
        cells = "".join(str(int(v)).rjust(w) for v in mt.confusion[i])
        lines.append(c.ljust(w) + cells + _pct(mt.recall[i]).rjust(w))
    lines.append("Precision".ljust(w) + "".join(_pct(p).rjust(w) for p in mt.precision))
    lines.append(f"Accuracy: {mt.accuracy:.2f}%")
    return "\n".join(lines)
