"""Report figures (training curves, confusion heatmap, component overlay)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .curvefit import evaluate  # noqa: E402
from .graphbuild import ComponentGraph  # noqa: E402

# fixed metadata keeps repeated renders byte-identical
_PNG_META = {"Software": None}


def _save(fig, path) -> None:
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def plot_history(history, path) -> None:
    epochs = np.arange(1, len(history.train_loss) + 1)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(epochs, history.train_loss, color="tab:blue", lw=1)
    ax.set_xlabel("epoch")
    ax.set_ylabel("train loss", color="tab:blue")
    ax.set_yscale("log")
    ax2 = ax.twinx()
    ax2.plot(epochs, history.val_accuracy, color="tab:red", lw=1)
    ax2.set_ylabel("validation accuracy", color="tab:red")
    if history.best_epoch > 0:
        ax2.axvline(history.best_epoch, color="gray", ls=":", lw=1)
    fig.tight_layout()
    _save(fig, path)


def plot_confusion(confusion, classes, path, title: str | None = None) -> None:
    m = np.asarray(confusion)
    rows = m.sum(axis=1, keepdims=True)
    frac = np.divide(m, rows, out=np.zeros(m.shape), where=rows > 0)
    fig, ax = plt.subplots(figsize=(1.3 * len(classes) + 2, 1.1 * len(classes) + 1.5))
    ax.imshow(frac, cmap="Blues", vmin=0, vmax=1)
    for i in range(len(classes)):
        for j in range(len(classes)):
            ax.text(j, i, str(int(m[i, j])), ha="center", va="center",
                    color="white" if frac[i, j] > 0.6 else "black")
    ax.set_xticks(range(len(classes)), classes)
    ax.set_yticks(range(len(classes)), classes)
    ax.set_xlabel("predicted")
    ax.set_ylabel("ground truth")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_overlay(g: ComponentGraph, path, labels=None) -> None:
    """Components drawn in normalised coordinates, coloured by class."""
    labels = g.labels if labels is None else labels
    scheme = g.label_scheme
    t = np.linspace(0, 1, 24)
    fig, ax = plt.subplots(figsize=(6, 6))
    for i, ctrl in enumerate(g.controls):
        p = evaluate(ctrl, t)
        color = "tab:blue" if labels is None else np.asarray(scheme.display_color(int(labels[i]))) / 255
        ax.plot(p[:, 0], p[:, 1], color=color, lw=1)
    ax.set_aspect("equal")
    ax.invert_yaxis()
    ax.set_axis_off()
    _save(fig, path)
