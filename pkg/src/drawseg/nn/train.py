"""Seeded training loop with drawing-level split and best-validation checkpointing."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .layers import softmax_cross_entropy
from .models import Model, ModelConfig, disjoint_union
from .optim import Adam

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    weight_decay: float = 5e-4
    max_epochs: int = 2000
    batch_size: int = 16
    split: float = 0.8
    seed: int = 0
    standardize: bool = True
    target_accuracy: float | None = None  # stop early once validation reaches this

    def __post_init__(self):
        if not 0 < self.split < 1:
            raise ValueError("split must lie strictly between 0 and 1")
        if self.learning_rate <= 0 or self.max_epochs <= 0 or self.batch_size <= 0:
            raise ValueError("learning_rate, max_epochs and batch_size must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = -1  # 1-based
    best_val_accuracy: float = float("nan")
    train_ids: list[int] = field(default_factory=list)
    val_ids: list[int] = field(default_factory=list)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"train_loss": self.train_loss, "val_accuracy": self.val_accuracy,
                "best_epoch": self.best_epoch, "best_val_accuracy": self.best_val_accuracy,
                "train_ids": self.train_ids, "val_ids": self.val_ids}


@dataclass
class TrainResult:
    model: Model
    optimizer: Adam
    history: History


def split_indices(count: int, split: float, seed: int) -> tuple[list[int], list[int]]:
    """Seeded shuffle, then the first ``round(split * count)`` go to training."""
    if count < 2:
        raise ValueError("need at least two graphs to split")
    order = np.random.default_rng(seed).permutation(count)
    k = min(max(int(round(split * count)), 1), count - 1)
    return sorted(order[:k].tolist()), sorted(order[k:].tolist())


def _check_dataset(graphs) -> None:
    if not graphs:
        raise ValueError("empty dataset")
    ns = {g.n for g in graphs}
    schemes = {g.scheme for g in graphs}
    if len(ns) > 1 or len(schemes) > 1:
        raise ValueError("all graphs must share n and the label scheme")
    for i, g in enumerate(graphs):
        if g.labels is None:
            raise ValueError(f"graph {i} has no labels")


def fit_standardizer(graphs):
    x = np.vstack([g.features for g in graphs])
    shift = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale < 1e-12] = 1.0
    return shift, scale


def accuracy(model: Model, batch) -> float:
    return float(np.mean(model.predict(batch) == batch.labels))


def train(dataset, mc: ModelConfig, tc: TrainConfig, validation=None, progress=None) -> TrainResult:
    """Train ``mc`` on ``dataset`` and keep the parameters with the best validation accuracy.

    Without ``validation`` the dataset is split by ``tc.split``; with it, all of
    ``dataset`` trains and ``validation`` is scored (e.g. the same graphs for
    an overfit check). Ties in validation accuracy keep the earlier epoch.
    """
    graphs = list(dataset)
    _check_dataset(graphs)
    if validation is None:
        train_ids, val_ids = split_indices(len(graphs), tc.split, tc.seed)
        train_set = [graphs[i] for i in train_ids]
        val_set = [graphs[i] for i in val_ids]
    else:
        train_ids, val_ids = list(range(len(graphs))), []
        train_set, val_set = graphs, list(validation)
        _check_dataset(val_set)
    if {g.scheme for g in val_set} != {g.scheme for g in train_set}:
        raise ValueError("validation graphs use a different label scheme")

    model = Model.create(mc, tc.seed)
    if tc.standardize:
        model.input_shift, model.input_scale = fit_standardizer(train_set)
    opt = Adam(tc.learning_rate, tc.weight_decay)
    rng = np.random.default_rng([tc.seed, 1])
    val_batch = disjoint_union(val_set)
    hist = History(train_ids=train_ids, val_ids=val_ids)
    best = None
    t0 = time.perf_counter()
    for epoch in range(1, tc.max_epochs + 1):
        order = rng.permutation(len(train_set))
        losses = []
        for s in range(0, len(order), tc.batch_size):
            batch = disjoint_union([train_set[i] for i in order[s:s + tc.batch_size]])
            logits, caches = model.forward(batch)
            loss, dlogits = softmax_cross_entropy(logits, batch.labels)
            opt.step(model.params, model.backward(caches, dlogits))
            losses.append(loss)
        hist.train_loss.append(float(np.mean(losses)))
        acc = accuracy(model, val_batch)
        hist.val_accuracy.append(acc)
        if best is None or acc > hist.best_val_accuracy:
            hist.best_val_accuracy = acc
            hist.best_epoch = epoch
            best = {k: v.copy() for k, v in model.params.items()}
        if progress is not None:
            progress(epoch, hist.train_loss[-1], acc)
        elif epoch % 100 == 0:
            log.info("epoch %d loss %.4f val %.4f", epoch, hist.train_loss[-1], acc)
        if tc.target_accuracy is not None and acc >= tc.target_accuracy:
            break
    hist.seconds = time.perf_counter() - t0
    best_model = Model(mc, best, model.input_shift, model.input_scale)
    return TrainResult(best_model, opt, hist)


def predict(g, model: Model) -> np.ndarray:
    if g.features.shape[1] != model.config.in_dim:
        raise ValueError(f"graph features have {g.features.shape[1]} columns, model expects {model.config.in_dim}")
    return model.predict(disjoint_union([g]))
