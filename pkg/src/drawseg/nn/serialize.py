"""Model files: JSON with config, parameters, optimizer state and best-epoch metadata."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .models import Model, ModelConfig
from .optim import Adam

MODEL_FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def model_to_dict(model: Model, optimizer: Adam | None = None, history=None, extra: dict | None = None) -> dict:
    d = {
        "version": MODEL_FORMAT_VERSION,
        "config": model.config.to_dict(),
        "params": {k: model.params[k].tolist() for k in sorted(model.params)},
        "input_shift": model.input_shift.tolist(),
        "input_scale": model.input_scale.tolist(),
        "optimizer": optimizer.state_dict() if optimizer is not None else None,
        "best_val_accuracy": None,
        "best_epoch": None,
    }
    if history is not None:
        d["best_val_accuracy"] = history.best_val_accuracy
        d["best_epoch"] = history.best_epoch
    if extra:
        d["meta"] = extra
    return d


def model_from_dict(d: dict) -> tuple[Model, Adam | None, dict]:
    if not isinstance(d, dict) or "version" not in d:
        raise ModelFormatError("not a model file")
    if d["version"] != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version {d['version']}")
    try:
        cfg = ModelConfig.from_dict(d["config"])
        params = {k: np.asarray(v, dtype=np.float64) for k, v in d["params"].items()}
        model = Model(cfg, params, np.asarray(d["input_shift"], dtype=np.float64),
                      np.asarray(d["input_scale"], dtype=np.float64))
        opt = Adam.from_state(d["optimizer"]) if d.get("optimizer") else None
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from None
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from None
    if model.input_shift.shape != (cfg.in_dim,) or model.input_scale.shape != (cfg.in_dim,):
        raise ModelFormatError("input standardisation does not match in_dim")
    meta = {k: d.get(k) for k in ("best_val_accuracy", "best_epoch")}
    meta.update(d.get("meta") or {})
    return model, opt, meta


def save_model(path, model: Model, optimizer: Adam | None = None, history=None, extra: dict | None = None) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(model_to_dict(model, optimizer, history, extra)), encoding="utf-8")
    os.replace(tmp, path)


def load_model(path, num_classes: int | None = None):
    """Returns (model, optimizer or None, metadata)."""
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from None
    model, opt, meta = model_from_dict(d)
    if num_classes is not None and model.config.num_classes != num_classes:
        raise ModelFormatError(
            f"class count mismatch: model has {model.config.num_classes}, graph scheme has {num_classes}")
    return model, opt, meta
