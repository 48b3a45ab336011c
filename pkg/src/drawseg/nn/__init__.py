"""From-scratch graph and dense node classifiers (numpy, float64)."""

from .layers import softmax_cross_entropy
from .metrics import Metrics, compute_metrics, confusion, format_table
from .models import GraphBatch, Model, ModelConfig, disjoint_union, init_params, preset, preset_names
from .optim import Adam
from .serialize import ModelFormatError, load_model, save_model
from .train import History, TrainConfig, TrainResult, predict, split_indices, train

__all__ = ["softmax_cross_entropy", "Metrics", "compute_metrics", "confusion", "format_table",
           "GraphBatch", "Model", "ModelConfig", "disjoint_union", "init_params", "preset",
           "preset_names", "Adam", "ModelFormatError", "load_model", "save_model", "History",
           "TrainConfig", "TrainResult", "predict", "split_indices", "train"]
