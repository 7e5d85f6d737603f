"""Numpy CNN engine: architecture family, passes, training, checkpoints."""

from ..activations import DEFAULT_FUNCTION_SET, Activation
from .arch import BYTES_PER_PARAM, ArchSpec
from .checkpoint import load_checkpoint, save_checkpoint
from .model import Model, backward, build_model, forward
from .training import TrainConfig, predict, predict_proba, train

__all__ = [
    "Activation", "ArchSpec", "BYTES_PER_PARAM", "DEFAULT_FUNCTION_SET", "Model",
    "TrainConfig", "backward", "build_model", "forward", "load_checkpoint",
    "predict", "predict_proba", "save_checkpoint", "train",
]
