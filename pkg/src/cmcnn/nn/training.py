"""Mini-batch SGD with momentum, and timed prediction."""

from dataclasses import asdict, dataclass
import logging
import time

import numpy as np

from ..exceptions import ConfigError, DataError
from .model import backward, forward


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 0.01
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ConfigError("momentum must lie in [0, 1)")

    def to_dict(self):
        return asdict(self)


def as_arrays(data):
    """Accept a ``LabeledImageSet``-like object or an ``(images, labels)`` pair."""
    if hasattr(data, "images"):
        return data.images, data.labels
    images, labels = data
    return np.asarray(images), np.asarray(labels)


def train(model, data, cfg=TrainConfig()):
    """Train ``model`` in place.

    Each epoch visits the samples in an order drawn from ``cfg.seed`` and
    the epoch index, so a run is reproducible bit for bit.

    Returns
    -------
    model : Model
        The same object, trained.
    seconds : float
        Wall-clock training time.
    """
    images, labels = as_arrays(data)
    n = len(labels)
    if n == 0:
        raise DataError("cannot train on an empty dataset")
    if len(images) != n:
        raise DataError(f"{len(images)} images but {n} labels")

    start = time.perf_counter()
    velocity = {k: np.zeros_like(v) for k, v in model.params.items()}
    lr = model.dtype.type(cfg.learning_rate)
    mu = model.dtype.type(cfg.momentum)
    for epoch in range(cfg.epochs):
        order = np.random.default_rng([cfg.seed, epoch]).permutation(n)
        total = 0.0
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo:lo + cfg.batch_size]
            grads, loss = backward(model, images[idx], labels[idx])
            if not np.isfinite(loss):
                raise FloatingPointError(
                    f"non-finite loss in epoch {epoch} for genome {model.genome}")
            for k, g in grads.items():
                v = velocity[k]
                v *= mu
                v -= lr * g
                model.params[k] += v
            total += loss * len(idx)
        log.debug("%s epoch %d mean loss %.4f", model.genome, epoch, total / n)
    return model, time.perf_counter() - start


def predict_proba(model, images, batch_size=256):
    images = np.asarray(images)
    if len(images) == 0:
        return np.zeros((0, model.arch.num_classes), dtype=model.dtype)
    return np.concatenate([forward(model, images[lo:lo + batch_size])
                           for lo in range(0, len(images), batch_size)])


def predict(model, data, batch_size=256):
    """Predicted class per sample and the wall-clock prediction time.

    Ties in probability go to the lowest class index.
    """
    images = data.images if hasattr(data, "images") else np.asarray(data)
    start = time.perf_counter()
    proba = predict_proba(model, images, batch_size)
    pred = proba.argmax(axis=1)
    return pred, time.perf_counter() - start
