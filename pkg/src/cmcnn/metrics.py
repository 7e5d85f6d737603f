"""Confusion matrices and F1 scores for multi-class predictions."""

import numpy as np

from .exceptions import MetricInputError


def confusion(true_labels, predicted, num_classes):
    """Count matrix with rows = true class and columns = predicted class."""
    t = np.asarray(true_labels)
    p = np.asarray(predicted)
    if t.shape != p.shape or t.ndim != 1:
        raise MetricInputError(
            f"label vectors must be 1-D and equal length, got {t.shape} and {p.shape}")
    if num_classes < 1:
        raise MetricInputError("num_classes must be positive")
    for name, v in (("true", t), ("predicted", p)):
        if v.size and (v.min() < 0 or v.max() >= num_classes):
            raise MetricInputError(f"{name} labels outside [0, {num_classes})")
    flat = t.astype(np.int64) * num_classes + p.astype(np.int64)
    counts = np.bincount(flat, minlength=num_classes * num_classes)
    return counts.reshape(num_classes, num_classes)


def per_class_f1(cm):
    """Per-class F1 and a mask of classes that occur in truth or prediction.

    A class with ``precision + recall == 0`` scores 0.
    """
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        # 2PR/(P+R) == 2TP/(support + predicted) whenever it is defined
        f1 = np.where(support + predicted > 0, 2 * tp / (support + predicted), 0.0)
    present = (support + predicted) > 0
    return f1, present


def macro_f1(cm):
    """Unweighted mean of per-class F1 over classes seen in truth or prediction."""
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.sum() <= 0:
        raise MetricInputError("macro_f1 needs a non-empty square confusion matrix")
    f1, present = per_class_f1(cm)
    return float(f1[present].mean())


def micro_f1(cm):
    """Micro-averaged F1; for single-label multi-class data this is accuracy."""
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.sum() <= 0:
        raise MetricInputError("micro_f1 needs a non-empty square confusion matrix")
    return float(np.trace(cm) / cm.sum())


AVERAGES = {"macro": macro_f1, "micro": micro_f1}


def f1_score(true_labels, predicted, num_classes, average="macro"):
    try:
        fn = AVERAGES[average]
    except KeyError:
        raise MetricInputError(f"unknown average {average!r}") from None
    return fn(confusion(true_labels, predicted, num_classes))
