"""Plain-array forms of the activations and loss, for inference and reporting."""

from __future__ import annotations

import numpy as np

from .ops import LOG_EPS


def softmax(x, axis: int = -1) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(x - x.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def tanh(x) -> np.ndarray:
    return np.tanh(np.asarray(x, dtype=np.float64))


def categorical_crossentropy(pred, target, tol: float = 1e-6) -> float:
    """Batch-mean ``-sum(target * log(pred + eps))`` for probability rows."""
    pred = np.atleast_2d(np.asarray(pred, dtype=np.float64))
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    if pred.shape != target.shape:
        raise ValueError(f"pred {pred.shape} and target {target.shape} differ")
    if np.any(np.abs(pred.sum(axis=-1) - 1.0) > tol):
        raise ValueError("prediction rows must sum to 1")
    return float(-(target * np.log(pred + LOG_EPS)).sum(axis=-1).mean())


def one_hot(labels, n_classes: int = 3, dtype=np.float64) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((labels.size, n_classes), dtype=dtype)
    out[np.arange(labels.size), labels] = 1
    return out
