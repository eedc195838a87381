from __future__ import annotations

import numpy as np

from .dataset import WindowSet
from .metrics import FoldMetrics, confusion_matrix

FOLD_SIZE = 500_000


def make_test_folds(n_samples: int, fold_size: int = FOLD_SIZE) -> list[np.ndarray]:
    """Consecutive disjoint index blocks of ``fold_size``; a short remainder is dropped."""
    if fold_size < 1:
        raise ValueError("fold_size must be positive")
    n_folds = n_samples // fold_size
    if n_folds == 0:
        raise ValueError(f"{n_samples} test samples cannot fill one fold of {fold_size}")
    return [np.arange(k * fold_size, (k + 1) * fold_size) for k in range(n_folds)]


def evaluate_fold(model, data: WindowSet, fold: np.ndarray, fold_id: int = 0,
                  batch_size: int = 4096) -> FoldMetrics:
    truth = data.labels[fold]
    preds = []
    for i in range(0, len(fold), batch_size):
        chunk = fold[i:i + batch_size]
        preds.append(model.predict(data.windows(chunk)))
    pred = np.concatenate(preds) if preds else np.empty(0, dtype=np.int64)
    return FoldMetrics.from_confusion(confusion_matrix(truth, pred), fold=fold_id)
