"""Classification metrics computed from a 3x3 confusion matrix (rows truth, columns prediction).

Zero-support conventions: a class never predicted has precision 0, a class
with no true instances has recall 0 and is left out of balanced accuracy, and
F1 is 0 when precision + recall is 0.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

N_CLASSES = 3
CLASS_TAGS = ("down", "flat", "up")


def confusion_matrix(truth, pred, n_classes: int = N_CLASSES) -> np.ndarray:
    truth = np.asarray(truth, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if truth.shape != pred.shape:
        raise ValueError("truth and prediction lengths differ")
    return np.bincount(truth * n_classes + pred, minlength=n_classes * n_classes).reshape(n_classes, n_classes)


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def per_class_prf(cm) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    precision = _safe_div(tp, cm.sum(axis=0))
    recall = _safe_div(tp, cm.sum(axis=1))
    f1 = _safe_div(2 * precision * recall, precision + recall)
    return precision, recall, f1


def balanced_accuracy(cm) -> float:
    cm = np.asarray(cm, dtype=np.float64)
    support = cm.sum(axis=1)
    present = support > 0
    if not present.any():
        return 0.0
    return float(np.mean(np.diag(cm)[present] / support[present]))


def weighted_prf(cm) -> tuple[float, float, float]:
    cm = np.asarray(cm, dtype=np.float64)
    total = cm.sum()
    if total == 0:
        return 0.0, 0.0, 0.0
    w = cm.sum(axis=1) / total
    p, r, f = per_class_prf(cm)
    return float(w @ p), float(w @ r), float(w @ f)


def mcc(cm) -> float:
    """Multiclass Matthews correlation in covariance form; 0 when a marginal is constant."""
    cm = np.asarray(cm, dtype=np.float64)
    s = cm.sum()
    c = np.trace(cm)
    t = cm.sum(axis=1)
    p = cm.sum(axis=0)
    cov_tp = c * s - t @ p
    cov_pp = s * s - p @ p
    cov_tt = s * s - t @ t
    if cov_pp == 0 or cov_tt == 0:
        return 0.0
    return float(cov_tp / np.sqrt(cov_pp * cov_tt))


def cohen_kappa(cm) -> float:
    cm = np.asarray(cm, dtype=np.float64)
    n = cm.sum()
    if n == 0:
        return 0.0
    po = np.trace(cm) / n
    pe = (cm.sum(axis=1) @ cm.sum(axis=0)) / (n * n)
    if pe == 1:
        return 0.0
    return float((po - pe) / (1 - pe))


@dataclass(frozen=True)
class FoldMetrics:
    fold: int
    confusion: tuple[tuple[int, ...], ...]
    balanced_accuracy: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    precision: tuple[float, float, float]
    recall: tuple[float, float, float]
    f1: tuple[float, float, float]
    mcc: float
    kappa: float

    @classmethod
    def from_confusion(cls, cm, fold: int = 0) -> "FoldMetrics":
        cm = np.asarray(cm, dtype=np.int64)
        if cm.shape != (N_CLASSES, N_CLASSES) or (cm < 0).any():
            raise ValueError("confusion must be a non-negative 3x3 integer matrix")
        wp, wr, wf = weighted_prf(cm)
        p, r, f = per_class_prf(cm)
        return cls(fold, tuple(map(tuple, cm.tolist())), balanced_accuracy(cm), wp, wr, wf,
                   tuple(p.tolist()), tuple(r.tolist()), tuple(f.tolist()), mcc(cm), cohen_kappa(cm))

    def flat(self) -> dict:
        """Column name -> value, the layout used by the fold-metrics CSV."""
        row = {f"cm_{i}{j}": self.confusion[i][j] for i in range(N_CLASSES) for j in range(N_CLASSES)}
        row.update(balanced_accuracy=self.balanced_accuracy, weighted_precision=self.weighted_precision,
                   weighted_recall=self.weighted_recall, weighted_f1=self.weighted_f1)
        for name in ("precision", "recall", "f1"):
            for tag, v in zip(CLASS_TAGS, getattr(self, name)):
                row[f"{name}_{tag}"] = v
        row.update(mcc=self.mcc, kappa=self.kappa)
        return row

    def to_dict(self) -> dict:
        return asdict(self)


METRIC_COLUMNS = tuple(FoldMetrics.from_confusion(np.eye(3, dtype=int)).flat().keys())
