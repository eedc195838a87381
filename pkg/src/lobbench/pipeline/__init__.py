from .dataset import HorizonLabels, Segment, WindowSet, build_window_set, label_segment
from .evaluation import FOLD_SIZE, evaluate_fold, make_test_folds
from .metrics import (METRIC_COLUMNS, FoldMetrics, balanced_accuracy, cohen_kappa, confusion_matrix, mcc,
                      per_class_prf, weighted_prf)
from .training import TrainConfig, TrainResult, sample_batch_indices, train

__all__ = [
    "FOLD_SIZE", "METRIC_COLUMNS", "FoldMetrics", "HorizonLabels", "Segment", "TrainConfig", "TrainResult",
    "WindowSet", "balanced_accuracy", "build_window_set", "cohen_kappa", "confusion_matrix", "evaluate_fold",
    "label_segment", "make_test_folds", "mcc", "per_class_prf", "sample_batch_indices", "train", "weighted_prf",
]
