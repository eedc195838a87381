"""Labelled window sets assembled from independent book segments.

Windows and horizon endpoints never cross a segment boundary: each snapshot
file (or each slice of a synthetic stream) is labelled on its own and the
segments are then concatenated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data.scaling import ScalerParams, transform
from ..data.windows import WINDOW, gather_windows
from ..labeling import QuantileThresholds, classify, horizon_endpoints, label_returns_from_mids, log_returns, mid_price


@dataclass
class Segment:
    segment_id: str
    flat: np.ndarray  # raw books, prices in currency units

    @property
    def mids(self) -> np.ndarray:
        return mid_price(self.flat)


@dataclass
class HorizonLabels:
    """Per-segment label columns for one horizon: start tick, endpoint, target return."""

    segment_id: str
    delta_tau: int
    ticks: np.ndarray
    ends: np.ndarray
    targets: np.ndarray


def label_segment(seg: Segment, delta_tau: int, window: int = WINDOW) -> HorizonLabels:
    mids = seg.mids
    if len(mids) < 2:
        empty = np.empty(0, dtype=np.int64)
        return HorizonLabels(seg.segment_id, delta_tau, empty, empty, np.empty(0))
    ends = horizon_endpoints(log_returns(mids), delta_tau)
    ticks = np.flatnonzero(ends >= 0)
    ticks = ticks[ticks >= window - 1]
    targets = label_returns_from_mids(mids, ticks, ends[ticks])
    return HorizonLabels(seg.segment_id, delta_tau, ticks, ends[ticks], targets)


@dataclass
class WindowSet:
    """Scaled states of several segments plus the labelled window ends into them."""

    features: np.ndarray
    ends: np.ndarray
    labels: np.ndarray
    targets: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self) -> int:
        return len(self.ends)

    def windows(self, idx=None) -> np.ndarray:
        ends = self.ends if idx is None else self.ends[idx]
        return gather_windows(self.features, ends)


def build_window_set(segments: list[Segment], labels: list[HorizonLabels], scaler: ScalerParams,
                     thresholds: QuantileThresholds, dtype="float32") -> WindowSet:
    feats, ends, classes, targets = [], [], [], []
    offset = 0
    for seg, lab in zip(segments, labels):
        if seg.segment_id != lab.segment_id:
            raise ValueError("segments and labels are not aligned")
        feats.append(transform(seg.flat, scaler).astype(dtype))
        ends.append(lab.ticks + offset)
        classes.append(classify(lab.targets, thresholds))
        targets.append(lab.targets)
        offset += len(seg.flat)
    return WindowSet(np.concatenate(feats), np.concatenate(ends).astype(np.int64),
                     np.concatenate(classes).astype(np.int64), np.concatenate(targets))
