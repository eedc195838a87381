from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

WINDOW = 10


def make_windows(states, length: int = WINDOW) -> np.ndarray:
    """Stack every run of ``length`` consecutive rows, most recent row last.

    Returns a read-only view of shape [n - length + 1, length, n_features];
    window ``i`` ends at state ``i + length - 1``. Too-short input gives an
    empty array.
    """
    arr = np.asarray(states)
    if arr.ndim != 2:
        raise ValueError(f"expected a [n, features] array, got shape {arr.shape}")
    if arr.shape[0] < length:
        return np.empty((0, length, arr.shape[1]), dtype=arr.dtype)
    return np.swapaxes(sliding_window_view(arr, length, axis=0), 1, 2)


def gather_windows(states: np.ndarray, ends: np.ndarray, length: int = WINDOW) -> np.ndarray:
    """Windows ending at the given state indices, as a fresh [len(ends), length, F] array."""
    ends = np.asarray(ends, dtype=np.int64)
    if ends.size and (ends.min() < length - 1 or ends.max() >= len(states)):
        raise IndexError("window end index out of range")
    return states[ends[:, None] + np.arange(1 - length, 1)]
