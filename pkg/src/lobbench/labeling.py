"""Event-time return labels.

Horizons count non-zero mid-price log-returns rather than ticks: the endpoint
of a sample at tick ``t`` is the first tick ``t'`` by which ``delta_tau``
non-zero returns have occurred. The target return over ``(t, t']`` is then
binned with training-set quartiles into classes -1 / 0 / +1, stored as class
indices 0 / 1 / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

CLASS_VALUES = (-1, 0, 1)
DOWN, FLAT, UP = 0, 1, 2


@dataclass(frozen=True)
class ReturnSeries:
    mids: np.ndarray
    returns: np.ndarray

    @classmethod
    def from_mids(cls, mids) -> "ReturnSeries":
        mids = np.asarray(mids, dtype=np.float64)
        return cls(mids, log_returns(mids))


@dataclass(frozen=True)
class HorizonSpec:
    delta_tau: int

    def __post_init__(self):
        if int(self.delta_tau) < 1:
            raise ValueError("delta_tau must be >= 1")


@dataclass(frozen=True)
class QuantileThresholds:
    q25: float
    q75: float
    source: str = "train"

    def __post_init__(self):
        if self.q25 > self.q75:
            raise ValueError("q25 must not exceed q75")

    def to_dict(self) -> dict:
        return {"q25": self.q25, "q75": self.q75, "source": self.source}


def mid_price(state) -> float | np.ndarray:
    """Mean of best ask and best bid, for a LobState or rows of flat books."""
    if hasattr(state, "best_ask"):
        return (state.best_ask + state.best_bid) / 2.0
    flat = np.asarray(state, dtype=np.float64)
    return (flat[..., 0] + flat[..., 2]) / 2.0


def log_returns(mids) -> np.ndarray:
    mids = np.asarray(mids, dtype=np.float64)
    if mids.size < 2:
        raise ValueError("need at least two mid-prices")
    if not (mids > 0).all():
        raise ValueError("mid-prices must be positive")
    return np.diff(np.log(mids))


def heaviside(x) -> np.ndarray:
    """1 where x > 0, else 0 (so the step at 0 is 0)."""
    return (np.asarray(x) > 0).astype(np.int64)


def horizon_endpoint(returns: Sequence[float], t: int, h: HorizonSpec | int) -> int | None:
    """Smallest t' > t whose returns r_t..r_{t'-1} contain exactly delta_tau non-zero values."""
    dt = h.delta_tau if isinstance(h, HorizonSpec) else int(h)
    r = np.asarray(returns)
    if not 0 <= t <= len(r):
        raise IndexError(f"start index {t} outside 0..{len(r)}")
    nz = np.flatnonzero(heaviside(np.abs(r[t:])))
    if nz.size < dt:
        return None
    return t + int(nz[dt - 1]) + 1


def horizon_endpoints(returns, h: HorizonSpec | int) -> np.ndarray:
    """``horizon_endpoint`` for every start tick 0..len(returns); -1 marks no endpoint."""
    dt = h.delta_tau if isinstance(h, HorizonSpec) else int(h)
    r = np.asarray(returns)
    nz = np.flatnonzero(heaviside(np.abs(r)))
    before = np.concatenate([[0], np.cumsum(heaviside(np.abs(r)))])  # non-zero count in r[:t]
    j = before + dt - 1
    out = np.full(len(r) + 1, -1, dtype=np.int64)
    ok = j < nz.size
    out[ok] = nz[j[ok]] + 1
    return out


def label_return(returns, t: int, t_end: int) -> float:
    """Cumulative log-return over (t, t_end], summed with compensated rounding."""
    return math.fsum(np.asarray(returns)[t:t_end])


def label_returns_from_mids(mids, starts, ends) -> np.ndarray:
    logm = np.log(np.asarray(mids, dtype=np.float64))
    return logm[np.asarray(ends)] - logm[np.asarray(starts)]


def fit_quantile_thresholds(returns, source: str = "train") -> QuantileThresholds:
    """25th/75th percentiles, linearly interpolated between order statistics."""
    r = np.asarray(returns, dtype=np.float64)
    if r.size == 0:
        raise ValueError("cannot fit thresholds on an empty sample")
    q25, q75 = np.quantile(r, [0.25, 0.75], method="linear")
    return QuantileThresholds(float(q25), float(q75), source)


def classify(r, thresholds: QuantileThresholds) -> np.ndarray | int:
    """Class index 0 below q25, 2 above q75, 1 on the closed middle interval."""
    arr = np.asarray(r, dtype=np.float64)
    out = np.where(arr < thresholds.q25, DOWN, np.where(arr > thresholds.q75, UP, FLAT))
    return int(out) if out.ndim == 0 else out
