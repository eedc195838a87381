"""Seeded synthetic depth-10 books on a tick grid with a planted imbalance signal.

The book keeps a one-tick spread and moves the whole ladder by one tick per
mid-price move. A hidden pressure regime (-1, 0, +1) persists across moves:

* under pressure ``d`` the top of book is lopsided toward ``d`` (bid-heavy for
  +1) and each move goes in direction ``d`` with probability
  ``(1 + signal_strength) / 2``;
* the neutral regime keeps the top of book balanced and moves are fair coins.

So a lopsided top of book (see ``imbalance_pattern``) precedes a same-direction
move with probability ``(1 + s) / 2`` and carries no information at ``s = 0``.
When a new pressure regime starts its direction leans back toward the initial
mid so long streams stay in range.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .book import DEPTH, PRICE_SCALE

PATTERN_THRESHOLD = 0.3
_NEUTRAL_TOP = (40, 60)
_STRONG_TOP = (70, 100)
_WEAK_TOP = (5, 30)
_DEEP = (1, 100)


@dataclass(frozen=True)
class SyntheticConfig:
    tick_size: float = 0.01
    lot_size: int = 1
    initial_mid: float = 100.005
    n_events: int = 100_000
    seed: int = 0
    signal_strength: float = 0.0
    depth: int = DEPTH
    move_probability: float = 0.3
    regime_moves: float = 200.0
    reversion_ticks: float = 100.0
    price_scale: int = PRICE_SCALE

    def __post_init__(self):
        if not self.tick_size > 0:
            raise ValueError("tick_size must be positive")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise ValueError("signal_strength must lie in [0, 1]")
        if self.n_events < 1 or self.depth < 1 or self.lot_size < 1:
            raise ValueError("n_events, depth and lot_size must be positive")
        if not 0.0 < self.move_probability <= 1.0:
            raise ValueError("move_probability must lie in (0, 1]")
        if self.regime_moves < 1 or self.reversion_ticks <= 0:
            raise ValueError("regime_moves must be >= 1 and reversion_ticks > 0")
        if not self.initial_mid > self.tick_size * (self.depth + 1):
            raise ValueError("initial_mid too small for the requested depth")

    def to_dict(self) -> dict:
        return asdict(self)


def imbalance_pattern(flat) -> np.ndarray:
    """-1/0/+1 per row: sign of the top-of-book volume imbalance when it exceeds the threshold."""
    flat = np.atleast_2d(np.asarray(flat, dtype=np.float64))
    va, vb = flat[:, 1], flat[:, 3]
    imb = (vb - va) / (vb + va)
    return np.where(imb > PATTERN_THRESHOLD, 1, np.where(imb < -PATTERN_THRESHOLD, -1, 0))


def generate_synthetic_lob(config: SyntheticConfig) -> np.ndarray:
    """Generate ``n_events`` snapshots as a [n, 4*depth] array (prices in currency units)."""
    cfg = config
    rng = np.random.default_rng(cfg.seed)
    n, depth = cfg.n_events, cfg.depth
    lot = cfg.lot_size

    u_move = rng.random(n)
    u_dir = rng.random(n)
    u_switch = rng.random(n)
    u_regime = rng.random(n)
    top_hi = rng.integers(_STRONG_TOP[0], _STRONG_TOP[1] + 1, n)
    top_lo = rng.integers(_WEAK_TOP[0], _WEAK_TOP[1] + 1, n)
    top_na = rng.integers(_NEUTRAL_TOP[0], _NEUTRAL_TOP[1] + 1, n)
    top_nb = rng.integers(_NEUTRAL_TOP[0], _NEUTRAL_TOP[1] + 1, n)
    deep_ask_lvl = rng.integers(1, max(depth, 2), n)
    deep_bid_lvl = rng.integers(1, max(depth, 2), n)
    deep_ask_vol = rng.integers(_DEEP[0], _DEEP[1] + 1, n)
    deep_bid_vol = rng.integers(_DEEP[0], _DEEP[1] + 1, n)
    refill = rng.integers(_DEEP[0], _DEEP[1] + 1, (n, 2))

    ask_vol = list(rng.integers(_DEEP[0], _DEEP[1] + 1, depth))
    bid_vol = list(rng.integers(_DEEP[0], _DEEP[1] + 1, depth))
    bid0 = int(math.floor(cfg.initial_mid / cfg.tick_size - 0.5))
    best_bid = bid0
    p_follow = 0.5 + 0.5 * cfg.signal_strength
    p_switch = 1.0 / cfg.regime_moves

    def new_regime(i: int) -> int:
        if u_regime[i] < 0.5:
            return 0
        lean = (best_bid - bid0) / cfg.reversion_ticks
        p_up = 1.0 / (1.0 + math.exp(max(min(lean, 50.0), -50.0)))
        return 1 if (u_regime[i] - 0.5) * 2.0 < p_up else -1

    regime = new_regime(0)
    bids = np.empty(n, dtype=np.int64)
    top = np.empty((n, 2), dtype=np.int64)
    deep = np.empty((n, 2, depth), dtype=np.int64)

    for i in range(n):
        if i > 0 and u_move[i] < cfg.move_probability:
            if regime == 0:
                step = 1 if u_dir[i] < 0.5 else -1
            else:
                step = regime if u_dir[i] < p_follow else -regime
            best_bid += step
            if step > 0:
                ask_vol = ask_vol[1:] + [int(refill[i, 0])]
                bid_vol = [int(refill[i, 1])] + bid_vol[:-1]
            else:
                bid_vol = bid_vol[1:] + [int(refill[i, 1])]
                ask_vol = [int(refill[i, 0])] + ask_vol[:-1]
            if u_switch[i] < p_switch:
                regime = new_regime(i)
        if depth > 1:
            ask_vol[deep_ask_lvl[i]] = int(deep_ask_vol[i])
            bid_vol[deep_bid_lvl[i]] = int(deep_bid_vol[i])
        if regime == 0:
            va, vb = top_na[i], top_nb[i]
        elif regime > 0:
            va, vb = top_lo[i], top_hi[i]
        else:
            va, vb = top_hi[i], top_lo[i]
        bids[i] = best_bid
        top[i] = (va, vb)
        deep[i, 0] = ask_vol
        deep[i, 1] = bid_vol

    lv = np.arange(depth)
    ask_ticks = bids[:, None] + 1 + lv
    bid_ticks = bids[:, None] - lv
    if (bid_ticks[:, -1] <= 0).any():
        raise ValueError("synthetic price walked below zero; raise initial_mid")
    units = cfg.tick_size * cfg.price_scale
    flat = np.empty((n, 4 * depth), dtype=np.float64)
    flat[:, 0::4] = np.rint(ask_ticks * units) / cfg.price_scale
    flat[:, 2::4] = np.rint(bid_ticks * units) / cfg.price_scale
    ask_v = deep[:, 0, :].astype(np.float64)
    bid_v = deep[:, 1, :].astype(np.float64)
    ask_v[:, 0] = top[:, 0]
    bid_v[:, 0] = top[:, 1]
    flat[:, 1::4] = ask_v * lot
    flat[:, 3::4] = bid_v * lot
    return flat


def next_move_direction(flat: np.ndarray) -> np.ndarray:
    """Sign of the next non-zero mid change after each row (0 when none follows)."""
    mids = (flat[:, 0] + flat[:, 2]) / 2.0
    step = np.sign(np.diff(mids))
    out = np.zeros(len(mids), dtype=np.int64)
    nxt = 0
    for i in range(len(step) - 1, -1, -1):
        if step[i] != 0:
            nxt = int(step[i])
        out[i] = nxt
    return out
