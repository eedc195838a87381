from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Iterable

import numpy as np

from .book import PRICE_SCALE, LobState


@dataclass(frozen=True)
class ScalerParams:
    """Per-column min/max over the flat book features.

    ``rows_seen`` counts the snapshots the fit consumed.
    """

    per_column_min: np.ndarray
    per_column_max: np.ndarray
    rows_seen: int
    price_scale: int = PRICE_SCALE

    def merge(self, other: "ScalerParams") -> "ScalerParams":
        return ScalerParams(np.minimum(self.per_column_min, other.per_column_min),
                            np.maximum(self.per_column_max, other.per_column_max),
                            self.rows_seen + other.rows_seen, self.price_scale)

    def to_json(self) -> str:
        return json.dumps({"min": self.per_column_min.tolist(), "max": self.per_column_max.tolist(),
                           "price_scale": self.price_scale, "rows_seen": self.rows_seen}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ScalerParams":
        d = json.loads(text)
        return cls(np.asarray(d["min"], dtype=np.float64), np.asarray(d["max"], dtype=np.float64),
                   int(d.get("rows_seen", 0)), int(d.get("price_scale", PRICE_SCALE)))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "ScalerParams":
        return cls.from_json(Path(path).read_text())


def _as_matrix(chunk) -> np.ndarray:
    if isinstance(chunk, np.ndarray):
        return np.atleast_2d(chunk)
    return np.array([s.flatten() if isinstance(s, LobState) else s for s in chunk], dtype=np.float64)


def _fit_one(chunk, price_scale: int) -> ScalerParams:
    m = _as_matrix(chunk)
    return ScalerParams(m.min(axis=0), m.max(axis=0), m.shape[0], price_scale)


def fit_minmax_chunked(chunks: Iterable, price_scale: int = PRICE_SCALE) -> ScalerParams:
    """Fit per-column min/max by reducing over chunks of snapshots.

    Each chunk is an [n, 40] array or a sequence of LobStates. Empty chunks are
    ignored; the result does not depend on where chunk boundaries fall.
    """
    parts = [_fit_one(c, price_scale) for c in chunks if len(c)]
    if not parts:
        raise ValueError("cannot fit a scaler on empty input")
    return reduce(ScalerParams.merge, parts)


def transform(x, params: ScalerParams) -> np.ndarray:
    """Min-max scale with the fitted params; degenerate columns map to 0, no clipping."""
    if params is None:
        raise ValueError("scaler params are not fitted")
    arr = x.flatten() if isinstance(x, LobState) else np.asarray(x, dtype=np.float64)
    span = params.per_column_max - params.per_column_min
    safe = np.where(span > 0, span, 1.0)
    out = (arr - params.per_column_min) / safe
    return np.where(span > 0, out, 0.0)
