"""Order-book snapshot rows: the LobState type and the comma-separated file layout.

A row holds ``4 * depth`` integers interleaved per level as
ask price, ask volume, bid price, bid volume, best level first. Integer prices
are divided by ``price_scale`` (10**4 by default, i.e. 1e-4 currency units).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, TextIO

import numpy as np

DEPTH = 10
PRICE_SCALE = 10_000


class MalformedRowError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class BookValidationError(ValueError):
    def __init__(self, lineno: int | None, message: str):
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)
        self.lineno = lineno


@dataclass(frozen=True)
class LobState:
    """One snapshot; each side is a tuple of (price, volume) pairs, best level first."""

    ask_levels: tuple[tuple[float, float], ...]
    bid_levels: tuple[tuple[float, float], ...]

    def __post_init__(self):
        problem = book_problem(self.ask_levels, self.bid_levels)
        if problem:
            raise BookValidationError(None, problem)

    @property
    def depth(self) -> int:
        return len(self.ask_levels)

    @property
    def best_ask(self) -> float:
        return self.ask_levels[0][0]

    @property
    def best_bid(self) -> float:
        return self.bid_levels[0][0]

    def flatten(self) -> np.ndarray:
        out = np.empty(4 * self.depth)
        for i, ((pa, va), (pb, vb)) in enumerate(zip(self.ask_levels, self.bid_levels)):
            out[4 * i:4 * i + 4] = (pa, va, pb, vb)
        return out

    @classmethod
    def from_flat(cls, values) -> "LobState":
        v = [float(x) for x in values]
        if len(v) % 4:
            raise ValueError(f"flat book length {len(v)} is not a multiple of 4")
        asks = tuple((v[i], v[i + 1]) for i in range(0, len(v), 4))
        bids = tuple((v[i + 2], v[i + 3]) for i in range(0, len(v), 4))
        return cls(asks, bids)


def book_problem(asks, bids) -> str | None:
    """Describe the first invariant a book violates, or None when it is valid."""
    if len(asks) != len(bids) or not asks:
        return f"ask/bid depth mismatch ({len(asks)} vs {len(bids)})"
    for side, levels in (("ask", asks), ("bid", bids)):
        for p, v in levels:
            if not p > 0:
                return f"non-positive {side} price {p}"
            if not v > 0:
                return f"non-positive {side} volume {v}"
    for a, b in zip(asks, asks[1:]):
        if not b[0] > a[0]:
            return "ask prices not strictly increasing"
    for a, b in zip(bids, bids[1:]):
        if not b[0] < a[0]:
            return "bid prices not strictly decreasing"
    if asks[0][0] < bids[0][0]:
        return f"crossed book: best ask {asks[0][0]} < best bid {bids[0][0]}"
    return None


def valid_rows(flat: np.ndarray) -> np.ndarray:
    """Vectorized ``book_problem(...) is None`` over rows of a [n, 4*depth] array."""
    ap, av, bp, bv = flat[:, 0::4], flat[:, 1::4], flat[:, 2::4], flat[:, 3::4]
    ok = (ap > 0).all(1) & (bp > 0).all(1) & (av > 0).all(1) & (bv > 0).all(1)
    ok &= (np.diff(ap, axis=1) > 0).all(1) & (np.diff(bp, axis=1) < 0).all(1)
    ok &= ap[:, 0] >= bp[:, 0]
    return ok


@dataclass
class ParseStats:
    rows: int = 0
    skipped: int = 0
    skipped_lines: list[int] = field(default_factory=list)


def _split(line: str, lineno: int, n_fields: int) -> list[str]:
    fields = line.strip().split(",")
    if len(fields) != n_fields:
        raise MalformedRowError(lineno, f"expected {n_fields} fields, found {len(fields)}")
    return fields


def parse_orderbook_rows(lines: Iterable[str] | TextIO, price_scale: int = PRICE_SCALE, depth: int = DEPTH,
                         on_invalid: str = "reject", stats: ParseStats | None = None) -> Iterator[LobState]:
    """Stream LobStates from snapshot lines, one per non-blank line.

    Wrong field counts always raise MalformedRowError. Books that break an
    invariant raise BookValidationError under ``on_invalid="reject"`` and are
    counted in ``stats`` under ``"skip"``.
    """
    if on_invalid not in ("reject", "skip"):
        raise ValueError(f"on_invalid must be 'reject' or 'skip', got {on_invalid!r}")
    stats = stats if stats is not None else ParseStats()
    n_fields = 4 * depth
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = _split(line, lineno, n_fields)
        try:
            nums = [float(f) for f in fields]
        except ValueError as exc:
            raise MalformedRowError(lineno, f"non-numeric field ({exc})") from None
        asks = tuple((nums[i] / price_scale, nums[i + 1]) for i in range(0, n_fields, 4))
        bids = tuple((nums[i + 2] / price_scale, nums[i + 3]) for i in range(0, n_fields, 4))
        problem = book_problem(asks, bids)
        if problem:
            if on_invalid == "reject":
                raise BookValidationError(lineno, problem)
            stats.skipped += 1
            stats.skipped_lines.append(lineno)
            continue
        stats.rows += 1
        yield LobState(asks, bids)


def format_row(values, price_scale: int = PRICE_SCALE) -> str:
    """Serialize one flat book (prices in currency units) back to the integer layout."""
    vals = np.asarray(values, dtype=np.float64)
    out = vals.copy()
    out[0::2] = np.rint(vals[0::2] * price_scale)
    return ",".join(str(int(x)) if float(x).is_integer() else repr(float(x)) for x in out)


def serialize_states(states: Iterable[LobState] | np.ndarray, price_scale: int = PRICE_SCALE) -> str:
    buf = io.StringIO()
    rows = states if isinstance(states, np.ndarray) else (s.flatten() for s in states)
    for row in rows:
        buf.write(format_row(row, price_scale))
        buf.write("\n")
    return buf.getvalue()


def write_orderbook_file(path, flat: np.ndarray, price_scale: int = PRICE_SCALE) -> None:
    Path(path).write_text(serialize_states(np.asarray(flat), price_scale))


def load_orderbook_file(path, price_scale: int = PRICE_SCALE, depth: int = DEPTH,
                        on_invalid: str = "reject") -> tuple[np.ndarray, ParseStats]:
    """Read a whole snapshot file into a [n, 4*depth] array (prices in currency units).

    Same validation contract as ``parse_orderbook_rows``, checked with array
    operations instead of per-row objects.
    """
    if on_invalid not in ("reject", "skip"):
        raise ValueError(f"on_invalid must be 'reject' or 'skip', got {on_invalid!r}")
    n_fields = 4 * depth
    rows: list[list[str]] = []
    linenos: list[int] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rows.append(_split(line, lineno, n_fields))
            linenos.append(lineno)
    try:
        flat = np.array(rows, dtype=np.float64).reshape(-1, n_fields)
    except ValueError as exc:
        raise MalformedRowError(0, f"non-numeric field ({exc})") from None
    flat[:, 0::2] /= price_scale
    ok = valid_rows(flat)
    stats = ParseStats(rows=int(ok.sum()))
    if not ok.all():
        bad = np.flatnonzero(~ok)
        if on_invalid == "reject":
            i = int(bad[0])
            asks = tuple(map(tuple, flat[i].reshape(-1, 4)[:, :2]))
            bids = tuple(map(tuple, flat[i].reshape(-1, 4)[:, 2:]))
            raise BookValidationError(linenos[i], book_problem(asks, bids) or "invalid book")
        stats.skipped = int(bad.size)
        stats.skipped_lines = [linenos[i] for i in bad]
        flat = flat[ok]
    return flat, stats
