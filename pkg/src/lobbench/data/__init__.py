from .book import (DEPTH, PRICE_SCALE, BookValidationError, LobState, MalformedRowError, ParseStats,
                   load_orderbook_file, parse_orderbook_rows, serialize_states, write_orderbook_file)
from .scaling import ScalerParams, fit_minmax_chunked, transform
from .synthetic import SyntheticConfig, generate_synthetic_lob, imbalance_pattern, next_move_direction
from .windows import WINDOW, gather_windows, make_windows

__all__ = [
    "DEPTH", "PRICE_SCALE", "WINDOW", "BookValidationError", "LobState", "MalformedRowError", "ParseStats",
    "ScalerParams", "SyntheticConfig", "fit_minmax_chunked", "gather_windows", "generate_synthetic_lob",
    "imbalance_pattern", "load_orderbook_file", "make_windows", "next_move_direction", "parse_orderbook_rows",
    "serialize_states", "transform", "write_orderbook_file",
]
