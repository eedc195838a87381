"""Plain-text/CSV result tables and a static radar figure."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict

import numpy as np

from .models import DISPLAY_NAMES
from .pipeline.metrics import FoldMetrics

# rows of the metric table, in display order
TABLE_ROWS = (
    ("balanced_accuracy", "Balanced Accuracy"),
    ("weighted_precision", "Weighted Precision"),
    ("weighted_recall", "Weighted Recall"),
    ("weighted_f1", "Weighted F1"),
    ("precision_down", "Precision q-1"),
    ("precision_flat", "Precision q0"),
    ("precision_up", "Precision q+1"),
    ("recall_down", "Recall q-1"),
    ("recall_flat", "Recall q0"),
    ("recall_up", "Recall q+1"),
    ("f1_down", "F1 q-1"),
    ("f1_flat", "F1 q0"),
    ("f1_up", "F1 q+1"),
    ("mcc", "MCC"),
    ("kappa", "Cohen's Kappa"),
)
RADAR_AXES = (("balanced_accuracy", "Balanced Accuracy"), ("weighted_f1", "Weighted F1"), ("mcc", "MCC"))


def _name(kind: str) -> str:
    return DISPLAY_NAMES.get(kind, kind)


def summarize(rows: list[dict], recompute: bool = True) -> dict[tuple[int, str], dict]:
    """Mean of every table metric over folds, keyed by (horizon, model).

    With ``recompute`` the metrics are derived again from the stored confusion
    cells rather than read from their columns.
    """
    if not rows:
        raise ValueError("no fold metrics to summarize")
    groups: dict[tuple[int, str], list[dict]] = defaultdict(list)
    for r in rows:
        groups[(int(r["horizon"]), r["model"])].append(r)
    out = {}
    for key, items in groups.items():
        vals = defaultdict(list)
        for r in items:
            if recompute:
                cm = [[int(r[f"cm_{i}{j}"]) for j in range(3)] for i in range(3)]
                flat = FoldMetrics.from_confusion(cm).flat()
            else:
                flat = {k: float(r[k]) for k, _ in TABLE_ROWS}
            for k, _ in TABLE_ROWS:
                vals[k].append(float(flat[k]))
        out[key] = {k: float(np.mean(v)) for k, v in vals.items()}
        out[key]["folds"] = len(items)
    return out


def render_metric_table(rows: list[dict], models: list[str] | None = None) -> tuple[str, str]:
    """Metrics x (model, horizon) table of fold means; returns (text, csv)."""
    summary = summarize(rows)
    horizons = sorted({h for h, _ in summary})
    if models is None:
        models = sorted({m for _, m in summary})
    cols = [(h, m) for h in horizons for m in models if (h, m) in summary]
    head = [f"{_name(m)} h={h} (n={summary[(h, m)]['folds']})" for h, m in cols]
    width = max(len(s) for s in head + ["0.0000"])
    label_w = max(len(label) for _, label in TABLE_ROWS)
    lines = [" " * label_w + " | " + " | ".join(s.rjust(width) for s in head)]
    lines.append("-" * len(lines[0]))
    for key, label in TABLE_ROWS:
        cells = [f"{summary[c][key]:.4f}".rjust(width) for c in cols]
        lines.append(label.ljust(label_w) + " | " + " | ".join(cells))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric"] + [f"{m}@{h}" for h, m in cols])
    w.writerow(["folds"] + [summary[c]["folds"] for c in cols])
    for key, _ in TABLE_ROWS:
        w.writerow([key] + [repr(summary[c][key]) for c in cols])
    return "\n".join(lines) + "\n", buf.getvalue()


def render_tier_table(ranking: dict, title: str = "") -> str:
    """One row per tier, best first; intersections are listed after the tiers."""
    lines = [title] if title else []
    for i, tier in enumerate(ranking["tiers"], start=1):
        lines.append(f"  {i}. " + " / ".join(_name(m) for m in tier))
    for item in ranking.get("intersections", []):
        tiers = ", ".join(str(t + 1) for t in item["tiers"])
        lines.append(f"  * {_name(item['model'])} spans tier(s) {tiers}: {item['reason']}")
    return "\n".join(lines) + "\n"


def render_rankings(doc: dict) -> str:
    parts = []
    for h in sorted(doc["rankings"], key=int):
        for metric in sorted(doc["rankings"][h]):
            parts.append(render_tier_table(doc["rankings"][h][metric], f"Ranking by {metric}, horizon {h}"))
    return "\n".join(parts)


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def render_radar(summary: dict[str, dict[str, dict[str, float]]], axes=RADAR_AXES, panel: int = 320) -> str:
    """SVG with one radar panel per horizon and one polygon per model.

    ``summary`` maps horizon label -> model -> metric -> value. Radii are the
    metric value clipped to [0, 1], so negative MCC collapses to the center.
    """
    if len(axes) < 3:
        raise ValueError("a radar plot needs at least three axes")
    horizons = sorted(summary, key=lambda h: (len(str(h)), str(h)))
    models = sorted({m for h in horizons for m in summary[h]})
    colors = {m: _PALETTE[i % len(_PALETTE)] for i, m in enumerate(models)}
    r_max = panel * 0.32
    legend_h = 18 * len(models) + 10
    width, height = panel * max(len(horizons), 1), panel + legend_h
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">']
    n = len(axes)
    angle = [-math.pi / 2 + 2 * math.pi * k / n for k in range(n)]

    def pt(cx, cy, r, k):
        return f"{cx + r * math.cos(angle[k]):.2f},{cy + r * math.sin(angle[k]):.2f}"

    for p, h in enumerate(horizons):
        cx, cy = panel * p + panel / 2, panel / 2 + 10
        out.append(f'<text x="{cx:.2f}" y="14" text-anchor="middle" font-size="13">horizon {h}</text>')
        for frac in (0.25, 0.5, 0.75, 1.0):
            ring = " ".join(pt(cx, cy, r_max * frac, k) for k in range(n))
            out.append(f'<polygon points="{ring}" fill="none" stroke="#cccccc" stroke-width="0.8"/>')
        for k, (_, label) in enumerate(axes):
            out.append(f'<line x1="{cx:.2f}" y1="{cy:.2f}" x2="{pt(cx, cy, r_max, k).split(",")[0]}" '
                       f'y2="{pt(cx, cy, r_max, k).split(",")[1]}" stroke="#999999" stroke-width="0.8"/>')
            lx, ly = pt(cx, cy, r_max + 16, k).split(",")
            out.append(f'<text x="{lx}" y="{ly}" text-anchor="middle">{label}</text>')
        for m in models:
            if m not in summary[h]:
                continue
            vals = [min(max(float(summary[h][m][key]), 0.0), 1.0) for key, _ in axes]
            poly = " ".join(pt(cx, cy, r_max * v, k) for k, v in enumerate(vals))
            out.append(f'<polygon points="{poly}" fill="{colors[m]}" fill-opacity="0.12" '
                       f'stroke="{colors[m]}" stroke-width="1.5"><title>{_name(m)}</title></polygon>')
    for i, m in enumerate(models):
        y = panel + 12 + 18 * i
        out.append(f'<rect x="10" y="{y - 9}" width="12" height="12" fill="{colors[m]}"/>')
        out.append(f'<text x="28" y="{y + 1}">{_name(m)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def radar_summary(rows: list[dict]) -> dict[str, dict[str, dict[str, float]]]:
    out: dict[str, dict[str, dict[str, float]]] = {}
    for (h, m), vals in summarize(rows).items():
        out.setdefault(str(h), {})[m] = {k: vals[k] for k, _ in RADAR_AXES}
    return out
