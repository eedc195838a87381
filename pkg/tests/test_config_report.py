import numpy as np
import pytest

from lobbench.config import ConfigError, ExperimentConfig, derive_seed
from lobbench.pipeline.metrics import METRIC_COLUMNS, FoldMetrics
from lobbench.report import RADAR_AXES, render_metric_table, render_radar, render_tier_table, summarize


def test_config_roundtrip_is_lossless(tmp_path):
    cfg = ExperimentConfig.from_dict({"horizons": [10, 50], "models": ["mlp", "naive"], "rho": 0.2,
                                      "train": {"epochs": 3}, "data": {"synthetic": {"signal_strength": 0.7}}})
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    back = ExperimentConfig.load(path)
    assert back == cfg and back.to_json() == cfg.to_json()
    assert back.config_hash() == cfg.config_hash()
    assert cfg.with_overrides(out_dir="elsewhere", workers=4).config_hash() == cfg.config_hash()
    assert cfg.with_overrides(seed=1).config_hash() != cfg.config_hash()


def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.horizons == (10, 50, 100) and cfg.rope == 0.03 and cfg.threshold == 0.95
    assert cfg.train.batch_size == 1024 and cfg.train.epochs == 30 and cfg.fold_size == 500_000
    assert len(cfg.models) == 7


@pytest.mark.parametrize("bad", [
    {"models": []},
    {"horizons": []},
    {"models": ["svm"]},
    {"rope": -1},
    {"rho": 1.0},
    {"unknown_key": 1},
    {"train": {"epochs": 0}},
    {"data": {"source": "files", "train_files": ["/nonexistent"], "test_files": ["/nonexistent"]}},
    {"data": {"source": "tape"}},
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad).validate()


def test_seed_derivation_is_stable_and_independent():
    a = derive_seed(0, "init", "mlp", 10)
    assert a == derive_seed(0, "init", "mlp", 10)
    assert a != derive_seed(1, "init", "mlp", 10)
    assert a != derive_seed(0, "init", "mlp", 50)
    # adding a model to the config leaves existing seeds untouched
    from lobbench.runner import Run
    small = Run(ExperimentConfig(models=("mlp",), horizons=(10,))).seeds()
    large = Run(ExperimentConfig(models=("mlp", "lstm"), horizons=(10,))).seeds()
    assert small["mlp@10"] == large["mlp@10"]


# -- report ------------------------------------------------------------------

def fold_row(model, horizon, fold, cm):
    flat = FoldMetrics.from_confusion(cm, fold).flat()
    row = {"model": model, "horizon": str(horizon), "fold": str(fold)}
    row.update({k: repr(float(v)) if not k.startswith("cm_") else str(v) for k, v in flat.items()})
    return row


def test_single_fold_table_equals_fold_metrics():
    cm = np.array([[5, 2, 1], [1, 9, 2], [0, 3, 6]])
    text, table = render_metric_table([fold_row("mlp", 10, 0, cm)])
    fm = FoldMetrics.from_confusion(cm).flat()
    lines = table.strip().splitlines()
    assert lines[0] == "metric,mlp@10" and lines[1] == "folds,1"
    for line in lines[2:]:
        key, val = line.split(",")
        assert float(val) == fm[key]
    assert "Multilayer Perceptron h=10 (n=1)" in text


def test_table_values_recomputed_from_confusions():
    rng = np.random.default_rng(0)
    rows = [fold_row(m, h, k, rng.integers(0, 50, (3, 3))) for m in ("a", "b") for h in (10, 50) for k in range(4)]
    for r in rows:  # corrupt the stored metric columns; the summary must not read them
        r["mcc"] = "9.0"
    summary = summarize(rows)
    for (h, m), vals in summary.items():
        ms = [FoldMetrics.from_confusion([[int(r[f"cm_{i}{j}"]) for j in range(3)] for i in range(3)]).mcc
              for r in rows if r["model"] == m and int(r["horizon"]) == h]
        assert vals["mcc"] == pytest.approx(np.mean(ms), abs=1e-15)
        assert vals["folds"] == 4
    assert set(METRIC_COLUMNS) >= {k for k in summary[(10, "a")] if k != "folds"}


def test_tier_table_rows():
    text = render_tier_table({"tiers": [["A", "B"], ["C"]], "intersections": []})
    assert text.splitlines() == ["  1. A / B", "  2. C"]


def test_radar_properties():
    same = {"10": {"m1": {"balanced_accuracy": 0.5, "weighted_f1": 0.6, "mcc": 0.3},
                   "m2": {"balanced_accuracy": 0.5, "weighted_f1": 0.6, "mcc": 0.3}}}
    svg = render_radar(same)
    polys = [line for line in svg.splitlines() if "<title>" in line]
    pts = [p.split('points="')[1].split('"')[0] for p in polys]
    assert len(pts) == 2 and pts[0] == pts[1]
    zero = render_radar({"10": {"z": {k: 0.0 for k, _ in RADAR_AXES}}})
    poly = [line for line in zero.splitlines() if "<title>" in line][0]
    coords = {c for c in poly.split('points="')[1].split('"')[0].split()}
    assert len(coords) == 1  # every vertex at the panel center
    assert render_radar(same) == svg
    with pytest.raises(ValueError):
        render_radar(same, axes=RADAR_AXES[:2])
    assert svg.index("Balanced Accuracy") < svg.index("Weighted F1") < svg.index(">MCC<")
