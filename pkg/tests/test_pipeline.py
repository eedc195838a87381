import math

import numpy as np
import pytest

from lobbench.autodiff import Adam, NonFiniteError, ops
from lobbench.autodiff.functional import one_hot
from lobbench.data import SyntheticConfig, fit_minmax_chunked, generate_synthetic_lob
from lobbench.labeling import fit_quantile_thresholds, horizon_endpoint, log_returns
from lobbench.models import ModelSpec, build
from lobbench.pipeline import (Segment, TrainConfig, WindowSet, build_window_set, evaluate_fold, label_segment,
                               make_test_folds, sample_batch_indices, train)


def test_sampling_coverage_matches_with_replacement_value():
    n = 17_000_000
    batch, batches = 1024, 16_000
    draws = batch * batches
    rng = np.random.default_rng(0)
    seen = np.zeros(n, dtype=bool)
    for _ in range(batches):
        seen[sample_batch_indices(rng, n, batch)] = True
    unseen = 1.0 - seen.mean()
    expected = (1 - 1 / n) ** draws
    assert expected == pytest.approx(math.exp(-draws / n), rel=1e-6)
    assert unseen == pytest.approx(expected, rel=0.01)


def toy_set(n=32, seed=0):
    """Windows whose class is readable from one feature column."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 3, n)
    feats = rng.uniform(size=(n * 10, 40)) * 0.1
    feats[np.arange(n) * 10 + 9, 0] = labels / 2.0
    ends = np.arange(n) * 10 + 9
    return WindowSet(feats, ends, labels)


def test_mlp_overfits_a_fixed_batch():
    data = toy_set()
    model = build(ModelSpec("mlp", seed=1))
    x, y = data.windows(), one_hot(data.labels)
    opt = Adam([p for _, p in model.parameters()])

    def step():
        opt.zero_grad()
        loss = ops.softmax_cross_entropy(model(x), y)
        loss.backward()
        opt.step()
        return float(loss.data)

    first = step()
    for _ in range(499):
        last = step()
    assert last < 0.1 * first


def test_zero_learning_rate_changes_nothing():
    data = toy_set()
    model = build(ModelSpec("lstm", seed=2))
    before = [p.data.copy() for _, p in model.parameters()]
    res = train(model, data, TrainConfig(batch_size=32, batches_per_epoch=3, epochs=3, learning_rate=0.0),
                np.random.default_rng(0))
    for b, (_, p) in zip(before, model.parameters()):
        np.testing.assert_array_equal(b, p.data)
    assert len(res.epoch_losses) == 3 and res.steps == 9


def test_logistic_epochs_capped_and_baselines_skipped():
    data = toy_set()
    res = train(build(ModelSpec("logistic")), data, TrainConfig(batch_size=8, batches_per_epoch=1, epochs=25))
    assert len(res.epoch_losses) == 20
    assert train(build(ModelSpec("naive")), data, TrainConfig()).epoch_losses == []


def test_non_finite_input_aborts_training():
    data = toy_set()
    data.features[data.ends[0], 3] = np.nan
    with pytest.raises(NonFiniteError):
        train(build(ModelSpec("logistic")), data, TrainConfig(batch_size=32, batches_per_epoch=5, epochs=1),
              np.random.default_rng(0))


def test_train_config_rejects_bad_values():
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)
    assert TrainConfig().to_dict()["batches_per_epoch"] == 16_000


def test_segment_labels_respect_windows_and_endpoints():
    flat = generate_synthetic_lob(SyntheticConfig(n_events=3000, seed=4, signal_strength=0.5))
    seg = Segment("train_000", flat)
    lab = label_segment(seg, 10)
    r = log_returns(seg.mids)
    assert lab.ticks.min() >= 9
    for t, e in zip(lab.ticks[::37], lab.ends[::37]):
        assert horizon_endpoint(r, int(t), 10) == e
    assert np.all(lab.ends < len(flat))


def test_window_set_never_crosses_segments():
    cfg = SyntheticConfig(n_events=800, seed=5, signal_strength=0.5)
    a = Segment("train_000", generate_synthetic_lob(cfg))
    b = Segment("train_001", generate_synthetic_lob(SyntheticConfig(n_events=500, seed=6)))
    la, lb = label_segment(a, 5), label_segment(b, 5)
    scaler = fit_minmax_chunked([a.flat, b.flat])
    thr = fit_quantile_thresholds(np.concatenate([la.targets, lb.targets]))
    ws = build_window_set([a, b], [la, lb], scaler, thr, dtype="float64")
    assert len(ws) == len(la.ticks) + len(lb.ticks)
    second = ws.ends[len(la.ticks):]
    assert second.min() >= len(a.flat) + 9
    np.testing.assert_array_equal(ws.windows([len(la.ticks)])[0, -1], ws.features[second[0]])


def test_evaluate_fold_counts_every_sample():
    data = toy_set(40)
    model = build(ModelSpec("naive"))
    fms = [evaluate_fold(model, data, f, k) for k, f in enumerate(make_test_folds(len(data), 10))]
    assert len(fms) == 4
    assert sum(np.sum(fm.confusion) for fm in fms) == 40
    assert all(fm.recall[1] == 1.0 for fm in fms if np.sum(fm.confusion[1]) > 0)
