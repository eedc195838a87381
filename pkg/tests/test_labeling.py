import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lobbench.data import LobState
from lobbench.labeling import (DOWN, FLAT, UP, HorizonSpec, QuantileThresholds, classify,
                               fit_quantile_thresholds, heaviside, horizon_endpoint, horizon_endpoints,
                               label_return, label_returns_from_mids, log_returns, mid_price)


def scan_endpoint(returns, t, dtau):
    """Linear-scan oracle: walk forward counting non-zero returns."""
    count = 0
    for j in range(t, len(returns)):
        if returns[j] > 0 or returns[j] < 0:
            count += 1
            if count == dtau:
                return j + 1
    return None


def sticky_mids(rng, n, p_zero=0.5):
    steps = rng.choice([-1, 1], size=n - 1) * (rng.random(n - 1) >= p_zero)
    return 100.0 + 0.01 * np.concatenate([[0], np.cumsum(steps)])


def test_mid_price_examples():
    s = LobState(((100.10, 1.0),), ((100.09, 1.0),))
    assert mid_price(s) == pytest.approx(100.095, abs=1e-12)
    assert mid_price(LobState(((50.0, 1.0),), ((50.0, 1.0),))) == 50.0


def test_mid_price_vectorized_matches_arithmetic():
    rng = np.random.default_rng(0)
    flat = rng.uniform(1, 200, size=(100, 40))
    np.testing.assert_array_equal(mid_price(flat), [(r[0] + r[2]) / 2 for r in flat])


def test_log_return_examples():
    assert log_returns([5.0, 5.0, 5.0]).tolist() == [0.0, 0.0]
    assert log_returns([1.0, math.e])[0] == pytest.approx(1.0, abs=1e-15)
    r = log_returns([100, 101, 101, 100.5])
    np.testing.assert_allclose(r, [math.log(1.01), 0.0, math.log(100.5 / 101)], rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        log_returns([1.0])
    with pytest.raises(ValueError):
        log_returns([1.0, 0.0])


def test_heaviside_at_zero():
    assert heaviside(np.array([-1.0, 0.0, 2.0])).tolist() == [0, 0, 1]


def test_horizon_endpoint_hand_example():
    r = log_returns([100, 100, 101, 101, 102])
    assert horizon_endpoint(r, 0, 2) == 4
    assert horizon_endpoint(r, 0, HorizonSpec(2)) == 4
    assert horizon_endpoint(r, 0, 3) is None
    assert horizon_endpoint(log_returns([7.0] * 20), 0, 1) is None


def test_horizon_spec_rejects_zero():
    with pytest.raises(ValueError):
        HorizonSpec(0)


@pytest.mark.parametrize("dtau", [1, 3, 10])
def test_vectorized_endpoints_match_scan(dtau):
    rng = np.random.default_rng(dtau)
    r = log_returns(sticky_mids(rng, 500))
    ends = horizon_endpoints(r, dtau)
    assert len(ends) == len(r) + 1
    for t in range(len(r) + 1):
        expect = scan_endpoint(r, t, dtau)
        assert horizon_endpoint(r, t, dtau) == expect
        assert ends[t] == (-1 if expect is None else expect)


def test_label_return_examples():
    mids = [100, 100, 101, 101, 102]
    r = log_returns(mids)
    assert label_return(r, 0, 4) == pytest.approx(math.log(102 / 100), abs=1e-15)
    assert label_return(r, 2, 3) == r[2]


def test_label_return_matches_partial_sums():
    rng = np.random.default_rng(1)
    mids = sticky_mids(rng, 2000)
    r = log_returns(mids)
    starts = rng.integers(0, 1500, 200)
    ends = starts + rng.integers(1, 400, 200)
    got = label_returns_from_mids(mids, starts, ends)
    for t, e, g in zip(starts, ends, got):
        acc = 0.0
        for x in r[t:e]:
            acc += x
        assert abs(g - acc) <= 4 * np.spacing(max(abs(acc), 1e-300)) * (e - t)
        assert g == label_return(r, t, e)


def test_quantile_examples():
    grid = np.linspace(-1, 1, 2001)
    thr = fit_quantile_thresholds(grid)
    assert thr.q25 == pytest.approx(-0.5, abs=1e-3) and thr.q75 == pytest.approx(0.5, abs=1e-3)
    same = fit_quantile_thresholds(np.full(50, 0.25))
    assert same.q25 == same.q75 == 0.25


def sort_interp(x, q):
    xs = sorted(x)
    pos = q * (len(xs) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(xs) - 1)
    return xs[lo] + (pos - lo) * (xs[hi] - xs[lo])


def test_quantiles_match_sort_interpolate_oracle():
    x = list(range(1, 101))
    thr = fit_quantile_thresholds(np.array(x, dtype=float))
    assert thr.q25 == sort_interp(x, 0.25) == 25.75
    assert thr.q75 == sort_interp(x, 0.75) == 75.25
    rng = np.random.default_rng(2)
    for n in (5, 17, 1000):
        y = rng.normal(size=n)
        thr = fit_quantile_thresholds(y)
        assert thr.q25 == pytest.approx(sort_interp(y, 0.25), abs=1e-15)
        assert thr.q75 == pytest.approx(sort_interp(y, 0.75), abs=1e-15)


def test_classify_boundaries():
    thr = QuantileThresholds(-0.5, 0.5)
    assert classify(-0.5, thr) == FLAT and classify(0.5, thr) == FLAT
    assert classify(-0.7, thr) == DOWN and classify(0.0, thr) == FLAT and classify(0.9, thr) == UP
    np.testing.assert_array_equal(classify(np.array([-0.7, 0.0, 0.9]), thr), [DOWN, FLAT, UP])
    with pytest.raises(ValueError):
        QuantileThresholds(1.0, 0.0)


def quartile_mass_ok(x):
    thr = fit_quantile_thresholds(x)
    c = classify(x, thr)
    n = len(x)
    ties_lo = int(np.sum(x == thr.q25))
    ties_hi = int(np.sum(x == thr.q75))
    n_down, n_up = int(np.sum(c == DOWN)), int(np.sum(c == UP))
    return (0.25 * n - 1 - ties_lo <= n_down <= 0.25 * n + 1
            and 0.25 * n - 1 - ties_hi <= n_up <= 0.25 * n + 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=4, max_size=400))
def test_classify_own_sample_quartile_masses(values):
    assert quartile_mass_ok(np.array(values, dtype=float) * 1e-4)


def test_event_time_invariance_under_zero_insertion():
    rng = np.random.default_rng(3)
    mids = sticky_mids(rng, 600)
    r = log_returns(mids)
    h = 10
    base_ends = horizon_endpoints(r, h)
    for _ in range(20):
        k = int(rng.integers(0, len(mids)))
        aug = np.insert(mids, k + 1, mids[k])  # repeat mid k: one extra zero return
        ends = horizon_endpoints(log_returns(aug), h)
        for t in range(len(mids)):
            nt = t if t <= k else t + 1
            if base_ends[t] < 0:
                assert ends[nt] < 0
                continue
            assert aug[ends[nt]] == mids[base_ends[t]]
            assert label_return(log_returns(aug), nt, ends[nt]) == pytest.approx(
                label_return(r, t, base_ends[t]), abs=1e-15)
