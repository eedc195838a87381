import math

import numpy as np
import pytest
from bayes_oracle import rope_triple
from hypothesis import given, settings
from hypothesis import strategies as st

from lobbench.bayes import (A_BETTER, B_BETTER, EQUIVALENT, UNDECIDED, PairedDiffs, Posterior, build_ranking,
                            compare, posterior, rope_probabilities, strictly_above, verdict)

finite = st.floats(-1, 1, allow_nan=False)


def diffs(values, rho=None):
    return PairedDiffs("A", "B", "mcc", tuple(values), rho)


def test_zero_differences_are_a_point_mass_in_the_rope():
    d = compare(diffs([0.0] * 7))
    assert (d.p_left, d.p_rope, d.p_right) == (0.0, 1.0, 0.0)
    assert d.verdict == EQUIVALENT


def test_constant_gap_is_a_point_mass_outside():
    d = compare(diffs([0.5] * 7))
    assert d.p_right == 1.0 and d.verdict == B_BETTER
    assert compare(diffs([-0.5] * 7)).verdict == A_BETTER


def test_symmetric_differences():
    d = compare(diffs([-0.2, 0.2, -0.05, 0.05, 0.1, -0.1]))
    assert abs(d.p_left - d.p_right) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(0.001, 2), st.integers(1, 40), st.floats(0, 0.5))
def test_zero_location_is_symmetric(scale, dof, rope):
    pl, _, pr = rope_probabilities(Posterior(0.0, scale, dof, 0.1), rope)
    assert pl == pr


def test_posterior_parameters():
    x = np.array([0.01, 0.03, -0.02, 0.05, 0.04])
    p = posterior(diffs(x))
    k = len(x)
    assert p.location == pytest.approx(x.mean(), abs=1e-16)
    assert p.scale == pytest.approx(x.std(ddof=1) * math.sqrt(1 / k + (1 / k) / (1 - 1 / k)), rel=1e-14)
    assert p.dof == 4 and p.rho == 0.2
    assert posterior(diffs(x, rho=0.5)).scale == pytest.approx(x.std(ddof=1) * math.sqrt(1 / k + 1), rel=1e-14)


def test_cdf_matches_quadrature():
    k, mean, s, rho = 10, 0.02, 0.05, 0.1
    post = Posterior(mean, s * math.sqrt(1 / k + rho / (1 - rho)), k - 1, rho)
    got = rope_probabilities(post, 0.03)
    ref = rope_triple(post.location, post.scale, post.dof, 0.03)
    assert max(abs(a - b) for a, b in zip(got, ref)) < 1e-8
    rng = np.random.default_rng(0)
    for _ in range(10):
        post = Posterior(rng.normal(0, 0.05), rng.uniform(0.005, 0.1), int(rng.integers(1, 30)), 0.1)
        got = rope_probabilities(post, 0.03)
        ref = rope_triple(post.location, post.scale, post.dof, 0.03)
        assert max(abs(a - b) for a, b in zip(got, ref)) < 1e-8


def test_wide_rope_captures_everything():
    post = Posterior(0.3, 0.1, 5, 0.1)
    assert rope_probabilities(post, 1e6)[1] == pytest.approx(1.0, abs=1e-12)
    assert rope_probabilities(post, math.inf) == (0.0, 1.0, 0.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=2, max_size=12))
def test_swap_antisymmetry_is_exact(values):
    d = diffs(values)
    a, b = compare(d), compare(d.swapped())
    assert (a.p_left, a.p_rope, a.p_right) == (b.p_right, b.p_rope, b.p_left)
    flip = {A_BETTER: B_BETTER, B_BETTER: A_BETTER, EQUIVALENT: EQUIVALENT, UNDECIDED: UNDECIDED}
    assert b.verdict == flip[a.verdict]


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=2, max_size=12), st.floats(0, 0.2))
def test_probabilities_form_a_distribution(values, rope):
    d = compare(diffs(values), rope=rope)
    assert min(d.p_left, d.p_rope, d.p_right) >= 0
    assert d.p_left + d.p_rope + d.p_right == pytest.approx(1.0, abs=1e-12)


def test_verdict_rule():
    assert verdict((0.97, 0.02, 0.01)) == (A_BETTER, A_BETTER)
    assert verdict((0.30, 0.40, 0.30)) == (UNDECIDED, EQUIVALENT)
    assert verdict((0.02, 0.96, 0.02)) == (EQUIVALENT, EQUIVALENT)
    assert verdict((0.4, 0.4, 0.2)) == (UNDECIDED, EQUIVALENT)  # ties go to equivalence
    assert verdict((0.05, 0.0, 0.95)) == (UNDECIDED, B_BETTER)  # threshold is strict


def test_input_validation():
    with pytest.raises(ValueError):
        diffs([0.1])
    with pytest.raises(ValueError):
        diffs([0.1, float("nan")])
    with pytest.raises(ValueError):
        diffs([0.1, 0.2], rho=1.0)
    with pytest.raises(ValueError):
        PairedDiffs.from_scores("A", [0.1, 0.2], "B", [0.3], "mcc")
    assert PairedDiffs.from_scores("A", [0.1, 0.2], "B", [0.3, 0.1], "mcc").diffs == pytest.approx((0.2, -0.1))


# -- ranking -----------------------------------------------------------------

def test_strict_chain():
    r = build_ranking([("A", "B", A_BETTER), ("B", "C", A_BETTER), ("A", "C", A_BETTER)])
    assert r.tiers == [["A"], ["B"], ["C"]] and r.intersections == []


def test_equivalent_pair_over_third():
    r = build_ranking([("A", "B", EQUIVALENT), ("A", "C", A_BETTER), ("B", "C", A_BETTER)])
    assert r.tiers == [["A", "B"], ["C"]]
    assert strictly_above(r, "A", "C") and not strictly_above(r, "A", "B")


def test_bridging_model_is_flagged():
    r = build_ranking([("A", "B", EQUIVALENT), ("A", "C", A_BETTER), ("B", "C", EQUIVALENT)])
    flagged = {i["model"]: i for i in r.intersections}
    assert set(flagged) == {"B"}
    assert r.tiers == [["A"], ["C"]]
    assert flagged["B"]["tiers"] == [0, 1]
    assert r.tier_of("B") == [0, 1]


def test_dominance_cycle_collapses():
    r = build_ranking([("A", "B", A_BETTER), ("B", "C", A_BETTER), ("C", "A", A_BETTER), ("A", "D", A_BETTER)])
    assert r.tiers == [["A", "B", "C"], ["D"]]
    assert {i["model"] for i in r.intersections} == {"A", "B", "C"}


def test_undecided_adds_no_relation():
    r = build_ranking([("A", "B", UNDECIDED), ("B", "C", B_BETTER)])
    assert r.tiers == [["A", "C"], ["B"]]


def test_ranking_from_decisions_and_json_shape():
    d1 = compare(PairedDiffs("m1", "m2", "mcc", (0.4, 0.5, 0.45, 0.5)))
    r = build_ranking([d1])
    assert r.tiers == [["m2"], ["m1"]]
    assert set(r.to_dict()) == {"tiers", "intersections"}
