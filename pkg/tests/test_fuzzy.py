import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hfrisk.fuzzy import (LABELS, ConfigError, FuzzyOutput, LinguisticVariable, MembershipFunction,
                          RuleTable, decide, default_partition, defuzzify_centroid, fuzzify, infer, label_of,
                          membership)
from hfrisk.rulesets import parse_config, render_table

S, M, B = LABELS


def unit_var(name="v"):
    return LinguisticVariable.from_partition(name, (0.0, 1.0), default_partition())


# --- membership functions


def test_triangle_examples():
    tri = MembershipFunction.triangular(0, 0.5, 1)
    assert tri(0.5) == 1.0
    assert tri(1.2) == 0.0
    assert tri(0.25) == pytest.approx(0.5, abs=1e-15)


def test_shoulders_are_flat():
    left = MembershipFunction.trapezoidal(0, 0, 0.2, 0.45)
    assert left(0.0) == 1.0
    assert left(-3.0) == 0.0  # outside the support even on a shoulder
    right = MembershipFunction.trapezoidal(0.55, 0.8, 1, 1)
    assert right(1.0) == 1.0


@pytest.mark.parametrize("bp", [(0.5, 0.2, 1.0), (0, 1, 2, 1.5), (0, float("nan"), 1)])
def test_malformed_breakpoints_rejected(bp):
    shape = "triangular" if len(bp) == 3 else "trapezoidal"
    with pytest.raises(ConfigError):
        MembershipFunction(shape, bp)


def test_wrong_breakpoint_count():
    with pytest.raises(ConfigError):
        MembershipFunction("triangular", (0, 1, 2, 3))


sorted4 = st.lists(st.floats(-50, 50, allow_nan=False), min_size=4, max_size=4).map(sorted)


@given(sorted4, st.floats(-100, 100, allow_nan=False))
def test_trapezoid_degree_bounds_and_core(bp, x):
    mf = MembershipFunction("trapezoidal", tuple(bp))
    a, b, c, d = bp
    mu = float(membership(mf, x))
    assert 0.0 <= mu <= 1.0
    if b <= x <= c:
        assert mu == 1.0
    if x < a or x > d:
        assert mu == 0.0


@given(sorted4)
def test_vectorised_matches_scalar(bp):
    mf = MembershipFunction("trapezoidal", tuple(bp))
    xs = np.linspace(bp[0] - 1, bp[3] + 1, 37)
    np.testing.assert_array_equal(membership(mf, xs), [float(membership(mf, x)) for x in xs])


# --- linguistic variables and fuzzification


def test_default_crossovers():
    # SMALL falls on [0.2, 0.45], MEDIUM rises on [0.25, 0.5]; they meet at 0.35 with degree 0.4
    var = unit_var()
    deg = fuzzify(var, 0.35)
    assert deg[S] == pytest.approx(0.4, abs=1e-12)
    assert deg[M] == pytest.approx(0.4, abs=1e-12)
    assert deg[B] == 0.0
    deg = fuzzify(var, 0.65)
    assert deg[M] == pytest.approx(0.4, abs=1e-12)
    assert deg[B] == pytest.approx(0.4, abs=1e-12)


def test_fuzzify_clamps():
    var = unit_var()
    assert fuzzify(var, -7.0) == fuzzify(var, 0.0)
    assert fuzzify(var, 9.0) == fuzzify(var, 1.0)


def test_core_point_is_pure():
    var = unit_var()
    for lbl in LABELS:
        deg = fuzzify(var, var.core_point(lbl))
        assert deg[lbl] == 1.0
        assert sum(deg.values()) == 1.0


def test_variable_needs_three_ordered_terms():
    p = default_partition()
    with pytest.raises(ConfigError):
        LinguisticVariable("x", (0, 1), ((M, p[M]), (S, p[S]), (B, p[B])))


def test_variable_coverage_gap_rejected():
    gap = {S: MembershipFunction.trapezoidal(0, 0, 0.1, 0.2), M: MembershipFunction.triangular(0.3, 0.5, 0.7),
           B: MembershipFunction.trapezoidal(0.6, 0.8, 1, 1)}
    with pytest.raises(ConfigError, match="no term covers"):
        LinguisticVariable.from_partition("x", (0, 1), gap)


# --- rule tables


def test_incomplete_table_rejected():
    with pytest.raises(ConfigError, match="no rule covers"):
        RuleTable.from_rows("t", ["a"], "o", [(["SMALL"], "SMALL"), (["BIG"], "BIG")])


def test_overlapping_rows_rejected():
    rows = [(["*"], "SMALL"), (["BIG"], "BIG")]
    with pytest.raises(ConfigError, match="overlap"):
        RuleTable.from_rows("t", ["a"], "o", rows)


def test_wildcard_expands(fuzzy):
    table = fuzzy.table("eeg")
    for a, d in itertools.product(LABELS, repeat=2):
        assert table.consequent(B, a, d) is B


def test_infer_min_and_max():
    table = RuleTable.from_rows("t", ["a", "b"], "o", [
        (["SMALL", "*"], "SMALL"), (["MEDIUM", "SMALL"], "MEDIUM"), (["MEDIUM", "MEDIUM"], "MEDIUM"),
        (["MEDIUM", "BIG"], "BIG"), (["BIG", "*"], "BIG")])
    out = infer(table, {"a": {S: 0.1, M: 0.7, B: 0.3}, "b": {S: 0.2, M: 0.6, B: 0.9}}, unit_var("o"))
    assert out.activations == {S: 0.1, M: 0.6, B: 0.7}


def test_infer_missing_input():
    table = RuleTable.from_rows("t", ["a"], "o", [(["*"], "SMALL")])
    with pytest.raises(ConfigError):
        infer(table, {}, unit_var())


# --- defuzzification


def _centroid_by_hand(act, n=200_001):
    # independent route: rebuild the clipped terms with plain numpy on a very fine grid
    xs = np.linspace(0, 1, n)
    small = np.clip(np.minimum(1, (0.45 - xs) / 0.25), 0, 1)
    medium = np.clip(np.minimum((xs - 0.25) / 0.25, (0.75 - xs) / 0.25), 0, 1)
    big = np.clip(np.minimum(1, (xs - 0.55) / 0.25), 0, 1)
    mu = np.maximum.reduce([np.minimum(act[0], small), np.minimum(act[1], medium), np.minimum(act[2], big)])
    return float((mu * xs).sum() / mu.sum())


@given(st.tuples(*[st.floats(0, 1)] * 3).filter(lambda t: max(t) > 1e-3))
def test_centroid_against_hand_grid(act):
    out = FuzzyOutput(unit_var(), dict(zip(LABELS, act)))
    assert defuzzify_centroid(out).value == pytest.approx(_centroid_by_hand(act), abs=1e-3)


def test_symmetric_output_centroid_is_midpoint():
    out = FuzzyOutput(unit_var(), {S: 0.6, M: 0.2, B: 0.6})
    assert defuzzify_centroid(out).value == pytest.approx(0.5, abs=1e-12)


def test_no_activation():
    out = FuzzyOutput(unit_var(), {S: 0.0, M: 0.0, B: 0.0})
    crisp = defuzzify_centroid(out)
    assert crisp.no_activation and crisp.value == 0.5
    assert label_of(out) is S


def test_resolution_floor():
    with pytest.raises(ConfigError):
        defuzzify_centroid(FuzzyOutput(unit_var(), {S: 1, M: 0, B: 0}), resolution=50)


def test_label_ties_go_up():
    assert label_of(FuzzyOutput(unit_var(), {S: 0.5, M: 0.5, B: 0.0})) is M
    assert label_of(FuzzyOutput(unit_var(), {S: 0.3, M: 0.1, B: 0.3})) is B


def test_pure_inputs_give_core_centroids():
    table = RuleTable.from_rows("id", ["a"], "o", [(["SMALL"], "SMALL"), (["MEDIUM"], "MEDIUM"),
                                                   (["BIG"], "BIG")])
    var = unit_var()
    values = [decide(table, {"a": fuzzify(var, var.core_point(lbl))}, var).value for lbl in LABELS]
    assert values[0] < 0.25 and values[2] > 0.75
    assert values[1] == pytest.approx(0.5, abs=1e-12)


# --- config loader


def test_default_config_tables(fuzzy):
    assert set(fuzzy.tables) == {"eeg", "blink", "distance", "drowsiness", "final"}
    assert fuzzy.table("drowsiness").consequent(S, M) is M
    assert "VALENCE" in render_table(fuzzy.table("eeg"))


def test_override_replaces_section():
    base = "[variable:x]\nuniverse = 0, 1\nSMALL = trap 0 0 0.2 0.45\nMEDIUM = tri 0.25 0.5 0.75\nBIG = trap 0.55 0.8 1 1\n"
    rules = "[rules:t]\ninputs = x\noutput = x\nSMALL = SMALL\nMEDIUM = MEDIUM\nBIG = BIG\n"
    flipped = "[rules:t]\ninputs = x\noutput = x\nSMALL = BIG\nMEDIUM = MEDIUM\nBIG = SMALL\n"
    cfg = parse_config(base + rules, flipped)
    assert cfg.table("t").consequent(S) is B


@pytest.mark.parametrize("text, msg", [
    ("[rules:t]\ninputs = x\noutput = x\nSMALL = SMALL\nSMALL = BIG\n", "SMALL"),
    ("[variable:x]\nuniverse = 0, 1\nSMALL = blob 1 2\n", "blob"),
    ("[oops]\na = 1\n", "unknown section"),
])
def test_bad_config_text(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text)


def test_unknown_variable_lookup(fuzzy):
    with pytest.raises(ConfigError):
        fuzzy.variable("nope")


def test_infinite_input_does_not_escape():
    var = unit_var()
    assert fuzzify(var, math.inf) == fuzzify(var, 1.0)
