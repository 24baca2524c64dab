import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hfrisk.eeg import InputError
from hfrisk.evaluation import (REFERENCE_HIERARCHICAL, ConfusionMatrix, alpha_burst_seconds, blink_quality,
                               confusion, oss_label, oss_to_label, summary_metrics)
from hfrisk.fuzzy import LABELS

S, M, B = LABELS


@pytest.mark.parametrize("burst, quality, score", [
    (0.0, "normal", 0), (0.4, "normal", 0), (3.0, "normal", 1), (7.0, "normal", 2),
    (2.0, "slow", 2), (6.0, "slow", 3), (12.0, "slow", 4), (10.0, "slow", 4),
])
def test_oss_scale(burst, quality, score):
    assert oss_label(burst, quality) == score


def test_oss_errors():
    with pytest.raises(InputError):
        oss_label(25, "normal")
    with pytest.raises(InputError):
        oss_label(1, "droopy")
    with pytest.raises(InputError):
        oss_to_label(5)


def test_oss_to_label():
    assert [oss_to_label(s) for s in range(5)] == [S, M, B, B, B]


def test_blink_quality():
    assert blink_quality([]) == "normal"
    assert blink_quality([0.1, 0.2]) == "normal"
    assert blink_quality([0.1, 1.5]) == "slow"


def test_alpha_burst_counts_segments():
    fs = 128.0
    t = np.arange(int(20 * fs)) / fs
    x = 0.05 * np.sin(2 * np.pi * 10 * t)
    x[: int(4 * fs)] += 2.0 * np.sin(2 * np.pi * 10 * t[: int(4 * fs)])
    assert alpha_burst_seconds(x, fs) == 4.0


def test_confusion_columns_normalised():
    pred = [S, S, M, B, B, B]
    exp = [S, M, M, B, B, S]
    cm = confusion(pred, exp)
    assert cm.column_totals == (2, 2, 2)
    np.testing.assert_allclose(cm.percent.sum(axis=0), 100.0)
    assert cm.cell(B, S) == 50.0
    assert cm.inconsistencies() == []


@given(st.lists(st.tuples(st.sampled_from(LABELS), st.sampled_from(LABELS)), min_size=1, max_size=60))
def test_confusion_properties(pairs):
    cm = confusion([p for p, _ in pairs], [e for _, e in pairs])
    assert cm.counts.sum() == len(pairs)
    for j in range(3):
        if cm.column_totals[j]:
            assert cm.percent[:, j].sum() == pytest.approx(100.0)


def test_confusion_length_mismatch():
    with pytest.raises(InputError):
        confusion([S], [S, M])


def test_empty_column_metrics_undefined():
    m = summary_metrics(confusion([S, S], [S, S]))
    assert math.isnan(m.big_detection) and "BIG" in m.undefined


def test_reference_matrix_metrics():
    m = summary_metrics(REFERENCE_HIERARCHICAL)
    assert m.binary_detection == 90.92
    assert m.big_detection == 79.46
    assert m.false_alarm == pytest.approx(14.11)


def test_reference_matrix_reports_missing_cell():
    problems = REFERENCE_HIERARCHICAL.inconsistencies()
    assert len(problems) == 1 and "BIG column" in problems[0] and "91.68" in problems[0]


def test_bad_column_sum_reported():
    cm = ConfusionMatrix.from_percentages([[50, 0, 0], [40, 100, 0], [0, 0, 100]], (1, 1, 1))
    assert "SMALL column sums to 90.00" in cm.inconsistencies()[0]


def test_render_and_dict():
    text = REFERENCE_HIERARCHICAL.render()
    assert "79.46%" in text and "--" in text and "730" in text
    doc = REFERENCE_HIERARCHICAL.to_dict()
    assert doc["percent"][0][2] is None
