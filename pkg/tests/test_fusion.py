import itertools
import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hfrisk.fusion import EpochInputs, StreamEpoch, assess, fuse_drowsiness, fuse_final, synchronize
from hfrisk.fuzzy import LABELS, Decision

S, M, B = LABELS

# rows first input, columns second input
MATRIX = {
    (S, S): S, (S, M): M, (S, B): B,
    (M, S): M, (M, M): M, (M, B): B,
    (B, S): B, (B, M): B, (B, B): B,
}


def at_core(fuzzy, var, label):
    v = fuzzy.variable(var)
    return Decision(v.core_point(label), label)


@pytest.mark.parametrize("table, a, b", [("drowsiness", "d_eye", "d_eeg"), ("final", "d_1", "d_mov")])
def test_fusion_tables_at_cores(fuzzy, table, a, b):
    fuse = fuse_drowsiness if table == "drowsiness" else fuse_final
    for (la, lb), expected in MATRIX.items():
        out = fuse(at_core(fuzzy, a, la), at_core(fuzzy, b, lb), fuzzy.table(table), fuzzy.variables)
        assert out.label is expected, (la, lb)


def test_fusion_symmetric(fuzzy):
    for name in ("drowsiness", "final"):
        t = fuzzy.table(name)
        for x, y in itertools.product(LABELS, repeat=2):
            assert t.consequent(x, y) is t.consequent(y, x)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_fused_value_monotone(fuzzy, a, b, c):
    lo, hi = sorted((b, c))
    t, v = fuzzy.table("final"), fuzzy.variables
    low = fuse_final(Decision(a, S), Decision(lo, S), t, v)
    high = fuse_final(Decision(a, S), Decision(hi, S), t, v)
    assert high.label >= low.label


def test_table_cells_monotone(fuzzy):
    for name in ("drowsiness", "final"):
        t = fuzzy.table(name)
        for x, y in itertools.product(LABELS, repeat=2):
            if x < B:
                assert t.consequent(x + 1, y) >= t.consequent(x, y)
            if y < B:
                assert t.consequent(x, y + 1) >= t.consequent(x, y)


def test_degradation(fuzzy):
    t, v = fuzzy.table("drowsiness"), fuzzy.variables
    eye = Decision(0.83, B)
    out = fuse_drowsiness(eye, None, t, v)
    assert out.label is B and "degraded" in out.flags
    assert fuse_drowsiness(None, None, t, v) is None
    mov = Decision(0.5, M)
    out = fuse_final(None, mov, fuzzy.table("final"), v)
    assert out.label is M and "degraded" in out.flags


def se(t0, label, length=20.0):
    return StreamEpoch(t0, t0 + length, None if label is None else Decision(0.5, label))


def test_synchronize_offset_blink():
    eeg = [se(0, S), se(20, M), se(40, B)]
    blink = [se(5, S), se(25, M), se(45, B)]  # 5 s late: 15 s of each lands in the matching slot
    synced = synchronize(eeg, blink, None)
    assert [e.d_eye.decision.label for e in synced] == [S, M, B]


def test_synchronize_disjoint_streams(caplog):
    with caplog.at_level(logging.WARNING):
        assert synchronize([se(0, S)], [se(100, S)], None) == []
    assert "do not overlap" in caplog.text


def test_synchronize_without_eeg_uses_union():
    synced = synchronize(None, [se(0, S), se(20, M)], [se(0, B), se(20, B), se(40, S)])
    assert len(synced) == 3
    assert synced[2].d_eye is None and synced[2].d_mov is not None


def test_assess_flags(fuzzy):
    inputs = EpochInputs(0, 0.0, 20.0, d_eye=se(0, B), d_eeg=se(0, None), d_mov=None)
    a = assess(inputs, fuzzy.tables, fuzzy.variables)
    assert {"skipped_d_eeg", "missing_d_mov", "degraded"} <= a.flags
    assert a.d_f.label is B and a.risk
    empty = assess(EpochInputs(1, 20.0, 40.0), fuzzy.tables, fuzzy.variables)
    assert "unassessable" in empty.flags and empty.risk is None and not empty.assessable
