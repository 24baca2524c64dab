import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hfrisk.eeg import (ALPHA_BAND, BETA_BAND, REQUIRED_CHANNELS, BandPowerSet, EegRecording, InputError,
                        UndefinedFeature, affect_features, arousal, band_power_signal, calibrate_variable,
                        classify_eeg, dominance, fcm_fit, fcm_memberships, fcm_objective, valence,
                        window_epochs)
from hfrisk.fuzzy import LABELS
from hfrisk.synth import tone_recording

S, M, B = LABELS


def direct_band_power(x, fs, band):
    """O(N^2) one-sided DFT power, no FFT involved."""
    x = np.asarray(x, float) - np.mean(x)
    n = len(x)
    total = 0.0
    k = np.arange(n)
    for j in range(n // 2 + 1):
        f = j * fs / n
        if not band[0] <= f <= band[1]:
            continue
        re = float(np.sum(x * np.cos(2 * np.pi * j * k / n)))
        im = float(-np.sum(x * np.sin(2 * np.pi * j * k / n)))
        p = (re * re + im * im) / n**2
        total += p if j == 0 or (n % 2 == 0 and j == n // 2) else 2 * p
    return total


def test_band_power_matches_direct_dft(rng):
    for n in (64, 127, 256, 500):
        x = rng.normal(size=n)
        for band in (ALPHA_BAND, BETA_BAND, (0.0, 64.0)):
            assert band_power_signal(x, 128.0, band) == pytest.approx(direct_band_power(x, 128.0, band), rel=1e-9)


def test_full_band_is_variance(rng):
    x = rng.normal(3.0, 2.0, 1000)
    assert band_power_signal(x, 100.0, (0.0, 50.0)) == pytest.approx(np.var(x), rel=1e-12)


def test_tone_power_lands_in_its_band():
    fs, n = 128.0, 2560
    t = np.arange(n) / fs
    x = 3.0 * np.sin(2 * np.pi * 10.0 * t)
    assert band_power_signal(x, fs, ALPHA_BAND) == pytest.approx(4.5, rel=1e-9)
    assert band_power_signal(x, fs, (14.0, 30.0)) == pytest.approx(0.0, abs=1e-20)


def test_band_edges_inclusive():
    # 12 Hz sits in both alpha (8-13) and beta (12-30)
    fs, n = 128.0, 1280
    x = np.sin(2 * np.pi * 12.0 * np.arange(n) / fs)
    assert band_power_signal(x, fs, ALPHA_BAND) == pytest.approx(0.5, rel=1e-9)
    assert band_power_signal(x, fs, BETA_BAND) == pytest.approx(0.5, rel=1e-9)


def test_bad_band():
    with pytest.raises(InputError):
        band_power_signal(np.ones(10), 50.0, (10, 40))


def test_recording_validation():
    with pytest.raises(InputError, match="missing"):
        EegRecording(("AF3",), 128.0, np.zeros((1, 10)))
    with pytest.raises(InputError):
        EegRecording(REQUIRED_CHANNELS, 40.0, np.zeros((7, 10)))


def test_window_epochs_drops_tail():
    rec = EegRecording(REQUIRED_CHANNELS, 128.0, np.zeros((7, 128 * 45)))
    ep = window_epochs(rec, 20)
    assert len(ep.windows) == 2
    assert ep.dropped_s == pytest.approx(5.0)
    assert ep.windows[1].start_s == 20.0 and ep.windows[1].end_s == 40.0
    with pytest.raises(InputError):
        ep.windows[0].channel("O1")


def test_short_recording_yields_nothing():
    rec = EegRecording(REQUIRED_CHANNELS, 128.0, np.zeros((7, 128 * 5)))
    assert window_epochs(rec, 20).windows == []


# --- features


def powers(alpha, beta):
    return BandPowerSet(dict(zip(REQUIRED_CHANNELS, alpha)), dict(zip(REQUIRED_CHANNELS, beta)))


def test_feature_arithmetic():
    bp = powers([1, 2, 3, 4, 5, 6, 7], [2, 2, 2, 8, 1, 2, 4])
    assert arousal(bp) == pytest.approx(10 / 14)
    assert arousal(bp, inverted=True) == pytest.approx(14 / 10)
    assert valence(bp) == pytest.approx(4 / 8 - 3 / 2)
    assert dominance(bp) == pytest.approx(1 / 5 + 2 / 6 + 4 / 7)


def test_unit_ratio_dominance_exact():
    bp = powers([2.5] * 7, [2.5] * 7)
    assert dominance(bp) == 3.0
    assert valence(bp) == 0.0


def test_zero_beta_is_undefined():
    bp = powers([1] * 7, [0] * 7)
    with pytest.raises(UndefinedFeature):
        arousal(bp)
    f = affect_features(bp)
    assert not f.defined and set(f.undefined) == {"arousal", "valence"}
    assert np.isnan(f.arousal) and f.dominance == 0.0


def test_undefined_epoch_is_skipped(fuzzy):
    f = affect_features(powers([1] * 7, [0] * 7))
    variables = {n: fuzzy.variable(n) for n in ("arousal", "valence", "dominance")}
    assert classify_eeg(f, variables, fuzzy.table("eeg"), fuzzy.variable("d_eeg")) is None


pos = st.floats(1e-3, 1e3)


@given(st.lists(pos, min_size=14, max_size=14), st.floats(1e-2, 1e2))
def test_features_scale_invariant(vals, c):
    bp = powers(vals[:7], vals[7:])
    a, b = affect_features(bp), affect_features(bp.scaled(c))
    np.testing.assert_allclose(a.as_vector(), b.as_vector(), rtol=1e-9, atol=1e-12)


@given(st.lists(pos, min_size=7, max_size=7), st.lists(pos, min_size=7, max_size=7))
def test_channel_symmetric_valence_zero(alpha, beta):
    alpha[3], beta[3] = alpha[2], beta[2]  # F4 mirrors F3
    assert valence(powers(alpha, beta)) == 0.0


def test_sine_fixtures():
    for freq, check in ((10.0, lambda a: a > 50), (20.0, lambda a: a < 0.02)):
        rec = tone_recording(freq)
        win = window_epochs(rec).windows[0]
        assert check(arousal(BandPowerSet.from_window(win)))


def test_hann_window_option():
    rec = tone_recording(10.0)
    win = window_epochs(rec).windows[0]
    bp = BandPowerSet.from_window(win, window="hann")
    assert bp.alpha["F3"] > 100 * bp.beta["F3"]


# --- fuzzy C-means


def lloyd_fcm(points, k, m, rng, restarts=20, iters=500):
    """Plain alternating FCM from random starts; returns the best objective found."""
    best = np.inf
    for _ in range(restarts):
        c = points[rng.choice(len(points), k, replace=False)]
        for _ in range(iters):
            d2 = ((points[:, None] - c[None]) ** 2).sum(-1) + 1e-300
            u = 1.0 / ((d2[:, :, None] / d2[:, None, :]) ** (1 / (m - 1))).sum(-1)
            c = (u.T**m @ points) / (u**m).sum(0)[:, None]
        d2 = ((points[:, None] - c[None]) ** 2).sum(-1)
        best = min(best, float((u**m * d2).sum()))
    return best


def blobs(rng, n=40):
    centers = np.array([[0.0, 0.0], [5.0, 5.0], [0.0, 8.0]])
    return np.vstack([c + rng.normal(0, 0.6, (n, 2)) for c in centers])


def test_fcm_reaches_oracle_objective(rng):
    pts = blobs(rng)
    model = fcm_fit(pts, k=3, tol=1e-9)
    oracle = lloyd_fcm(pts, 3, 2.0, np.random.default_rng(7))
    final = fcm_objective(pts, model.centers, model.memberships, 2.0)
    assert final == pytest.approx(oracle, rel=1e-6)


def test_fcm_invariants(rng):
    pts = blobs(rng)
    model = fcm_fit(pts, k=3)
    np.testing.assert_allclose(model.memberships.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(np.diff(model.objective) <= 1e-12 * max(model.objective))


def test_fcm_single_cluster(rng):
    pts = rng.normal(size=(50, 3))
    model = fcm_fit(pts, k=1)
    np.testing.assert_allclose(model.centers[0], pts.mean(axis=0), atol=1e-12)


def test_fcm_singularity():
    u = fcm_memberships(np.array([[1.0, 1.0], [2.0, 2.0]]), np.array([[1.0, 1.0], [3.0, 3.0]]), 2.0)
    np.testing.assert_array_equal(u[0], [1.0, 0.0])
    np.testing.assert_allclose(u[1], [0.5, 0.5])


@pytest.mark.parametrize("kw", [dict(k=0), dict(m=1.0), dict(k=4)])
def test_fcm_bad_arguments(kw):
    pts = np.array([[0.0], [1.0], [2.0]])
    with pytest.raises(InputError):
        fcm_fit(pts, **kw)


def test_calibrate_variable_reanchors_cores(fuzzy):
    var = calibrate_variable(fuzzy.variable("arousal"), [2.5, 0.5, 1.5])
    assert var.core_point(M) == 1.5
    assert var.term(S).core == (0.0, 0.5)
    # collapsed centers leave the variable untouched
    same = calibrate_variable(fuzzy.variable("arousal"), [1, 1, 1])
    assert same is fuzzy.variable("arousal")
