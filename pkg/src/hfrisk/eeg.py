"""EEG epoching, alpha/beta band power and the arousal/valence/dominance features."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .fuzzy import Decision, Label, LinguisticVariable, MembershipFunction, RuleTable, decide, fuzzify

log = logging.getLogger(__name__)

ALPHA_BAND = (8.0, 13.0)
BETA_BAND = (12.0, 30.0)
REQUIRED_CHANNELS = ("AF3", "AF4", "F3", "F4", "FC6", "F8", "P8")
AROUSAL_CHANNELS = ("AF3", "AF4", "F3", "F4")
DOMINANCE_CHANNELS = ("FC6", "F8", "P8")
POWER_FLOOR = 1e-12  # µV²
DEFAULT_EPOCH_S = 20.0


class InputError(ValueError):
    """Bad signal data: unknown channel, inconsistent lengths, malformed rows."""


class UndefinedFeature(ArithmeticError):
    """A feature's denominator power fell below the floor."""


@dataclass(frozen=True)
class EegRecording:
    channels: tuple[str, ...]
    sample_rate: float
    samples: np.ndarray  # (n_channels, n_samples), µV
    start_s: float = 0.0

    def __post_init__(self):
        data = np.asarray(self.samples, dtype=float)
        if data.ndim != 2 or data.shape[0] != len(self.channels):
            raise InputError(f"samples shape {data.shape} does not match {len(self.channels)} channels")
        if not self.sample_rate > 0:
            raise InputError("sample_rate must be positive")
        missing = [c for c in REQUIRED_CHANNELS if c not in self.channels]
        if missing:
            raise InputError(f"missing EEG channels: {', '.join(missing)}")
        if self.sample_rate < 2 * BETA_BAND[1]:
            raise InputError(f"sample rate {self.sample_rate} Hz cannot resolve the {BETA_BAND[1]} Hz beta edge")
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "samples", data)

    @property
    def duration_s(self) -> float:
        return self.samples.shape[1] / self.sample_rate


@dataclass(frozen=True)
class EegWindow:
    recording: EegRecording
    epoch_index: int
    start: int  # sample offset
    stop: int

    @property
    def sample_rate(self) -> float:
        return self.recording.sample_rate

    @property
    def start_s(self) -> float:
        return self.recording.start_s + self.start / self.sample_rate

    @property
    def end_s(self) -> float:
        return self.recording.start_s + self.stop / self.sample_rate

    def channel(self, name: str) -> np.ndarray:
        try:
            row = self.recording.channels.index(name)
        except ValueError:
            raise InputError(f"unknown channel {name!r}") from None
        return self.recording.samples[row, self.start:self.stop]


class Epochs(NamedTuple):
    windows: list[EegWindow]
    dropped_s: float  # length of the discarded tail (whole recording if too short)


def window_epochs(rec: EegRecording, epoch_s: float = DEFAULT_EPOCH_S) -> Epochs:
    if not epoch_s > 0:
        raise InputError("epoch length must be positive")
    n = rec.samples.shape[1]
    size = int(round(epoch_s * rec.sample_rate))
    count = n // size
    windows = [EegWindow(rec, i, i * size, (i + 1) * size) for i in range(count)]
    dropped = (n - count * size) / rec.sample_rate
    if count == 0:
        log.warning("EEG recording (%.2f s) shorter than one %.2f s epoch", rec.duration_s, epoch_s)
    elif dropped > 0:
        log.info("dropped %.3f s trailing partial EEG epoch", dropped)
    return Epochs(windows, dropped)


def _spectrum(x: np.ndarray, sample_rate: float, window: str):
    x = np.asarray(x, dtype=float)
    x = x - x.mean()
    if window == "hann":
        x = x * np.hanning(len(x))
    elif window != "rect":
        raise ValueError(f"unknown window {window!r}")
    n = len(x)
    spec = np.fft.rfft(x)
    # one-sided mean-square power per bin; sums to mean(x**2) over all bins
    power = np.abs(spec) ** 2 / n**2
    if n % 2 == 0:
        power[1:-1] *= 2
    else:
        power[1:] *= 2
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    return freqs, power


def band_power_signal(x: np.ndarray, sample_rate: float, band: tuple[float, float],
                      window: str = "rect") -> float:
    f_lo, f_hi = band
    if not 0 <= f_lo < f_hi <= sample_rate / 2:
        raise InputError(f"band {band} outside (0, {sample_rate / 2}] Hz")
    freqs, power = _spectrum(x, sample_rate, window)
    mask = (freqs >= f_lo) & (freqs <= f_hi)
    return float(power[mask].sum())


def band_power(win: EegWindow, channel: str, band: tuple[float, float], window: str = "rect") -> float:
    """Mean-square power (µV²) of one channel's mean-removed samples inside ``band``."""
    return band_power_signal(win.channel(channel), win.sample_rate, band, window)


@dataclass(frozen=True)
class BandPowerSet:
    alpha: Mapping[str, float]
    beta: Mapping[str, float]

    @classmethod
    def from_window(cls, win: EegWindow, channels: Sequence[str] = REQUIRED_CHANNELS,
                    window: str = "rect") -> "BandPowerSet":
        alpha, beta = {}, {}
        for ch in channels:
            freqs, power = _spectrum(win.channel(ch), win.sample_rate, window)
            alpha[ch] = float(power[(freqs >= ALPHA_BAND[0]) & (freqs <= ALPHA_BAND[1])].sum())
            beta[ch] = float(power[(freqs >= BETA_BAND[0]) & (freqs <= BETA_BAND[1])].sum())
        return cls(alpha, beta)

    def scaled(self, c: float) -> "BandPowerSet":
        """Powers of the same signals multiplied by ``c`` (power scales by c²)."""
        k = c * c
        return BandPowerSet({ch: k * v for ch, v in self.alpha.items()},
                            {ch: k * v for ch, v in self.beta.items()})


def _guard(value: float, what: str, floor: float) -> float:
    if not value >= floor:
        raise UndefinedFeature(f"{what} power {value:g} below floor {floor:g}")
    return value


def arousal(bp: BandPowerSet, floor: float = POWER_FLOOR, inverted: bool = False) -> float:
    """sum(alpha) / sum(beta) over AF3, AF4, F3, F4.

    ``inverted=True`` gives the beta/alpha reading instead.
    """
    a = sum(bp.alpha[ch] for ch in AROUSAL_CHANNELS)
    b = sum(bp.beta[ch] for ch in AROUSAL_CHANNELS)
    if inverted:
        return b / _guard(a, "alpha(AF3+AF4+F3+F4)", floor)
    return a / _guard(b, "beta(AF3+AF4+F3+F4)", floor)


def valence(bp: BandPowerSet, floor: float = POWER_FLOOR) -> float:
    return (bp.alpha["F4"] / _guard(bp.beta["F4"], "beta F4", floor)
            - bp.alpha["F3"] / _guard(bp.beta["F3"], "beta F3", floor))


def dominance(bp: BandPowerSet, floor: float = POWER_FLOOR) -> float:
    return sum(bp.beta[ch] / _guard(bp.alpha[ch], f"alpha {ch}", floor) for ch in DOMINANCE_CHANNELS)


@dataclass(frozen=True)
class AffectFeatures:
    arousal: float
    valence: float
    dominance: float
    undefined: tuple[str, ...] = ()

    @property
    def defined(self) -> bool:
        return not self.undefined

    def as_vector(self) -> np.ndarray:
        return np.array([self.arousal, self.valence, self.dominance])


def affect_features(bp: BandPowerSet, floor: float = POWER_FLOOR, arousal_inverted: bool = False) -> AffectFeatures:
    values, bad = {}, []
    for name, fn in (("arousal", lambda: arousal(bp, floor, arousal_inverted)),
                     ("valence", lambda: valence(bp, floor)),
                     ("dominance", lambda: dominance(bp, floor))):
        try:
            values[name] = fn()
        except UndefinedFeature as exc:
            log.debug("%s undefined: %s", name, exc)
            values[name] = math.nan
            bad.append(name)
    return AffectFeatures(undefined=tuple(bad), **values)


def classify_eeg(f: AffectFeatures, variables: Mapping[str, LinguisticVariable], table: RuleTable,
                 output_var: LinguisticVariable) -> Decision | None:
    """EEG decision for one epoch, or ``None`` when a feature is undefined (epoch skipped)."""
    if not f.defined:
        return None
    inputs = {name: fuzzify(variables[name], getattr(f, name)) for name in table.inputs}
    return decide(table, inputs, output_var)


# --------------------------------------------------------------------------- FCM


@dataclass
class FcmModel:
    centers: np.ndarray
    memberships: np.ndarray  # (n_points, k)
    m: float
    n_iter: int
    objective: list[float] = field(default_factory=list)

    def predict(self, points: np.ndarray) -> np.ndarray:
        return fcm_memberships(np.atleast_2d(points), self.centers, self.m)


def fcm_memberships(points: np.ndarray, centers: np.ndarray, m: float) -> np.ndarray:
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    u = np.empty_like(d2)
    zero = d2 <= 0
    singular = zero.any(axis=1)
    if singular.any():
        # point sits on a center: all its membership goes to the coincident center(s)
        u[singular] = zero[singular] / zero[singular].sum(axis=1, keepdims=True)
    reg = ~singular
    if reg.any():
        # u_ij = 1 / sum_k (d_ij / d_ik)^(2/(m-1)), written with squared distances
        inv = d2[reg] ** (-1.0 / (m - 1.0))
        u[reg] = inv / inv.sum(axis=1, keepdims=True)
    return u


def fcm_objective(points: np.ndarray, centers: np.ndarray, u: np.ndarray, m: float) -> float:
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return float((u**m * d2).sum())


def _initial_centers(points: np.ndarray, k: int) -> np.ndarray:
    # data points at evenly spaced quantiles along the first principal axis
    centered = points - points.mean(axis=0)
    if points.shape[1] > 1 and np.any(centered):
        axis = np.linalg.svd(centered, full_matrices=False)[2][0]
        proj = centered @ axis
    else:
        proj = centered[:, 0]
    order = np.argsort(proj, kind="stable")
    picks = [order[min(len(order) - 1, int((j + 0.5) / k * len(order)))] for j in range(k)]
    return points[picks].astype(float)


def fcm_fit(points, k: int = 3, m: float = 2.0, tol: float = 1e-5, max_iter: int = 300) -> FcmModel:
    """Fuzzy C-means by alternating membership and center updates."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if k < 1:
        raise InputError("k must be >= 1")
    if not m > 1:
        raise InputError("fuzziness m must be > 1")
    if len(np.unique(pts, axis=0)) < k:
        raise InputError(f"need at least {k} distinct points")
    if k == 1:
        centers = pts.mean(axis=0, keepdims=True)
        u = np.ones((len(pts), 1))
        return FcmModel(centers, u, m, 1, [fcm_objective(pts, centers, u, m)])

    centers = _initial_centers(pts, k)
    objective = []
    for it in range(1, max_iter + 1):
        u = fcm_memberships(pts, centers, m)
        w = u**m
        new_centers = (w.T @ pts) / w.sum(axis=0)[:, None]
        objective.append(fcm_objective(pts, new_centers, u, m))
        shift = np.abs(new_centers - centers).max()
        centers = new_centers
        if shift < tol:
            break
    u = fcm_memberships(pts, centers, m)
    return FcmModel(centers, u, m, it, objective)


def calibrate_variable(var: LinguisticVariable, centers_1d: Sequence[float]) -> LinguisticVariable:
    """Re-anchor a variable's term cores on three sorted 1-D cluster centers."""
    lo, hi = var.universe
    c0, c1, c2 = np.clip(sorted(float(c) for c in centers_1d), lo, hi)
    if not lo <= c0 < c1 < c2 <= hi:
        log.warning("FCM centers %s not distinct inside %s; keeping %s", (c0, c1, c2), var.universe, var.name)
        return var
    return LinguisticVariable(var.name, var.universe, (
        (Label.SMALL, MembershipFunction.trapezoidal(lo, lo, c0, c1)),
        (Label.MEDIUM, MembershipFunction.triangular(c0, c1, c2)),
        (Label.BIG, MembershipFunction.trapezoidal(c1, c2, hi, hi)),
    ))
