"""Road risk from stopping-distance kinematics, and first-frame background subtraction."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from .eeg import InputError
from .fuzzy import Decision, Label, LinguisticVariable, MembershipFunction, RuleTable, decide, fuzzify
from .fusion import StreamEpoch

log = logging.getLogger(__name__)

WEATHER_FACTORS = {"clear": 1.0, "rain": 1.5}
DEFAULT_SOFTNESS = 0.1
RATIO_UNIVERSE = (0.0, 2.0)


def reaction_distance(speed_kmh: float, reaction_time_s: float = 1.0) -> float:
    return reaction_time_s * speed_kmh * 1000 / 3600


def braking_distance(speed_kmh: float, weather_factor: float = 1.0) -> float:
    return speed_kmh * 3 / 10 * weather_factor


def stopping_distance(speed_kmh: float, reaction_time_s: float = 1.0, weather_factor: float = 1.0) -> float:
    return reaction_distance(speed_kmh, reaction_time_s) + braking_distance(speed_kmh, weather_factor)


@dataclass(frozen=True)
class KinematicState:
    speed_kmh: float
    distance_m: float
    reaction_time_s: float = 1.0
    weather_factor: float = 1.0
    any_weather: bool = False  # lift the clear/rain restriction on the factor

    def __post_init__(self):
        vals = (self.speed_kmh, self.distance_m, self.reaction_time_s, self.weather_factor)
        if not all(math.isfinite(v) for v in vals):
            raise InputError(f"non-finite kinematic state {vals}")
        if self.speed_kmh < 0 or self.distance_m < 0:
            raise InputError("speed and distance must be non-negative")
        if self.reaction_time_s <= 0:
            raise InputError("reaction time must be positive")
        if self.weather_factor <= 0 or (
                not self.any_weather and self.weather_factor not in WEATHER_FACTORS.values()):
            raise InputError(f"weather factor {self.weather_factor} not in {sorted(WEATHER_FACTORS.values())}")

    @property
    def reaction_m(self) -> float:
        return reaction_distance(self.speed_kmh, self.reaction_time_s)

    @property
    def stopping_m(self) -> float:
        return stopping_distance(self.speed_kmh, self.reaction_time_s, self.weather_factor)


def crisp_band(k: KinematicState) -> Label:
    """Risk band: beyond stopping distance SMALL, within reaction distance BIG."""
    if k.distance_m > k.stopping_m:
        return Label.SMALL
    if k.distance_m > k.reaction_m:
        return Label.MEDIUM
    return Label.BIG


def distance_variable(reaction_ratio: float, softness: float = DEFAULT_SOFTNESS) -> LinguisticVariable:
    """Risk variable over distance / stopping distance, graded around the reaction ratio and 1.

    Risk runs opposite to distance: BIG sits near 0, SMALL beyond 1.
    """
    rho = reaction_ratio
    s = min(softness, rho / 2, (1 - rho) / 2)
    hi = RATIO_UNIVERSE[1]
    return LinguisticVariable("distance_risk", RATIO_UNIVERSE, (
        (Label.SMALL, MembershipFunction.trapezoidal(1 - s, 1 + s, hi, hi)),
        (Label.MEDIUM, MembershipFunction.trapezoidal(rho - s, rho + s, 1 - s, 1 + s)),
        (Label.BIG, MembershipFunction.trapezoidal(0, 0, rho - s, rho + s)),
    ))


class DistanceAssessment(NamedTuple):
    decision: Decision
    band: Label
    ratio: float


def classify_distance(k: KinematicState, rules: RuleTable, output_var: LinguisticVariable,
                      softness: float = DEFAULT_SOFTNESS) -> DistanceAssessment:
    d_s = k.stopping_m
    if d_s <= 0:
        decision = Decision(output_var.core_point(Label.SMALL), Label.SMALL, frozenset({"stationary"}))
        return DistanceAssessment(decision, Label.SMALL, math.inf)
    ratio = k.distance_m / d_s
    var = distance_variable(k.reaction_m / d_s, softness)
    decision = decide(rules, {rules.inputs[0]: fuzzify(var, ratio)}, output_var)
    return DistanceAssessment(decision, crisp_band(k), ratio)


@dataclass(frozen=True)
class ObjectSample:
    time_s: float
    speed_kmh: float
    distance_m: float
    weather: str = "clear"

    def state(self, reaction_time_s: float = 1.0) -> KinematicState:
        try:
            factor = WEATHER_FACTORS[self.weather]
        except KeyError:
            raise InputError(f"weather must be one of {sorted(WEATHER_FACTORS)}, got {self.weather!r}") from None
        return KinematicState(self.speed_kmh, self.distance_m, reaction_time_s, factor)


def object_epochs(samples: Sequence[ObjectSample], epoch_s: float, rules: RuleTable,
                  output_var: LinguisticVariable, reaction_time_s: float = 1.0,
                  softness: float = DEFAULT_SOFTNESS) -> list[StreamEpoch]:
    """Per-epoch road decision: the riskiest object sample inside each epoch."""
    if not samples:
        return []
    times = np.array([s.time_s for s in samples])
    period = float(np.median(np.diff(times))) if len(times) > 1 else 0.0
    start, end = times[0], times[-1] + period
    out = []
    for i in range(int((end - start + 1e-9) // epoch_s)):
        lo = start + i * epoch_s
        hi = lo + epoch_s
        rows = [s for s in samples if lo <= s.time_s < hi]
        if not rows:
            continue
        scored = [(classify_distance(r.state(reaction_time_s), rules, output_var, softness), r) for r in rows]
        worst, row = max(scored, key=lambda p: (p[0].decision.value, p[0].decision.label))
        out.append(StreamEpoch(float(lo), float(hi), worst.decision, {
            "distance_m": row.distance_m,
            "speed_kmh": row.speed_kmh,
            "band": worst.band.name,
        }))
    return out


# ------------------------------------------------------------ background subtraction


def gaussian_kernel(sigma: float, radius: int | None = None) -> np.ndarray:
    """Gaussian density sampled at integer offsets -radius..radius, normalized to sum 1."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if radius is None:
        radius = max(1, int(math.ceil(3 * sigma)))
    if radius < 1:
        raise ValueError("radius must be >= 1")
    x = np.arange(-radius, radius + 1, dtype=float)
    g = np.exp(-(x**2) / (2 * sigma**2)) / math.sqrt(2 * math.pi * sigma**2)
    return g / g.sum()


def smooth(frame: np.ndarray, sigma: float, radius: int | None = None) -> np.ndarray:
    kernel = gaussian_kernel(sigma, radius)
    out = ndimage.correlate1d(np.asarray(frame, dtype=float), kernel, axis=0, mode="nearest")
    return ndimage.correlate1d(out, kernel, axis=1, mode="nearest")


@dataclass(frozen=True)
class MotionResult:
    mask: np.ndarray
    boxes: tuple[tuple[int, int, int, int], ...]  # (row0, col0, row1, col1), end-exclusive

    @property
    def motion_present(self) -> bool:
        return bool(self.boxes)


_FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


def detect_motion(current: np.ndarray, background: np.ndarray, sigma: float = 1.5,
                  threshold: float = 30.0, min_area: int = 25) -> MotionResult:
    current = np.asarray(current, dtype=float)
    background = np.asarray(background, dtype=float)
    if current.shape != background.shape or current.ndim != 2:
        raise InputError(f"frame shapes differ: {current.shape} vs {background.shape}")
    diff = np.abs(smooth(current, sigma) - smooth(background, sigma))
    mask = diff > threshold
    labels, n = ndimage.label(mask, structure=_FOUR_CONNECTED)
    boxes = []
    if n:
        areas = ndimage.sum_labels(mask, labels, index=np.arange(1, n + 1))
        for area, sl in zip(areas, ndimage.find_objects(labels)):
            if area >= min_area:
                boxes.append((sl[0].start, sl[1].start, sl[0].stop, sl[1].stop))
    return MotionResult(mask, tuple(boxes))


def motion_timeline(frames: Sequence[np.ndarray], **kwargs) -> list[MotionResult]:
    """Detect motion in every frame against the first frame of the sequence."""
    if not frames:
        return []
    background = frames[0]
    return [detect_motion(f, background, **kwargs) for f in frames]
