"""Eye-closure episodes, PERCLOS and the blink-based drowsiness decision."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .eeg import InputError
from .fuzzy import Decision, LinguisticVariable, RuleTable, decide, fuzzify
from .fusion import StreamEpoch

log = logging.getLogger(__name__)


class EyeState(enum.Enum):
    OPEN = "open"
    CLOSED = "closed"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, text: str) -> "EyeState":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise InputError(f"eye state must be open/closed/unknown, got {text!r}") from None


@dataclass(frozen=True)
class EyeStateStream:
    timestamps: np.ndarray
    states: tuple[EyeState, ...]
    frame_rate: float | None = None

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=float)
        if len(t) != len(self.states):
            raise InputError("timestamps and states differ in length")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise InputError("eye-state timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "states", tuple(self.states))
        if self.frame_rate is None and len(t) > 1:
            object.__setattr__(self, "frame_rate", 1.0 / float(np.median(np.diff(t))))

    @property
    def frame_period(self) -> float:
        return 1.0 / self.frame_rate if self.frame_rate else 0.0

    @property
    def start_s(self) -> float:
        return float(self.timestamps[0])

    @property
    def end_s(self) -> float:
        """End of the last frame's exposure."""
        return float(self.timestamps[-1]) + self.frame_period

    def shifted(self, dt: float) -> "EyeStateStream":
        return EyeStateStream(self.timestamps + dt, self.states, self.frame_rate)


@dataclass(frozen=True)
class ClosureEpisode:
    start_s: float
    end_s: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


def closure_episodes(s: EyeStateStream) -> list[ClosureEpisode]:
    """Maximal CLOSED runs; UNKNOWN frames join a run only when CLOSED on both sides.

    An episode ends at the timestamp of the first frame after the run (or one
    frame period after the last frame when the stream ends closed).
    """
    if not len(s.states):
        raise InputError("empty eye-state stream")
    episodes = []
    states, t = s.states, s.timestamps
    i, n = 0, len(states)
    while i < n:
        if states[i] is not EyeState.CLOSED:
            i += 1
            continue
        start = i
        last_closed = i
        j = i + 1
        while j < n and states[j] is not EyeState.OPEN:
            if states[j] is EyeState.CLOSED:
                last_closed = j
            j += 1
        # trailing UNKNOWN frames are not bracketed, so the run stops after last_closed
        stop = last_closed + 1
        end = t[stop] if stop < n else t[-1] + s.frame_period
        episodes.append(ClosureEpisode(float(t[start]), float(end)))
        i = stop
    return episodes


def closed_time(episodes: Sequence[ClosureEpisode], lo: float, hi: float) -> float:
    return sum(max(0.0, min(e.end_s, hi) - max(e.start_s, lo)) for e in episodes)


def perclos(s: EyeStateStream, window_s: float) -> float:
    """Percentage of the trailing ``window_s`` seconds spent with eyes closed."""
    if not window_s > 0:
        raise InputError("PERCLOS window must be positive")
    hi = s.end_s
    lo = hi - window_s
    if lo < s.start_s:
        log.warning("PERCLOS window %.1f s exceeds stream span; using %.1f s", window_s, hi - s.start_s)
        lo = s.start_s
    span = hi - lo
    if span <= 0:
        return 0.0
    return 100.0 * closed_time(closure_episodes(s), lo, hi) / span


def longest_closure(episodes: Sequence[ClosureEpisode]) -> float:
    return max((e.duration_s for e in episodes), default=0.0)


def classify_blink(episodes: Sequence[ClosureEpisode], var: LinguisticVariable, rules: RuleTable,
                   output_var: LinguisticVariable) -> Decision:
    """Eye decision from the longest closure in the epoch."""
    closure = longest_closure(episodes)
    return decide(rules, {rules.inputs[0]: fuzzify(var, closure)}, output_var)


def blink_epochs(s: EyeStateStream, epoch_s: float, var: LinguisticVariable, rules: RuleTable,
                 output_var: LinguisticVariable) -> list[StreamEpoch]:
    """Per-epoch eye decisions on a grid starting at the stream's first frame.

    Each episode belongs to the epoch holding its midpoint; a trailing partial
    epoch is dropped.
    """
    episodes = closure_episodes(s)
    count = int((s.end_s - s.start_s + 1e-9) // epoch_s)
    out = []
    for i in range(count):
        lo = s.start_s + i * epoch_s
        hi = lo + epoch_s
        mine = [e for e in episodes if lo <= (e.start_s + e.end_s) / 2 < hi]
        decision = classify_blink(mine, var, rules, output_var)
        out.append(StreamEpoch(lo, hi, decision, {
            "closure_s": round(longest_closure(mine), 6),
            "perclos": round(100.0 * closed_time(episodes, lo, hi) / epoch_s, 6),
            "closures": len(mine),
        }))
    return out
