"""Expert (OSS) labelling and column-normalized confusion matrices."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .eeg import ALPHA_BAND, InputError, band_power_signal
from .fuzzy import LABELS, Label

log = logging.getLogger(__name__)

NEGLIGIBLE_ALPHA_S = 0.5
SHORT_ALPHA_S = 5.0
LONG_ALPHA_S = 10.0
SLOW_BLINK_S = 0.5
PCT_DECIMALS = 2
COLUMN_SUM_TOLERANCE = 0.01


def oss_label(alpha_burst_s: float, blink_quality: str) -> int:
    """Objective sleepiness score (0-4) from alpha-burst seconds and blink quality.

    normal blinks: negligible alpha -> 0, under 5 s -> 1, otherwise 2
    slow blinks:   under 5 s -> 2, under 10 s -> 3, otherwise 4
    """
    if not 0 <= alpha_burst_s <= 20 + 1e-9:
        raise InputError(f"alpha burst {alpha_burst_s} s outside [0, 20]")
    if blink_quality == "normal":
        if alpha_burst_s < NEGLIGIBLE_ALPHA_S:
            return 0
        return 1 if alpha_burst_s < SHORT_ALPHA_S else 2
    if blink_quality == "slow":
        if alpha_burst_s < SHORT_ALPHA_S:
            return 2
        return 3 if alpha_burst_s < LONG_ALPHA_S else 4
    raise InputError(f"blink quality must be 'normal' or 'slow', got {blink_quality!r}")


def oss_to_label(score: int) -> Label:
    if score not in range(5):
        raise InputError(f"OSS score must be 0-4, got {score}")
    return Label(min(score, 2))


def blink_quality(closure_durations: Sequence[float], slow_s: float = SLOW_BLINK_S) -> str:
    """'slow' when the mean closure duration exceeds ``slow_s``."""
    if not len(closure_durations):
        return "normal"
    return "slow" if float(np.mean(closure_durations)) > slow_s else "normal"


def alpha_burst_seconds(signal: np.ndarray, sample_rate: float, segment_s: float = 1.0,
                        factor: float = 2.0, reference: float | None = None) -> float:
    """Proxy for alpha-burst duration inside one epoch.

    The epoch is cut into consecutive ``segment_s`` segments; seconds are counted
    for segments whose alpha power exceeds ``factor`` times ``reference`` (the
    median segment alpha power of the epoch unless given).
    """
    size = int(round(segment_s * sample_rate))
    count = len(signal) // size
    if count == 0:
        return 0.0
    powers = np.array([band_power_signal(signal[i * size:(i + 1) * size], sample_rate, ALPHA_BAND)
                       for i in range(count)])
    ref = float(np.median(powers)) if reference is None else reference
    return float((powers > factor * ref).sum() * segment_s)


@dataclass(frozen=True)
class ExpertLabel:
    epoch_index: int
    oss_score: int

    @property
    def label(self) -> Label:
        return oss_to_label(self.oss_score)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Predicted labels in rows, expert labels in columns, percentages per column."""

    percent: np.ndarray  # 3x3, NaN marks a missing cell
    column_totals: tuple[int, int, int]
    counts: np.ndarray | None = None
    name: str = ""

    @classmethod
    def from_percentages(cls, percent, column_totals, name: str = "") -> "ConfusionMatrix":
        pct = np.array([[math.nan if v is None else float(v) for v in row] for row in percent])
        if pct.shape != (3, 3):
            raise InputError("percentage table must be 3x3")
        return cls(pct, tuple(int(t) for t in column_totals), None, name)

    @property
    def total(self) -> int:
        return sum(self.column_totals)

    def cell(self, predicted: Label, expert: Label) -> float:
        return float(self.percent[int(predicted), int(expert)])

    def inconsistencies(self) -> list[str]:
        """Columns whose percentages are incomplete or do not sum to 100."""
        problems = []
        for j, lbl in enumerate(LABELS):
            col = self.percent[:, j]
            if self.column_totals[j] == 0:
                continue
            if np.isnan(col).any():
                missing = [LABELS[i].name for i in np.flatnonzero(np.isnan(col))]
                problems.append(f"{lbl.name} column: missing cell(s) in row {', '.join(missing)}; "
                                f"present cells sum to {np.nansum(col):.2f}")
            elif abs(col.sum() - 100.0) > COLUMN_SUM_TOLERANCE:
                problems.append(f"{lbl.name} column sums to {col.sum():.2f}, not 100")
        return problems

    def render(self) -> str:
        width = 10
        head = " " * 8 + "".join(f"{lbl.name:>{width}}" for lbl in LABELS)
        lines = [self.name or "confusion", " " * 8 + f"{'EXPERT':>{width * 3}}", head]
        for i, lbl in enumerate(LABELS):
            cells = "".join(
                f"{'--':>{width}}" if np.isnan(v) else f"{v:>{width - 1}.2f}%" for v in self.percent[i])
            lines.append(f"{lbl.name:<8}{cells}")
        lines.append(f"{'SAMPLES':<8}" + "".join(f"{t:>{width}d}" for t in self.column_totals))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rows": "predicted",
            "columns": "expert",
            "labels": [lbl.name for lbl in LABELS],
            "percent": [[None if np.isnan(v) else round(float(v), 4) for v in row] for row in self.percent],
            "counts": None if self.counts is None else self.counts.astype(int).tolist(),
            "samples": list(self.column_totals),
            "inconsistencies": self.inconsistencies(),
        }


def confusion(predicted: Sequence[Label], expert: Sequence[Label], name: str = "") -> ConfusionMatrix:
    if len(predicted) != len(expert):
        raise InputError(f"{len(predicted)} predictions vs {len(expert)} expert labels")
    counts = np.zeros((3, 3), dtype=int)
    for p, e in zip(predicted, expert):
        counts[int(p), int(e)] += 1
    totals = counts.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        pct = np.where(totals > 0, 100.0 * counts / np.where(totals > 0, totals, 1), 0.0)
    return ConfusionMatrix(pct, tuple(int(t) for t in totals), counts, name)


@dataclass(frozen=True)
class SummaryMetrics:
    big_detection: float
    false_alarm: float
    binary_detection: float
    undefined: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        clean = lambda v: None if math.isnan(v) else v  # noqa: E731
        return {"big_detection_pct": clean(self.big_detection), "false_alarm_pct": clean(self.false_alarm),
                "binary_detection_pct": clean(self.binary_detection), "undefined": list(self.undefined)}


def format_summary(m: SummaryMetrics) -> str:
    pct = lambda v: "n/a" if math.isnan(v) else f"{v:.2f}%"  # noqa: E731
    return (f"BIG detection {pct(m.big_detection)}  false alarms {pct(m.false_alarm)}  "
            f"two-class detection {pct(m.binary_detection)}")


def summary_metrics(cm: ConfusionMatrix) -> SummaryMetrics:
    """BIG-row figures, rounded to hundredths.

    ``big_detection``: BIG predicted on BIG expert epochs.
    ``false_alarm``: BIG predicted on SMALL and MEDIUM expert epochs, summed.
    ``binary_detection``: BIG-row BIG plus BIG-row MEDIUM, the two-class
    (risk / no risk) figure.
    """
    S, M, B = LABELS
    undefined = []

    def cells(*experts: Label) -> float:
        if any(cm.column_totals[int(e)] == 0 for e in experts):
            undefined.append("+".join(e.name for e in experts))
            return math.nan
        return round(sum(cm.cell(B, e) for e in experts), PCT_DECIMALS)

    big = cells(B)
    false_alarm = cells(S, M)
    binary = cells(B, M)
    return SummaryMetrics(big, false_alarm, binary, tuple(undefined))


# Reference hierarchical-fusion matrix; its SMALL row carries only two cells.
REFERENCE_HIERARCHICAL = ConfusionMatrix.from_percentages(
    [[87.12, 12.41, None],
     [10.23, 76.13, 12.22],
     [2.65, 11.46, 79.46]],
    (730, 244, 160),
    name="hierarchical (reference)",
)
