"""CSV / JSON / PGM readers and writers for session files."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from PIL import Image

from .blink import EyeState, EyeStateStream
from .eeg import REQUIRED_CHANNELS, EegRecording, InputError
from .evaluation import ExpertLabel
from .fusion import EpochAssessment
from .fuzzy import ConfigError, Decision, Label
from .motion import ObjectSample

TIMELINE_COLUMNS = ("epoch", "start_s", "d_eye", "d_eeg", "d1", "d_mov", "df_crisp", "df_label", "flags")
JITTER_TOLERANCE = 0.01


def _rows(path: Path, required: Sequence[str]) -> Iterator[tuple[int, dict[str, str]]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in required if c not in header]
        if missing:
            raise InputError(f"{path}:1: missing column(s) {', '.join(missing)}")
        reader.fieldnames = header
        for row in reader:
            yield reader.line_num, row


def _number(path: Path, line: int, row: dict, key: str, kind=float):
    raw = row.get(key)
    try:
        value = kind(raw.strip())
    except (AttributeError, ValueError):
        raise InputError(f"{path}:{line}: column {key!r} has non-numeric value {raw!r}") from None
    if kind is float and not np.isfinite(value):
        raise InputError(f"{path}:{line}: column {key!r} is not finite")
    return value


def read_eeg_csv(path: str | Path, sample_rate: float | None = None) -> EegRecording:
    """EEG CSV with ``time_s`` plus the seven analysed channels; other columns are ignored.

    The sample rate comes from the argument, a ``<file>.json`` sidecar with a
    ``sample_rate`` key, or the time column (sample spacing may jitter by 1%).
    """
    path = Path(path)
    cols = ("time_s",) + REQUIRED_CHANNELS
    times, data = [], []
    for line, row in _rows(path, cols):
        times.append(_number(path, line, row, "time_s"))
        data.append([_number(path, line, row, ch) for ch in REQUIRED_CHANNELS])
    if len(times) < 2:
        raise InputError(f"{path}: need at least two samples")
    t = np.array(times)
    dt = np.diff(t)
    if sample_rate is None:
        sidecar = path.with_name(path.name + ".json")
        if sidecar.exists():
            sample_rate = float(json.loads(sidecar.read_text())["sample_rate"])
    step = float(np.median(dt)) if sample_rate is None else 1.0 / sample_rate
    if step <= 0 or np.max(np.abs(dt - step)) > JITTER_TOLERANCE * step:
        bad = int(np.argmax(np.abs(dt - step))) + 3  # header is line 1
        raise InputError(f"{path}:{bad}: sample spacing deviates more than 1% from {step:g} s")
    return EegRecording(REQUIRED_CHANNELS, 1.0 / step, np.array(data).T, start_s=float(t[0]))


def read_blink_csv(path: str | Path, frame_rate: float | None = None) -> EyeStateStream:
    path = Path(path)
    times, states = [], []
    for line, row in _rows(path, ("time_s", "eye_state")):
        times.append(_number(path, line, row, "time_s"))
        try:
            states.append(EyeState.parse(row["eye_state"] or ""))
        except InputError as exc:
            raise InputError(f"{path}:{line}: {exc}") from None
        if len(times) > 1 and times[-1] <= times[-2]:
            raise InputError(f"{path}:{line}: timestamps must increase")
    if not times:
        raise InputError(f"{path}: no eye-state rows")
    return EyeStateStream(np.array(times), tuple(states), frame_rate)


def read_objects_csv(path: str | Path) -> list[ObjectSample]:
    path = Path(path)
    out = []
    for line, row in _rows(path, ("time_s", "speed_kmh", "distance_m", "weather")):
        weather = (row["weather"] or "").strip().lower()
        if weather not in ("clear", "rain"):
            raise InputError(f"{path}:{line}: weather must be clear or rain, got {row['weather']!r}")
        speed = _number(path, line, row, "speed_kmh")
        dist = _number(path, line, row, "distance_m")
        if speed < 0 or dist < 0:
            raise InputError(f"{path}:{line}: speed and distance must be non-negative")
        out.append(ObjectSample(_number(path, line, row, "time_s"), speed, dist, weather))
    return out


def read_labels_csv(path: str | Path) -> list[ExpertLabel]:
    path = Path(path)
    out = []
    for line, row in _rows(path, ("epoch", "oss_score")):
        score = _number(path, line, row, "oss_score", int)
        if score not in range(5):
            raise InputError(f"{path}:{line}: oss_score must be 0-4, got {score}")
        out.append(ExpertLabel(_number(path, line, row, "epoch", int), score))
    return out


# ------------------------------------------------------------------ writers


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def _fmt_time(v: float) -> str:
    return f"{v:.7f}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_eeg_csv(path: Path, rec: EegRecording) -> None:
    t = rec.start_s + np.arange(rec.samples.shape[1]) / rec.sample_rate
    rows = ([_fmt_time(ti)] + [_fmt(v) for v in col] for ti, col in zip(t, rec.samples.T))
    write_csv(path, ("time_s",) + rec.channels, rows)


def write_blink_csv(path: Path, stream: EyeStateStream) -> None:
    write_csv(path, ("time_s", "eye_state"), ((_fmt_time(t), s.value) for t, s in zip(stream.timestamps, stream.states)))


def write_objects_csv(path: Path, samples: Sequence[ObjectSample]) -> None:
    write_csv(path, ("time_s", "speed_kmh", "distance_m", "weather"),
              ((_fmt(s.time_s), _fmt(s.speed_kmh), _fmt(s.distance_m), s.weather) for s in samples))


def write_labels_csv(path: Path, labels: Sequence[ExpertLabel]) -> None:
    write_csv(path, ("epoch", "oss_score"), ((lb.epoch_index, lb.oss_score) for lb in labels))


def _label(decision) -> str:
    return "NA" if decision is None else decision.label.name


def timeline_rows(assessments: Sequence[EpochAssessment]) -> list[list[str]]:
    rows = []
    for a in assessments:
        rows.append([
            str(a.epoch_index), f"{a.start_s:.3f}",
            _label(a.d_eye), _label(a.d_eeg), _label(a.d_1), _label(a.d_mov),
            "NA" if a.d_f is None else f"{a.d_f.value:.4f}", _label(a.d_f),
            ";".join(sorted(a.flags)),
        ])
    return rows


def read_timeline_csv(path: str | Path) -> list[EpochAssessment]:
    """Label-only assessments back from a timeline CSV (crisp values are not kept)."""
    path = Path(path)
    columns = {"d_eye": "d_eye", "d_eeg": "d_eeg", "d_1": "d1", "d_mov": "d_mov", "d_f": "df_label"}
    out = []
    for line, row in _rows(path, TIMELINE_COLUMNS):
        decisions = {}
        for name, col in columns.items():
            text = (row[col] or "").strip()
            try:
                decisions[name] = None if text in ("", "NA") else Decision(math.nan, Label.parse(text))
            except ConfigError as exc:
                raise InputError(f"{path}:{line}: {exc}") from None
        flags = frozenset(f for f in (row["flags"] or "").split(";") if f)
        out.append(EpochAssessment(_number(path, line, row, "epoch", int),
                                   _number(path, line, row, "start_s"), flags=flags, **decisions))
    return out


def write_timeline_csv(path: Path, assessments: Sequence[EpochAssessment]) -> None:
    write_csv(path, TIMELINE_COLUMNS, timeline_rows(assessments))


def write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_pgm(path: str | Path) -> np.ndarray:
    with Image.open(path) as img:
        if img.mode not in ("L", "I", "I;16"):
            raise InputError(f"{path}: expected a grayscale PGM, got mode {img.mode}")
        return np.asarray(img, dtype=float)


def write_pgm(path: str | Path, frame: np.ndarray) -> None:
    Image.fromarray(np.clip(frame, 0, 255).astype(np.uint8), mode="L").save(path, format="PPM")
