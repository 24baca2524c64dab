"""Seeded synthetic sessions: EEG, eye-state stream, object log and expert labels."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .blink import EyeState, EyeStateStream
from .eeg import REQUIRED_CHANNELS, EegRecording
from .evaluation import ExpertLabel, blink_quality, oss_label
from .fuzzy import Label
from .motion import ObjectSample
from .rulesets import FuzzyConfig

ALPHA_TONES = (9.0, 10.0, 11.0)
BETA_TONES = (15.0, 18.0, 21.0, 24.0, 27.0)
BETA_POWER = 4.0  # µV² per channel
NOISE_RMS = 0.1  # µV

# alpha/beta power ratio per channel for each scripted EEG level
CHANNEL_RATIOS = {
    Label.SMALL: dict.fromkeys(REQUIRED_CHANNELS, 0.01),
    Label.MEDIUM: {"AF3": 2.0, "AF4": 2.0, "F3": 1.5, "F4": 2.5, "FC6": 1.0, "F8": 1.0, "P8": 1.0},
    Label.BIG: {"AF3": 4.0, "AF4": 4.0, "F3": 4.0, "F4": 6.0, "FC6": 4.0, "F8": 4.0, "P8": 4.0},
}
# (valence, arousal, dominance) labels those ratios land on with the default partitions
FEATURE_LABELS = {
    Label.SMALL: (Label.SMALL, Label.SMALL, Label.BIG),
    Label.MEDIUM: (Label.MEDIUM, Label.MEDIUM, Label.MEDIUM),
    Label.BIG: (Label.BIG, Label.BIG, Label.SMALL),
}
SCRIPTED_ALPHA_S = {Label.SMALL: 0.0, Label.MEDIUM: 3.0, Label.BIG: 12.0}
DISTANCE_M = {Label.SMALL: 40.0, Label.MEDIUM: 15.0, Label.BIG: 4.0}  # at 36 km/h, clear


@dataclass(frozen=True)
class EpochScript:
    eeg: Label
    eye: Label
    road: Label


@dataclass(frozen=True)
class SyntheticSessionSpec:
    epochs: tuple[EpochScript, ...]
    seed: int = 0
    epoch_s: float = 20.0
    sample_rate: float = 128.0
    frame_rate: float = 30.0
    speed_kmh: float = 36.0

    @property
    def duration_s(self) -> float:
        return len(self.epochs) * self.epoch_s


PRESETS = {
    "awake": "S:S:S,S:S:S,S:S:S",
    "drowsy-near": "B:B:B,B:B:B,B:B:B",
    "demo": "S:S:S,M:M:M,B:B:B",
}


def parse_script(text: str) -> tuple[EpochScript, ...]:
    """``EEG:EYE:ROAD`` per epoch, comma separated, letters S/M/B (or a preset name)."""
    text = PRESETS.get(text, text)
    letters = {"S": Label.SMALL, "M": Label.MEDIUM, "B": Label.BIG}
    epochs = []
    for chunk in text.split(","):
        parts = chunk.strip().upper().split(":")
        if len(parts) != 3 or any(p not in letters for p in parts):
            raise ValueError(f"bad epoch script {chunk!r}; expected e.g. S:M:B")
        epochs.append(EpochScript(*(letters[p] for p in parts)))
    return tuple(epochs)


def _tones(rng: np.random.Generator, t: np.ndarray, freqs: Sequence[float], power: float) -> np.ndarray:
    amp = np.sqrt(2 * power / len(freqs))
    phases = rng.uniform(0, 2 * np.pi, len(freqs))
    return sum(amp * np.sin(2 * np.pi * f * t + ph) for f, ph in zip(freqs, phases))


def generate_eeg(spec: SyntheticSessionSpec, rng: np.random.Generator) -> EegRecording:
    n = int(round(spec.epoch_s * spec.sample_rate))
    t = np.arange(n) / spec.sample_rate
    chunks = []
    for ep in spec.epochs:
        block = np.empty((len(REQUIRED_CHANNELS), n))
        for row, ch in enumerate(REQUIRED_CHANNELS):
            ratio = CHANNEL_RATIOS[ep.eeg][ch]
            block[row] = (_tones(rng, t, BETA_TONES, BETA_POWER)
                          + _tones(rng, t, ALPHA_TONES, ratio * BETA_POWER)
                          + rng.normal(0, NOISE_RMS, n))
        chunks.append(block)
    return EegRecording(REQUIRED_CHANNELS, spec.sample_rate, np.hstack(chunks))


def tone_recording(freq_hz: float, duration_s: float = 20.0, sample_rate: float = 128.0,
                   amplitude: float = 1.0, noise_rms: float = 0.01, seed: int = 0) -> EegRecording:
    """Every channel carries the same pure tone plus a little white noise."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    data = np.vstack([amplitude * np.sin(2 * np.pi * freq_hz * t) + rng.normal(0, noise_rms, n)
                      for _ in REQUIRED_CHANNELS])
    return EegRecording(REQUIRED_CHANNELS, sample_rate, data)


def _closures(level: Label) -> list[float]:
    """Closure durations (s) for one epoch; only BIG epochs average slow."""
    brief = [2 / 30] * 6
    if level is Label.SMALL:
        return brief
    if level is Label.MEDIUM:
        return brief + [1.5]
    return brief + [1.5, 4.5]


def generate_blinks(spec: SyntheticSessionSpec, rng: np.random.Generator) -> tuple[EyeStateStream, list[list[float]]]:
    fps = spec.frame_rate
    per_epoch = int(round(spec.epoch_s * fps))
    states = [EyeState.OPEN] * (per_epoch * len(spec.epochs))
    durations = []
    for i, ep in enumerate(spec.epochs):
        closures = _closures(ep.eye)
        durations.append(closures)
        lengths = [int(round(d * fps)) for d in closures]
        # open gaps before, between and after closures keep every closure inside the epoch
        min_gap = int(fps // 2)
        surplus = per_epoch - sum(lengths) - (len(lengths) + 1) * min_gap
        weights = rng.uniform(0.5, 1.5, len(lengths) + 1)
        gaps = min_gap + np.floor(surplus * weights / weights.sum()).astype(int)
        pos = i * per_epoch
        for gap, frames in zip(gaps, lengths):
            pos += gap
            states[pos:pos + frames] = [EyeState.CLOSED] * frames
            pos += frames
    times = np.arange(len(states)) / fps
    return EyeStateStream(times, tuple(states), fps), durations


def generate_objects(spec: SyntheticSessionSpec, rng: np.random.Generator) -> list[ObjectSample]:
    out = []
    for i, ep in enumerate(spec.epochs):
        for k in range(int(spec.epoch_s)):
            jitter = rng.uniform(-0.5, 0.5)
            out.append(ObjectSample(i * spec.epoch_s + k, spec.speed_kmh,
                                    round(DISTANCE_M[ep.road] + jitter, 3), "clear"))
    return out


def expected_labels(spec: SyntheticSessionSpec, fuzzy: FuzzyConfig) -> list[dict[str, Label]]:
    """Per-epoch decisions composed directly from the rule tables."""
    eeg, drowsy, final = fuzzy.table("eeg"), fuzzy.table("drowsiness"), fuzzy.table("final")
    out = []
    for ep in spec.epochs:
        d_eeg = eeg.consequent(*FEATURE_LABELS[ep.eeg])
        d_1 = drowsy.consequent(ep.eye, d_eeg)
        out.append({"d_eye": ep.eye, "d_eeg": d_eeg, "d_1": d_1, "d_mov": ep.road,
                    "d_f": final.consequent(d_1, ep.road)})
    return out


def generate_synthetic(spec: SyntheticSessionSpec, out: str | Path) -> dict[str, Path]:
    """Write a full session file set into ``out``; identical bytes for identical specs."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    rec = generate_eeg(spec, rng)
    stream, durations = generate_blinks(spec, rng)
    objects = generate_objects(spec, rng)
    labels = [
        ExpertLabel(i, oss_label(SCRIPTED_ALPHA_S[ep.eeg], blink_quality(durations[i])))
        for i, ep in enumerate(spec.epochs)
    ]
    paths = {name: out / f"{name}.csv" for name in ("eeg", "blink", "objects", "labels")}
    io.write_eeg_csv(paths["eeg"], rec)
    io.write_blink_csv(paths["blink"], stream)
    io.write_objects_csv(paths["objects"], objects)
    io.write_labels_csv(paths["labels"], labels)
    paths["config"] = out / "session.cfg"
    paths["config"].write_text(
        "eeg = eeg.csv\nblink = blink.csv\nobjects = objects.csv\nlabels = labels.csv\n"
        f"epoch_seconds = {spec.epoch_s:g}\nout = results\nseed = {spec.seed}\n")
    return paths
