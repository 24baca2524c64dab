"""Session configuration and the end-to-end replay pipeline."""
from __future__ import annotations

import configparser
import dataclasses
import io as _stdio
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .blink import blink_epochs
from .eeg import (DEFAULT_EPOCH_S, BandPowerSet, InputError, affect_features, calibrate_variable,
                  classify_eeg, fcm_fit, window_epochs)
from .evaluation import ConfusionMatrix, SummaryMetrics, confusion, format_summary, summary_metrics
from .fusion import EpochAssessment, StreamEpoch, assess, synchronize
from .fuzzy import ConfigError, Decision
from .motion import DEFAULT_SOFTNESS, motion_timeline, object_epochs
from .rulesets import FuzzyConfig, default_text, parse_config

log = logging.getLogger(__name__)

SYSTEMS = ("d_eye", "d_eeg", "d_1", "d_mov", "d_f")
_PATH_KEYS = ("eeg", "blink", "objects", "labels", "frames", "rules", "out")


@dataclass
class SessionConfig:
    eeg: Path | None = None
    blink: Path | None = None
    objects: Path | None = None
    labels: Path | None = None
    frames: Path | None = None  # directory of PGM frames, sorted by name
    out: Path = Path("out")
    rules: Path | None = None
    epoch_seconds: float = DEFAULT_EPOCH_S
    arousal_inverted: bool = False
    fcm_calibrate: bool = False
    reaction_time_s: float = 1.0
    distance_softness: float = DEFAULT_SOFTNESS
    frame_rate: float = 10.0
    motion_sigma: float = 1.5
    motion_threshold: float = 30.0
    motion_min_area: int = 25
    seed: int = 0
    fuzzy_override: str = field(default="", repr=False)

    def validate(self) -> None:
        if not self.epoch_seconds > 0:
            raise ConfigError("epoch_seconds must be positive")
        for key in _PATH_KEYS:
            path = getattr(self, key)
            if key != "out" and path is not None and not Path(path).exists():
                raise ConfigError(f"{key} file not found: {path}")

    def fuzzy_config(self) -> FuzzyConfig:
        texts = [default_text()]
        if self.rules is not None:
            texts.append(Path(self.rules).read_text())
        if self.fuzzy_override:
            texts.append(self.fuzzy_override)
        return parse_config(*texts)


def load_session_config(path: str | Path) -> SessionConfig:
    """Read ``key = value`` lines (an optional ``[session]`` header) into a config.

    Relative paths resolve against the config file's directory. Any
    ``[variable:*]`` / ``[rules:*]`` sections override the bundled fuzzy setup.
    """
    path = Path(path)
    text = path.read_text()
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[session]\n" + text if not text.lstrip().startswith("[session]") else text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    cfg = SessionConfig()
    types = {f.name: f.type for f in dataclasses.fields(SessionConfig)}
    for key, raw in parser.items("session"):
        if key not in types or key == "fuzzy_override":
            raise ConfigError(f"{path}: unknown key {key!r}")
        try:
            if key in _PATH_KEYS:
                value = Path(raw) if Path(raw).is_absolute() else path.parent / raw
            elif key in ("arousal_inverted", "fcm_calibrate"):
                value = parser.getboolean("session", key)
            elif key in ("motion_min_area", "seed"):
                value = int(raw)
            else:
                value = float(raw)
        except ValueError:
            raise ConfigError(f"{path}: bad value for {key}: {raw!r}") from None
        setattr(cfg, key, value)

    rest = configparser.ConfigParser(interpolation=None)
    rest.optionxform = str
    for sect in parser.sections():
        if sect != "session":
            rest[sect] = dict(parser.items(sect))
    buf = _stdio.StringIO()
    rest.write(buf)
    cfg.fuzzy_override = buf.getvalue()
    return cfg


@dataclass
class SessionResult:
    assessments: list[EpochAssessment]
    matrices: dict[str, ConfusionMatrix] = field(default_factory=dict)
    metrics: dict[str, SummaryMetrics] = field(default_factory=dict)
    written: list[Path] = field(default_factory=list)
    details: dict[int, dict] = field(default_factory=dict)


def eeg_stream(cfg: SessionConfig, fuzzy: FuzzyConfig) -> list[StreamEpoch]:
    rec = io.read_eeg_csv(cfg.eeg)
    windows = window_epochs(rec, cfg.epoch_seconds).windows
    feats = [affect_features(BandPowerSet.from_window(w), arousal_inverted=cfg.arousal_inverted) for w in windows]
    variables = {n: fuzzy.variable(n) for n in ("arousal", "valence", "dominance")}

    if cfg.fcm_calibrate:
        pts = np.array([f.as_vector() for f in feats if f.defined])
        try:
            model = fcm_fit(pts, k=3)
        except InputError as exc:
            log.warning("FCM calibration skipped: %s", exc)
        else:
            for col, name in enumerate(("arousal", "valence", "dominance")):
                variables[name] = calibrate_variable(variables[name], model.centers[:, col])

    table = fuzzy.table("eeg")
    out = []
    for w, f in zip(windows, feats):
        decision = classify_eeg(f, variables, table, fuzzy.variable(table.output))
        if decision is None:
            log.warning("EEG epoch %d skipped: undefined %s", w.epoch_index, ", ".join(f.undefined))
        extras = {k: (None if np.isnan(v) else round(float(v), 6))
                  for k, v in (("arousal", f.arousal), ("valence", f.valence), ("dominance", f.dominance))}
        out.append(StreamEpoch(w.start_s, w.end_s, decision, extras))
    return out


def _frame_motion(cfg: SessionConfig, assessments: list[EpochAssessment], grid: list[tuple[float, float]]):
    paths = sorted(Path(cfg.frames).glob("*.pgm"))
    frames = [io.read_pgm(p) for p in paths]
    results = motion_timeline(frames, sigma=cfg.motion_sigma, threshold=cfg.motion_threshold,
                              min_area=cfg.motion_min_area)
    times = [i / cfg.frame_rate for i in range(len(results))]
    out = []
    for a, (g0, g1) in zip(assessments, grid):
        moving = any(r.motion_present for r, t in zip(results, times) if g0 <= t < g1)
        out.append(dataclasses.replace(a, flags=a.flags | {"motion"}) if moving else a)
    return out


def run_session(cfg: SessionConfig) -> SessionResult:
    cfg.validate()
    fuzzy = cfg.fuzzy_config()
    variables = dict(fuzzy.variables)

    streams: dict[str, list[StreamEpoch] | None] = {"eeg": None, "blink": None, "objects": None}
    if cfg.eeg:
        streams["eeg"] = eeg_stream(cfg, fuzzy)
    if cfg.blink:
        table = fuzzy.table("blink")
        streams["blink"] = blink_epochs(io.read_blink_csv(cfg.blink), cfg.epoch_seconds,
                                        fuzzy.variable(table.inputs[0]), table, fuzzy.variable(table.output))
    if cfg.objects:
        table = fuzzy.table("distance")
        streams["objects"] = object_epochs(io.read_objects_csv(cfg.objects), cfg.epoch_seconds, table,
                                           fuzzy.variable(table.output), cfg.reaction_time_s,
                                           cfg.distance_softness)
    for name, stream in streams.items():
        if stream is None:
            log.warning("no %s stream configured; running degraded", name)

    synced = synchronize(streams["eeg"], streams["blink"], streams["objects"], cfg.epoch_seconds)
    assessments = [assess(e, fuzzy.tables, variables) for e in synced]
    if cfg.frames:
        assessments = _frame_motion(cfg, assessments, [(e.start_s, e.end_s) for e in synced])

    details = {}
    for e in synced:
        details[e.epoch_index] = {
            key: held.extras for key, held in (("eye", e.d_eye), ("eeg", e.d_eeg), ("mov", e.d_mov))
            if held is not None
        }
    result = SessionResult(assessments, details=details)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_timeline_csv(out / "timeline.csv", assessments)
    io.write_json(out / "timeline.json", timeline_document(assessments, details, cfg.epoch_seconds))
    result.written += [out / "timeline.csv", out / "timeline.json"]

    if cfg.labels:
        expert = {lb.epoch_index: lb.label for lb in io.read_labels_csv(cfg.labels)}
        result.matrices, result.metrics = evaluate(assessments, expert)
        result.written += write_evaluation(out, result.matrices, result.metrics)
    return result


def _decision(d: Decision | None):
    return None if d is None else d.to_dict()


def timeline_document(assessments: list[EpochAssessment], details: dict | None = None,
                      epoch_seconds: float = DEFAULT_EPOCH_S) -> dict:
    details = details or {}
    return {
        "epoch_seconds": epoch_seconds,
        "epochs": [
            {
                "epoch": a.epoch_index,
                "start_s": round(a.start_s, 6),
                **{name: _decision(getattr(a, name)) for name in SYSTEMS},
                "risk": a.risk,
                "flags": sorted(a.flags),
                "details": details.get(a.epoch_index, {}),
            }
            for a in assessments
        ],
    }


def evaluate(assessments: list[EpochAssessment], expert: dict) -> tuple[dict, dict]:
    """Confusion matrices of every detector stage against expert labels, by epoch index."""
    matrices, metrics = {}, {}
    for name in SYSTEMS:
        pairs = [(getattr(a, name).label, expert[a.epoch_index]) for a in assessments
                 if getattr(a, name) is not None and a.epoch_index in expert]
        labelled = sum(a.epoch_index in expert for a in assessments)
        if len(pairs) < labelled:
            log.info("%s: %d labelled epoch(s) without a decision left out", name, labelled - len(pairs))
        cm = confusion([p for p, _ in pairs], [e for _, e in pairs], name=name)
        matrices[name] = cm
        metrics[name] = summary_metrics(cm)
    return matrices, metrics


def write_evaluation(out: Path, matrices: dict, metrics: dict) -> list[Path]:
    blocks = []
    for name, cm in matrices.items():
        m = metrics[name]
        blocks.append(cm.render() + "\n" + format_summary(m))
    (out / "confusion.txt").write_text("\n\n".join(blocks) + "\n")
    io.write_json(out / "evaluation.json", {
        name: {"matrix": cm.to_dict(), "summary": metrics[name].to_dict()} for name, cm in matrices.items()
    })
    return [out / "confusion.txt", out / "evaluation.json"]
