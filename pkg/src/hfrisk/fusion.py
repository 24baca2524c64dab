"""Two-stage fusion: (eye, EEG) -> drowsiness, then (drowsiness, road) -> final risk."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .fuzzy import Decision, Label, LinguisticVariable, RuleTable, decide, fuzzify

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StreamEpoch:
    """One detector decision covering ``[start_s, end_s)``; ``None`` marks a skipped epoch."""

    start_s: float
    end_s: float
    decision: Decision | None
    extras: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class EpochInputs:
    epoch_index: int
    start_s: float
    end_s: float
    d_eye: StreamEpoch | None = None
    d_eeg: StreamEpoch | None = None
    d_mov: StreamEpoch | None = None


@dataclass(frozen=True)
class EpochAssessment:
    epoch_index: int
    start_s: float
    d_eye: Decision | None
    d_eeg: Decision | None
    d_mov: Decision | None
    d_1: Decision | None
    d_f: Decision | None
    flags: frozenset[str] = frozenset()

    @property
    def assessable(self) -> bool:
        return self.d_f is not None

    @property
    def risk(self) -> bool | None:
        """Two-class view: MEDIUM and BIG both count as risk."""
        return None if self.d_f is None else self.d_f.label >= Label.MEDIUM


def _fuse(a: Decision, b: Decision, table: RuleTable, var_a: LinguisticVariable,
          var_b: LinguisticVariable, output_var: LinguisticVariable) -> Decision:
    inputs = {table.inputs[0]: fuzzify(var_a, a.value), table.inputs[1]: fuzzify(var_b, b.value)}
    return decide(table, inputs, output_var)


def _degrade(survivor: Decision, flag: str) -> Decision:
    return Decision(survivor.value, survivor.label, survivor.flags | {flag})


def fuse_drowsiness(d_eye: Decision | None, d_eeg: Decision | None, table: RuleTable,
                    variables: dict[str, LinguisticVariable]) -> Decision | None:
    """Drowsiness decision from the blink and EEG decisions.

    A single surviving input passes through flagged ``degraded``; with both
    missing the result is ``None``.
    """
    if d_eye is None and d_eeg is None:
        return None
    if d_eye is None:
        return _degrade(d_eeg, "degraded")
    if d_eeg is None:
        return _degrade(d_eye, "degraded")
    return _fuse(d_eye, d_eeg, table, variables[table.inputs[0]], variables[table.inputs[1]],
                 variables[table.output])


def fuse_final(d_1: Decision | None, d_mov: Decision | None, table: RuleTable,
               variables: dict[str, LinguisticVariable]) -> Decision | None:
    """Final risk from the drowsiness and road decisions; a lone survivor passes through ``degraded``."""
    if d_1 is None:
        return None if d_mov is None else _degrade(d_mov, "degraded")
    if d_mov is None:
        return _degrade(d_1, "degraded")
    return _fuse(d_1, d_mov, table, variables[table.inputs[0]], variables[table.inputs[1]],
                 variables[table.output])


def _overlap(a0: float, a1: float, b0: float, b1: float) -> float:
    return max(0.0, min(a1, b1) - max(a0, b0))


def _span(stream: Sequence[StreamEpoch]) -> tuple[float, float] | None:
    if not stream:
        return None
    return min(e.start_s for e in stream), max(e.end_s for e in stream)


def _rank(ep: StreamEpoch) -> int:
    return -1 if ep.decision is None else int(ep.decision.label)


def synchronize(eeg: Sequence[StreamEpoch] | None, blink: Sequence[StreamEpoch] | None,
                motion: Sequence[StreamEpoch] | None, epoch_s: float = 20.0,
                origin: float | None = None) -> list[EpochInputs]:
    """Align detector epochs onto one grid.

    The grid follows the EEG epochs when present; otherwise it starts at the
    earliest stream and covers the union of all streams. A stream epoch is
    attached to the grid epoch holding at least half of its span (earliest such
    epoch on a tie); gaps stay missing.
    """
    streams = {"d_eeg": eeg or [], "d_eye": blink or [], "d_mov": motion or []}
    spans = {k: _span(v) for k, v in streams.items() if v}
    if not spans:
        log.warning("no detector produced any epoch")
        return []
    names = list(spans)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if _overlap(*spans[a], *spans[b]) <= 0:
                log.warning("streams %s and %s do not overlap in time; nothing to fuse", a, b)
                return []

    if streams["d_eeg"]:
        grid = [(e.start_s, e.end_s) for e in sorted(streams["d_eeg"], key=lambda e: e.start_s)]
    else:
        lo = origin if origin is not None else min(s[0] for s in spans.values())
        hi = max(s[1] for s in spans.values())
        count = max(1, int((hi - lo + 1e-9) // epoch_s))
        grid = [(lo + i * epoch_s, lo + (i + 1) * epoch_s) for i in range(count)]

    slots: list[dict[str, tuple[float, StreamEpoch]]] = [{} for _ in grid]
    for name, stream in streams.items():
        for ep in stream:
            span = ep.end_s - ep.start_s
            best, best_ov = None, 0.0
            for idx, (g0, g1) in enumerate(grid):
                ov = _overlap(ep.start_s, ep.end_s, g0, g1)
                if ov > best_ov + 1e-9:
                    best, best_ov = idx, ov
            if best is None or best_ov < 0.5 * span - 1e-9:
                continue
            held = slots[best].get(name)
            if held is None or best_ov > held[0] + 1e-9 or (
                    abs(best_ov - held[0]) <= 1e-9 and _rank(ep) > _rank(held[1])):
                slots[best][name] = (best_ov, ep)

    return [
        EpochInputs(i, g0, g1, **{name: held[1] for name, held in slot.items()})
        for i, ((g0, g1), slot) in enumerate(zip(grid, slots))
    ]


def assess(inputs: EpochInputs, tables: dict[str, RuleTable],
           variables: dict[str, LinguisticVariable]) -> EpochAssessment:
    d_eye = inputs.d_eye.decision if inputs.d_eye else None
    d_eeg = inputs.d_eeg.decision if inputs.d_eeg else None
    d_mov = inputs.d_mov.decision if inputs.d_mov else None
    flags = set()
    for name, held in (("d_eye", inputs.d_eye), ("d_eeg", inputs.d_eeg), ("d_mov", inputs.d_mov)):
        if held is None:
            flags.add(f"missing_{name}")
        elif held.decision is None:
            flags.add(f"skipped_{name}")
    d_1 = fuse_drowsiness(d_eye, d_eeg, tables["drowsiness"], variables)
    d_f = fuse_final(d_1, d_mov, tables["final"], variables)
    if d_f is None:
        flags.add("unassessable")
    elif "degraded" in d_f.flags or (d_1 is not None and "degraded" in d_1.flags):
        flags.add("degraded")
    return EpochAssessment(inputs.epoch_index, inputs.start_s, d_eye, d_eeg, d_mov, d_1, d_f, frozenset(flags))
