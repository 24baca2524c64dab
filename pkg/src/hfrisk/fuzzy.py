"""Mamdani fuzzy inference over three-term (SMALL/MEDIUM/BIG) linguistic variables.

AND is ``min``, implication clips each consequent term, aggregation is ``max``
and the crisp value is the centroid of the aggregated surface.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np


class ConfigError(ValueError):
    """Malformed fuzzy variable, rule table or inference request."""


class Label(enum.IntEnum):
    SMALL = 0
    MEDIUM = 1
    BIG = 2

    @classmethod
    def parse(cls, text: str) -> "Label":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ConfigError(f"unknown label {text!r}") from None


LABELS = (Label.SMALL, Label.MEDIUM, Label.BIG)


@dataclass(frozen=True)
class MembershipFunction:
    """Triangular ``(a, b, c)`` or trapezoidal ``(a, b, c, d)`` membership function.

    Shoulders are expressed with repeated breakpoints, e.g. ``(0, 0, 0.2, 0.45)``.
    """

    shape: str
    breakpoints: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(p) for p in self.breakpoints)
        object.__setattr__(self, "breakpoints", pts)
        expected = {"triangular": 3, "trapezoidal": 4}.get(self.shape)
        if expected is None:
            raise ConfigError(f"unknown membership shape {self.shape!r}")
        if len(pts) != expected:
            raise ConfigError(f"{self.shape} needs {expected} breakpoints, got {len(pts)}")
        if not all(np.isfinite(pts)):
            raise ConfigError(f"non-finite breakpoint in {pts}")
        if any(b < a for a, b in zip(pts, pts[1:])):
            raise ConfigError(f"breakpoints must be non-decreasing: {pts}")

    @classmethod
    def triangular(cls, a: float, b: float, c: float) -> "MembershipFunction":
        return cls("triangular", (a, b, c))

    @classmethod
    def trapezoidal(cls, a: float, b: float, c: float, d: float) -> "MembershipFunction":
        return cls("trapezoidal", (a, b, c, d))

    @property
    def corners(self) -> tuple[float, float, float, float]:
        p = self.breakpoints
        return (p[0], p[1], p[1], p[2]) if len(p) == 3 else p  # type: ignore[return-value]

    @property
    def core(self) -> tuple[float, float]:
        _, b, c, _ = self.corners
        return b, c

    def __call__(self, x):
        return membership(self, x)


def membership(mf: MembershipFunction, x):
    """Degree of ``x`` in ``mf``; works on scalars and numpy arrays."""
    a, b, c, d = mf.corners
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):  # near-vertical edges overflow to inf, then clip
        rise = (x - a) / (b - a) if b > a else np.ones_like(x)
        fall = (d - x) / (d - c) if d > c else np.ones_like(x)
    deg = np.clip(np.minimum(rise, fall), 0.0, 1.0)
    deg = np.where((x < a) | (x > d), 0.0, deg)
    # vertical edges: the core endpoint itself belongs to the set
    deg = np.where((x >= b) & (x <= c), 1.0, deg)
    return float(deg) if deg.ndim == 0 else deg


@dataclass(frozen=True)
class LinguisticVariable:
    name: str
    universe: tuple[float, float]
    terms: tuple[tuple[Label, MembershipFunction], ...]

    def __post_init__(self):
        lo, hi = (float(v) for v in self.universe)
        if not hi > lo:
            raise ConfigError(f"{self.name}: empty universe [{lo}, {hi}]")
        object.__setattr__(self, "universe", (lo, hi))
        terms = tuple((Label(lbl), mf) for lbl, mf in self.terms)
        if tuple(lbl for lbl, _ in terms) != LABELS:
            raise ConfigError(f"{self.name}: terms must be exactly SMALL, MEDIUM, BIG in order")
        object.__setattr__(self, "terms", terms)
        self._check_coverage()

    def _check_coverage(self, samples: int = 2001) -> None:
        xs = np.linspace(*self.universe, samples)
        covered = np.zeros(samples, dtype=bool)
        for _, mf in self.terms:
            covered |= membership(mf, xs) > 0
        if not covered.all():
            gap = xs[~covered][0]
            raise ConfigError(f"{self.name}: no term covers x={gap:g}")

    @classmethod
    def from_partition(
        cls, name: str, universe: tuple[float, float], partition: Mapping[Label, MembershipFunction]
    ) -> "LinguisticVariable":
        return cls(name, universe, tuple((lbl, partition[lbl]) for lbl in LABELS))

    def term(self, label: Label) -> MembershipFunction:
        return self.terms[int(label)][1]

    def core_point(self, label: Label) -> float:
        """Midpoint of a term's core, clipped into the universe."""
        b, c = self.term(label).core
        return float(np.clip((b + c) / 2.0, *self.universe))

    def clamp(self, x: float) -> float:
        return float(np.clip(x, *self.universe))


def default_partition(lo: float = 0.0, hi: float = 1.0) -> dict[Label, MembershipFunction]:
    """Standard overlapping three-term partition, scaled onto ``[lo, hi]``."""
    s = lambda *u: tuple(lo + (hi - lo) * v for v in u)  # noqa: E731
    return {
        Label.SMALL: MembershipFunction("trapezoidal", s(0, 0, 0.2, 0.45)),
        Label.MEDIUM: MembershipFunction("triangular", s(0.25, 0.5, 0.75)),
        Label.BIG: MembershipFunction("trapezoidal", s(0.55, 0.8, 1, 1)),
    }


def fuzzify(var: LinguisticVariable, x: float) -> dict[Label, float]:
    x = var.clamp(x)
    return {lbl: float(membership(mf, x)) for lbl, mf in var.terms}


@dataclass(frozen=True)
class Rule:
    antecedent: tuple[Label | None, ...]  # None is a wildcard
    consequent: Label

    def matches(self, labels: Sequence[Label]) -> bool:
        return all(a is None or a == lbl for a, lbl in zip(self.antecedent, labels))


@dataclass(frozen=True)
class RuleTable:
    """Complete, conflict-free table of IF ... AND ... THEN rules."""

    name: str
    inputs: tuple[str, ...]
    output: str
    rules: tuple[Rule, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "rules", tuple(self.rules))
        if not 1 <= len(self.inputs) <= 3:
            raise ConfigError(f"{self.name}: 1-3 input variables required")
        index: dict[tuple[Label, ...], Rule] = {}
        for rule in self.rules:
            if len(rule.antecedent) != len(self.inputs):
                raise ConfigError(f"{self.name}: rule {rule} has wrong arity")
        for combo in itertools.product(LABELS, repeat=len(self.inputs)):
            hits = [r for r in self.rules if r.matches(combo)]
            names = " ".join(c.name for c in combo)
            if not hits:
                raise ConfigError(f"{self.name}: no rule covers {names}")
            if len(hits) > 1:
                raise ConfigError(f"{self.name}: {len(hits)} rules overlap on {names}")
            index[combo] = hits[0]
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_rows(
        cls, name: str, inputs: Sequence[str], output: str, rows: Iterable[tuple[Sequence[str], str]]
    ) -> "RuleTable":
        rules = []
        for ante, cons in rows:
            parsed = tuple(None if a.strip() == "*" else Label.parse(a) for a in ante)
            rules.append(Rule(parsed, Label.parse(cons)))
        return cls(name, tuple(inputs), output, tuple(rules))

    def consequent(self, *labels: Label) -> Label:
        return self._index[tuple(Label(x) for x in labels)].consequent


@dataclass(frozen=True)
class FuzzyOutput:
    variable: LinguisticVariable
    activations: Mapping[Label, float]

    @property
    def fired(self) -> bool:
        return any(v > 0 for v in self.activations.values())


def infer(rules: RuleTable, inputs: Mapping[str, Mapping[Label, float]],
          output_var: LinguisticVariable) -> FuzzyOutput:
    missing = [name for name in rules.inputs if name not in inputs]
    if missing:
        raise ConfigError(f"{rules.name}: missing input(s) {', '.join(missing)}")
    degrees = [inputs[name] for name in rules.inputs]
    act = {lbl: 0.0 for lbl in LABELS}
    for rule in rules.rules:
        strength = min(
            (1.0 if a is None else float(deg.get(a, 0.0)) for a, deg in zip(rule.antecedent, degrees)),
            default=1.0,
        )
        act[rule.consequent] = max(act[rule.consequent], strength)
    return FuzzyOutput(output_var, act)


class Crisp(NamedTuple):
    value: float
    no_activation: bool


def aggregate(out: FuzzyOutput, xs: np.ndarray) -> np.ndarray:
    surface = np.zeros_like(xs, dtype=float)
    for lbl, mf in out.variable.terms:
        level = out.activations.get(lbl, 0.0)
        if level > 0:
            surface = np.maximum(surface, np.minimum(level, membership(mf, xs)))
    return surface


def defuzzify_centroid(out: FuzzyOutput, resolution: int = 1001) -> Crisp:
    """Centroid of the clipped, max-aggregated output surface.

    The surface is sampled on ``resolution`` uniform points over the output
    universe and integrated with the trapezoid rule.  With no activation the
    universe midpoint is returned and ``no_activation`` is set.
    """
    if resolution < 100:
        raise ConfigError("resolution must be >= 100")
    lo, hi = out.variable.universe
    xs = np.linspace(lo, hi, resolution)
    mu = aggregate(out, xs)
    area = np.trapezoid(mu, xs)
    if area <= 0:
        return Crisp((lo + hi) / 2.0, True)
    return Crisp(float(np.trapezoid(mu * xs, xs) / area), False)


def label_of(out: FuzzyOutput) -> Label:
    """Label with the largest activation; ties go to the higher risk label.

    With no activation at all this returns ``Label.SMALL``.
    """
    if not out.fired:
        return Label.SMALL
    best = Label.SMALL
    for lbl in LABELS:
        if out.activations.get(lbl, 0.0) >= out.activations.get(best, 0.0):
            best = lbl
    return best


@dataclass(frozen=True)
class Decision:
    """Crisp value plus discrete label produced by one fuzzy decision stage."""

    value: float
    label: Label
    flags: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        return {"value": round(self.value, 6), "label": self.label.name, "flags": sorted(self.flags)}


def decide(rules: RuleTable, inputs: Mapping[str, Mapping[Label, float]],
           output_var: LinguisticVariable, resolution: int = 1001) -> Decision:
    out = infer(rules, inputs, output_var)
    crisp = defuzzify_centroid(out, resolution)
    flags = frozenset({"no_activation"}) if crisp.no_activation else frozenset()
    return Decision(crisp.value, label_of(out), flags)
