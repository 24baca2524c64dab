"""Loading linguistic variables and rule tables from the plain-text format.

The format is INI-style (see ``data/default_rules.cfg``); a user file is layered
over the bundled defaults section by section.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .fuzzy import LABELS, ConfigError, LinguisticVariable, MembershipFunction, RuleTable

_SHAPES = {"tri": "triangular", "triangular": "triangular", "trap": "trapezoidal", "trapezoidal": "trapezoidal"}
_RULE_META = {"inputs", "output"}


@dataclass(frozen=True)
class FuzzyConfig:
    variables: dict[str, LinguisticVariable] = field(default_factory=dict)
    tables: dict[str, RuleTable] = field(default_factory=dict)

    def variable(self, name: str) -> LinguisticVariable:
        try:
            return self.variables[name]
        except KeyError:
            raise ConfigError(f"undefined variable {name!r}") from None

    def table(self, name: str) -> RuleTable:
        try:
            return self.tables[name]
        except KeyError:
            raise ConfigError(f"undefined rule table {name!r}") from None


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#", ";"), inline_comment_prefixes=("#",),
        interpolation=None,
    )
    parser.optionxform = str  # keep label case and rule keys verbatim
    return parser


def parse_membership(text: str) -> MembershipFunction:
    parts = text.split()
    if not parts or parts[0].lower() not in _SHAPES:
        raise ConfigError(f"bad membership spec {text!r}")
    try:
        pts = tuple(float(p) for p in parts[1:])
    except ValueError:
        raise ConfigError(f"non-numeric breakpoint in {text!r}") from None
    return MembershipFunction(_SHAPES[parts[0].lower()], pts)


def _variable(name: str, section: configparser.SectionProxy) -> LinguisticVariable:
    try:
        lo, hi = (float(v) for v in section["universe"].split(","))
    except (KeyError, ValueError):
        raise ConfigError(f"variable {name}: universe must be 'LO, HI'") from None
    terms = []
    for lbl in LABELS:
        if lbl.name not in section:
            raise ConfigError(f"variable {name}: missing term {lbl.name}")
        terms.append((lbl, parse_membership(section[lbl.name])))
    return LinguisticVariable(name, (lo, hi), tuple(terms))


def _table(name: str, section: configparser.SectionProxy) -> RuleTable:
    if not _RULE_META <= set(section):
        raise ConfigError(f"rules {name}: 'inputs' and 'output' are required")
    inputs = [s.strip() for s in section["inputs"].split(",") if s.strip()]
    rows = [(key.split(), value) for key, value in section.items() if key not in _RULE_META]
    return RuleTable.from_rows(name, inputs, section["output"].strip(), rows)


def parse_config(*texts: str) -> FuzzyConfig:
    """Build a config from one or more texts; later texts replace whole sections."""
    merged = _parser()
    for text in texts:
        layer = _parser()
        try:
            layer.read_string(text)
        except configparser.Error as exc:
            # a duplicated rule row lands here as DuplicateOptionError
            raise ConfigError(str(exc)) from None
        for sect in layer.sections():
            if merged.has_section(sect):
                merged.remove_section(sect)
            merged.add_section(sect)
            for key, value in layer.items(sect):
                merged.set(sect, key, value)

    variables, tables = {}, {}
    for sect in merged.sections():
        kind, _, name = sect.partition(":")
        if kind == "variable":
            variables[name] = _variable(name, merged[sect])
        elif kind == "rules":
            tables[name] = _table(name, merged[sect])
        else:
            raise ConfigError(f"unknown section [{sect}]")
    return FuzzyConfig(variables, tables)


def default_text() -> str:
    return resources.files("hfrisk").joinpath("data/default_rules.cfg").read_text()


def load_config(path: str | Path | None = None) -> FuzzyConfig:
    """Bundled defaults, optionally overridden by the file at ``path``."""
    texts = [default_text()]
    if path is not None:
        texts.append(Path(path).read_text())
    return parse_config(*texts)


_DEFAULT: FuzzyConfig | None = None


def default_config() -> FuzzyConfig:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_config()
    return _DEFAULT


def render_table(table: RuleTable) -> str:
    """Human-readable rendering used by ``hfrisk tables``."""
    head = list(table.inputs) + [table.output]
    width = max(8, *(len(h) for h in head))
    lines = [f"[{table.name}]", "  ".join(h.upper().ljust(width) for h in head)]
    for rule in table.rules:
        cells = ["*" if a is None else a.name for a in rule.antecedent] + [rule.consequent.name]
        lines.append("  ".join(c.ljust(width) for c in cells))
    return "\n".join(lines)
