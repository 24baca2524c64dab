"""``hfrisk`` command line: run, synth, eval, tables.

Exit codes: 0 ok, 1 input error, 2 config error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .eeg import InputError
from .evaluation import REFERENCE_HIERARCHICAL, format_summary, summary_metrics
from .fuzzy import ConfigError
from .pipeline import SYSTEMS, SessionConfig, evaluate, load_session_config, run_session, write_evaluation
from .rulesets import load_config, render_table
from .synth import SyntheticSessionSpec, generate_synthetic, parse_script

EXIT_OK, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("hfrisk")


def _session_config(args) -> SessionConfig:
    cfg = load_session_config(args.config) if args.config else SessionConfig()
    for key in ("eeg", "blink", "objects", "labels", "frames", "out", "rules"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, Path(value))
    if args.epoch_seconds is not None:
        cfg.epoch_seconds = args.epoch_seconds
    if args.arousal_inverted:
        cfg.arousal_inverted = True
    if args.fcm_calibrate:
        cfg.fcm_calibrate = True
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def cmd_run(args) -> int:
    cfg = _session_config(args)
    result = run_session(cfg)
    for a in result.assessments:
        df = "NA" if a.d_f is None else f"{a.d_f.label.name:<6} ({a.d_f.value:.3f})"
        print(f"epoch {a.epoch_index:>3}  t={a.start_s:8.1f}s  final={df}  {' '.join(sorted(a.flags))}")
    if "d_f" in result.metrics:
        print("final decision vs expert: " + format_summary(result.metrics["d_f"]))
    for path in result.written:
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        epochs = parse_script(args.script)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    spec = SyntheticSessionSpec(epochs, seed=args.seed or 0, epoch_s=args.epoch_seconds or 20.0)
    paths = generate_synthetic(spec, args.out)
    for name, path in paths.items():
        print(f"{name:8} {path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.reference:
        cm = REFERENCE_HIERARCHICAL
        print(cm.render())
        for problem in cm.inconsistencies():
            print(f"warning: {problem}")
        print(format_summary(summary_metrics(cm)))
        return EXIT_OK
    if not (args.timeline and args.labels):
        raise ConfigError("eval needs --timeline and --labels (or --reference)")
    assessments = io.read_timeline_csv(args.timeline)
    expert = {lb.epoch_index: lb.label for lb in io.read_labels_csv(args.labels)}
    matrices, metrics = evaluate(assessments, expert)
    for name in SYSTEMS:
        print(matrices[name].render())
        print(format_summary(metrics[name]))
        print()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_evaluation(out, matrices, metrics)
    return EXIT_OK


def cmd_tables(args) -> int:
    fuzzy = load_config(args.rules)
    for name, table in fuzzy.tables.items():
        print(render_table(table))
        print()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hfrisk", description="Hierarchical fuzzy driving-risk assessment")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay a recorded session through the full pipeline")
    run.add_argument("--eeg")
    run.add_argument("--blink")
    run.add_argument("--objects")
    run.add_argument("--labels")
    run.add_argument("--frames", help="directory of PGM frames (first frame is the background)")
    run.add_argument("--rules", help="fuzzy variable / rule table overrides")
    run.add_argument("--epoch-seconds", type=float)
    run.add_argument("--config")
    run.add_argument("--out")
    run.add_argument("--seed", type=int)
    run.add_argument("--invert-arousal", "--eq1-inverted", dest="arousal_inverted", action="store_true",
                     help="use beta/alpha for arousal")
    run.add_argument("--fcm-calibrate", action="store_true", help="re-anchor feature terms on FCM centers")
    run.set_defaults(func=cmd_run)

    synth = sub.add_parser("synth", help="write a seeded synthetic session")
    synth.add_argument("--script", default="demo",
                       help="preset (awake, drowsy-near, demo) or EEG:EYE:ROAD per epoch, e.g. S:S:S,B:B:B")
    synth.add_argument("--out", required=True)
    synth.add_argument("--seed", type=int)
    synth.add_argument("--epoch-seconds", type=float)
    synth.set_defaults(func=cmd_synth)

    ev = sub.add_parser("eval", help="confusion matrices of a timeline against expert labels")
    ev.add_argument("--timeline")
    ev.add_argument("--labels")
    ev.add_argument("--out")
    ev.add_argument("--reference", action="store_true", help="check the reference hierarchical matrix")
    ev.set_defaults(func=cmd_eval)

    tables = sub.add_parser("tables", help="print the rule tables")
    tables.add_argument("--rules")
    tables.set_defaults(func=cmd_tables)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
