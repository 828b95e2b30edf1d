"""``hdosc <experiment> --config <path> [--seed N] [--backend ...] [--out ...] [--check]``.

Exit codes: 0 success, 2 config error, 3 numeric divergence,
4 acceptance-threshold failure with ``--check``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments
from .errors import ConfigError, DegeneratePhaseError, IntegrationDivergedError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdosc", description="Phase vs oscillator FHRR experiments.")
    parser.add_argument("experiment", choices=experiments.EXPERIMENTS)
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--seed", type=int, help="run a single seed instead of the configured list")
    parser.add_argument("--backend", choices=["phase", "osc", "both"])
    parser.add_argument("--out", help="output CSV path (sidecar files share its stem)")
    parser.add_argument("--check", action="store_true", help="exit 4 if any acceptance threshold fails")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = experiments.load_config(args.config, args.experiment)
        if args.seed is not None:
            cfg.seeds = [args.seed]
        if args.backend is not None:
            cfg.backend = args.backend
        experiments.validate(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out or cfg.out or f"results/{cfg.experiment}.csv")
    try:
        result = experiments.run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationDivergedError, DegeneratePhaseError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    for path in result.write(out):
        print(f"wrote {path}")
    for name, ok, _ in result.checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    if args.check and not result.passed:
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
