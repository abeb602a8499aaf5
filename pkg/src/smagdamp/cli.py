"""Command-line entry point.

    smagdamp {run,sweep,bounds,damping-table,verify} [--config FILE] [--out DIR]
             [--seed N] [--deterministic]

Exit status: 0 on success, 1 when a check, a bound comparison or a solver
run fails, 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .exceptions import ConfigError, SmagdampError
from .experiments import MODES, default_config, load_config, run_experiment, with_overrides

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _seed(raw: str) -> int:
    value = int(raw, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smagdamp", description="Damped Smagorinsky shear-flow experiments.")
    parser.add_argument("command", choices=MODES)
    parser.add_argument("--config", help="INI-style experiment file")
    parser.add_argument("--out", help="output directory (overrides [output] directory)")
    parser.add_argument("--seed", type=_seed, help="seed for the initial perturbation")
    parser.add_argument("--deterministic", action="store_true",
                        help="fixed-order reductions and serial sweeps for byte-identical output")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else default_config(args.command)
        cfg = with_overrides(cfg, args.command, args.out, args.seed, args.deterministic)
        art = run_experiment(cfg)
    except ConfigError as exc:
        where = f"{args.config}: " if args.config else ""
        print(f"config error: {where}{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SmagdampError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    if art.summary:
        sys.stdout.write(art.summary)
    for path in art.files:
        print(f"wrote {path}")
    return EXIT_OK if art.ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
