"""Command line front end: ``bpt run``, ``bpt table1``, ``bpt validate``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .correlations import NumericalError
from .pipeline import ConfigError, load_config, run_scenario, run_table1

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _threads(value):
    if value is not None:
        return value
    env = os.environ.get("BPT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("BPT_THREADS", f"expected an integer, got {env!r}") from None
    return min(3, os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bpt", description=__doc__)
    p.add_argument("--threads", type=int, default=None,
                   help="max concurrent scenarios (default: $BPT_THREADS or min(3, cpus))")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)

    t1 = sub.add_parser("table1", help="run the three built-in scenarios and compare them")
    t1.add_argument("--out", required=True)
    t1.add_argument("--amplitude", type=float, default=0.1)
    t1.add_argument("--no-figure", action="store_true", help="skip the PNG comparison figure")

    val = sub.add_parser("validate", help="check a scenario config")
    val.add_argument("--config", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        threads = _threads(args.threads)
        if args.command == "validate":
            cfg = load_config(args.config)
            print(f"ok: {cfg.name} ({cfg.pump})")
        elif args.command == "run":
            manifest = run_scenario(load_config(args.config), args.out)
            print(json.dumps(manifest, indent=2))
        else:
            manifest = run_table1(args.out, threads=threads, amplitude=args.amplitude,
                                  figure=not args.no_figure)
            print(json.dumps(manifest["outputs"], indent=2))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
