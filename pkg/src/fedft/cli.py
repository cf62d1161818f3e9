"""Command-line shell over :mod:`fedft.runner`.

    fedft generate --config cfg.json [--seed N] [--out FILE]
    fedft generate --preset mnist_like [--seed N] [--out FILE]
    fedft run --config cfg.json [--seed N] [--out DIR]
    fedft run --suite {paper,smoke} [--seed N] [--out DIR]
    fedft sweep --config cfg.json [--alphas 0,0.1,0.2] [--seed N] [--out DIR]

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import runner
from .errors import ConfigError

log = logging.getLogger("fedft")


def _alphas(text):
    try:
        return [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fedft", description="Frequency-space federated learning simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset as LEAF-style JSON")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="experiment config (its dataset section is used)")
    src.add_argument("--preset", help="dataset preset name, e.g. mnist_like or femnist_like(1)")
    g.add_argument("--scale", type=float, default=0.1, help="client-count scale for presets")
    g.add_argument("--seed", type=int, help="dataset seed")
    g.add_argument("--out", help="output file")

    r = sub.add_parser("run", help="run the configured experiments")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--config")
    src.add_argument("--suite", choices=["paper", "smoke"])
    r.add_argument("--seed", type=int, help="run a single seed instead of the configured list")
    r.add_argument("--out", help="output directory")

    s = sub.add_parser("sweep", help="FedFT runs over pruning rates plus a summary table")
    s.add_argument("--config", required=True)
    s.add_argument("--alphas", type=_alphas, help="comma-separated pruning rates")
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    return p


def _config(args) -> runner.ExperimentConfig:
    if getattr(args, "preset", None):
        doc = {"name": args.preset, "dataset": {"preset": args.preset, "scale": args.scale}}
        cfg = runner.parse_config(doc)
    else:
        cfg = runner.load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seeds"] = [args.seed]
        if args.command == "generate":
            changes["dataset"] = {"seed": args.seed}
    if args.out and args.command != "generate":
        changes["output_dir"] = args.out
    return cfg.with_overrides(**changes) if changes else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "run" and args.suite:
            seeds = [args.seed] if args.seed is not None else None
            paths = runner.run_suite(args.suite, args.out, seeds=seeds)
        else:
            cfg = _config(args)
            if args.command == "generate":
                paths = [runner.cmd_generate(cfg, args.out)]
            elif args.command == "run":
                paths = runner.cmd_run(cfg)
            else:
                runs, summaries = runner.cmd_sweep_alpha(cfg, args.alphas)
                paths = runs + summaries
    except ConfigError as exc:
        print(f"fedft: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures, including FederationError with its round
        print(f"fedft: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
