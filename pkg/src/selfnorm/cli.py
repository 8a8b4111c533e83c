"""Command line entry point.

    selfnorm <experiment> [--config cfg.json] [--seed N] [--out DIR]

Exit codes: 0 on success, 1 when an experiment's statistical check fails,
2 on configuration errors.
"""

import argparse
import dataclasses
import json
import sys

from .harness import EXPERIMENTS, RUNNERS, ConfigError, ExperimentConfig


def build_parser():
    p = argparse.ArgumentParser(
        prog="selfnorm",
        description="Monte-Carlo experiments for self-normalized confidence radii.",
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="override the config output directory")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = ExperimentConfig.from_json(args.config)
            if cfg.experiment != args.experiment:
                cfg = dataclasses.replace(cfg, experiment=args.experiment)
        else:
            cfg = ExperimentConfig(experiment=args.experiment)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, output_dir=args.out)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    report = RUNNERS[cfg.experiment](cfg)
    print(json.dumps(report, indent=2, sort_keys=True, default=str))
    if report.get("pass", True):
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
