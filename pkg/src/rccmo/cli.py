"""Command line entry point: ``run``, ``ref-front`` and ``compare``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys

from .core import ContractError
from .harness import ConfigError, ExperimentConfig, compare, read_results, run_experiment
from .problems import parse_problem_name, reference_front

EXIT_CONFIG = 2


def _cmd_run(args):
    cfg = ExperimentConfig.load(args.config)
    rows = run_experiment(cfg, out=args.out, threads=args.threads)
    print(f"{len(rows)} runs written")
    return 0


def _cmd_ref_front(args):
    variant, d = parse_problem_name(args.problem)
    front = reference_front(variant, args.resolution, d=d)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f1", "f2"])
        for f1, f2 in front:
            writer.writerow([repr(float(f1)), repr(float(f2))])
    print(f"{len(front)} reference points written to {args.out}")
    return 0


def _cmd_compare(args):
    rows = read_results(args.results)
    result = compare(rows, args.metric, args.alpha)
    for line in result.lines():
        print(line)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="rccmo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment matrix from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output directory (overrides config and $RCCMO_OUTPUT_DIR)")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("ref-front", help="write a grid-oracle reference front as CSV")
    p.add_argument("--problem", required=True, help="NAME[:d=INT], e.g. TRI1:d=15")
    p.add_argument("--resolution", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ref_front)

    p = sub.add_parser("compare", help="pairwise rank-sum comparison of a results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--metric", choices=("igd", "hv"), default="igd")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
