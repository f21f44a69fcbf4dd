"""Command-line interface.

Subcommands: ``generate`` (sample and label a dataset), ``evaluate``
(solve a dataset with one solver and score it) and ``inspect`` (schema
and statistics dump).  Exit codes: 0 success, 2 configuration error,
3 data error.  Set LAEMEC_LOG=DEBUG|INFO|WARNING to control verbosity.
"""

import argparse
import json
import logging
import os
import sys

from .harness import (DataError, MetricError, format_report_table,
                      inspect_dataset, run_evaluate, run_generate)
from .instance import GenerationError, RecordParseError, RecordVersionError
from .solve import SOLVER_NAMES, EnumerationCapError, SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laemec",
        description="Dataset generation and solver benchmarks for "
                    "low-altitude MEC task offloading")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample and label a dataset")
    gen.add_argument("--scale", required=True,
                     help="scenario scale tag, e.g. gs2_gu4_au2")
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--labeler", choices=("oracle", "mcmf"),
                     default="oracle")
    gen.add_argument("--out", required=True)

    ev = sub.add_parser("evaluate", help="run one solver over a dataset")
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--solver", choices=SOLVER_NAMES, required=True)
    ev.add_argument("--out", default=None)
    ev.add_argument("--threshold", type=float, default=1.1)
    ev.add_argument("--objective", choices=("per_user", "literal"),
                    default="per_user")
    ev.add_argument("--seed", type=int, default=0)

    ins = sub.add_parser("inspect", help="dataset schema and statistics")
    ins.add_argument("--dataset", required=True)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("LAEMEC_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            metadata = run_generate(args.scale, args.count, args.seed,
                                    args.labeler, args.out)
            print(f"wrote {metadata['count']} records "
                  f"({metadata['scale_tag']}, labeler {metadata['labeler']}) "
                  f"to {args.out}")
            return EXIT_OK
        if args.command == "evaluate":
            objective = ("literal_edge_sum" if args.objective == "literal"
                         else args.objective)
            report = run_evaluate(args.dataset, args.solver, args.out,
                                  threshold=args.threshold,
                                  objective=objective, seed=args.seed)
            print(format_report_table([report]), end="")
            return EXIT_OK
        if args.command == "inspect":
            print(json.dumps(inspect_dataset(args.dataset), indent=1,
                             default=str))
            return EXIT_OK
        parser.error(f"unknown command {args.command!r}")
    except (ValueError, EnumerationCapError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, MetricError, SolverError, RecordParseError,
            RecordVersionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
