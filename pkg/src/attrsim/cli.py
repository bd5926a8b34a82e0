"""Command-line interface for running studies and ingesting datasets.

Flags override config-file values.  On failure the process prints one
machine-readable JSON error line to stderr and exits nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .dgp import export_dataset
from .experiments import (ConfigError, ExperimentConfig, IngestError, execute,
                          ingest_csv)
from .training import TrainingDivergedError

_COMMAND_STUDY = {
    "demo": "demo_sec3",
    "prep-study": "prep_study",
    "faithfulness": "faithfulness_study",
    "importance": "importance_study",
    "disagreement": "disagreement_matrix",
}


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="override base_seed")
    parser.add_argument("--reps", type=int, help="override repetitions")
    parser.add_argument("--workers", type=int, help="override worker count")
    parser.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attrsim",
        description="Feature-attribution simulation studies on dense networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _COMMAND_STUDY:
        p = sub.add_parser(command, help=f"run the {command} study")
        _add_common_flags(p)
        if command == "disagreement":
            p.add_argument("--data", help="user CSV to analyze instead of synthetic data")
            p.add_argument("--schema", help="JSON schema for --data")
    p = sub.add_parser("ingest", help="validate and convert a user CSV dataset")
    p.add_argument("csv", help="input CSV with header row")
    p.add_argument("--schema", required=True, help="JSON schema describing the columns")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _study_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    data["study"] = _COMMAND_STUDY[args.command]
    if args.seed is not None:
        data["base_seed"] = args.seed
    if args.reps is not None:
        data["repetitions"] = args.reps
    if args.workers is not None:
        data["workers"] = args.workers
    if args.out is not None:
        data["out_dir"] = args.out
    if getattr(args, "data", None):
        if not args.schema:
            raise ConfigError("--data requires --schema")
        data["data_csv"] = args.data
        data["data_schema"] = args.schema
    return ExperimentConfig.from_dict(data)


def _run_ingest(args) -> int:
    bundle = ingest_csv(args.csv, args.schema)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "dataset.csv")
    export_dataset(bundle, out_path)
    print(json.dumps({"rows": bundle.n, "features": bundle.p,
                      "output": out_path}))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "ingest":
            return _run_ingest(args)
        cfg = _study_config(args)
        report = execute(cfg)
    except (ConfigError, IngestError, TrainingDivergedError, FileNotFoundError,
            ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
              file=sys.stderr)
        return 2
    summary = {"study": report.study, "metric_rows": len(report.metric_rows),
               "wall_clock_s": round(report.wall_clock_s, 3)}
    if cfg.out_dir:
        summary["out_dir"] = cfg.out_dir
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
