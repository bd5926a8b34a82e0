"""Unit scheduling, deterministic CSV emission, and report assembly.

Repetitions are independent work units; with ``workers > 1`` they run in a
process pool.  Results are reduced in (cell, repetition) order, so metric
files are byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..dgp import DatasetBundle
from ..metrics import aggregate
from .config import ExperimentConfig
from .studies import UnitResult, cell_id, run_unit, study_cells

_SINGLE_UNIT_STUDIES = ("demo_sec3", "disagreement_matrix")

METRIC_HEADER = ["study", "cell", "repetition", "method", "feature", "group",
                 "metric", "value", "flag"]
AGGREGATE_HEADER = ["study", "cell", "method", "group", "metric", "mean", "sd",
                    "n", "n_degenerate"]
MODEL_FIT_HEADER = ["study", "cell", "repetition", "model", "r_squared",
                    "train_n", "eval_n", "epochs", "low_fit_flag"]


@dataclass
class ExperimentReport:
    study: str
    config: dict
    metric_rows: list = field(default_factory=list)
    aggregate_rows: list = field(default_factory=list)
    model_fit_rows: list = field(default_factory=list)
    payloads: list = field(default_factory=list)
    files: dict = field(default_factory=dict)
    wall_clock_s: float = 0.0


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))  # plain shortest round-trip, also for np.float64
    return str(value)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _unit_worker(cfg_dict: dict, cell: dict, cell_index: int, rep: int) -> UnitResult:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    return run_unit(cfg, cell, cell_index, rep)


def _execute_units(cfg: ExperimentConfig, cells: list[dict]) -> list[UnitResult]:
    reps = 1 if cfg.study in _SINGLE_UNIT_STUDIES else cfg.repetitions
    units = [(ci, rep) for ci in range(len(cells)) for rep in range(reps)]
    if cfg.workers <= 1 or len(units) <= 1:
        results = [run_unit(cfg, cells[ci], ci, rep) for ci, rep in units]
    else:
        cfg_dict = cfg.to_dict()
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_unit_worker, cfg_dict, cells[ci], ci, rep)
                       for ci, rep in units]
            results = [f.result() for f in futures]
    results.sort(key=lambda r: (r.cell_index, r.repetition))
    return results


def _collect(cfg: ExperimentConfig, results: list[UnitResult]) -> ExperimentReport:
    report = ExperimentReport(study=cfg.study, config=cfg.to_dict())
    for res in results:
        for row in res.metric_rows:
            report.metric_rows.append((cfg.study, res.cell_id, res.repetition) + row)
        for model, r2, train_n, eval_n, epochs in res.model_fit:
            flag = int(model == "nn" and r2 < cfg.r2_floor)
            report.model_fit_rows.append((cfg.study, res.cell_id, res.repetition,
                                          model, float(r2), train_n, eval_n,
                                          epochs, flag))
        if res.payload:
            report.payloads.append(res.payload)

    # aggregate metric values over repetitions and features per cell/method
    buckets: dict[tuple, list] = {}
    for row in report.metric_rows:
        _, cell, _, method, _, group, metric, value, flag = row
        buckets.setdefault((cell, method, group, metric), []).append((value, flag))
    for (cell, method, group, metric), pairs in sorted(buckets.items()):
        values = [v for v, _ in pairs]
        flags = [f for _, f in pairs]
        agg = aggregate(values, flags)
        report.aggregate_rows.append((cfg.study, cell, method, group, metric,
                                      agg.mean, agg.sd, agg.n, agg.n_degenerate))
    return report


def _write_outputs(cfg: ExperimentConfig, report: ExperimentReport) -> None:
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)

    def path(name):
        report.files[name] = os.path.join(out, name)
        return report.files[name]

    with open(path("config.json"), "w") as fh:
        json.dump(report.config, fh, indent=2, sort_keys=True)
    _write_csv(path("metrics.csv"), METRIC_HEADER, report.metric_rows)
    _write_csv(path("aggregates.csv"), AGGREGATE_HEADER, report.aggregate_rows)
    _write_csv(path("model_fit.csv"), MODEL_FIT_HEADER, report.model_fit_rows)

    if cfg.study == "demo_sec3" and report.payloads:
        from ..attribution.export import export_attribution

        payload = report.payloads[0]
        attr_dir = os.path.join(out, "attributions")
        os.makedirs(attr_dir, exist_ok=True)
        bar_rows = []
        for mid, attr in zip(payload["attributions"], payload["attribution_exports"]):
            export_attribution(attr, os.path.join(attr_dir, f"{mid}.csv"))
            report.files[f"attributions/{mid}.csv"] = os.path.join(attr_dir, f"{mid}.csv")
            agg = payload["attributions"][mid]
            i0 = payload["bar_instance"]
            for j in range(agg.shape[1]):
                bar_rows.append((mid, f"x{j + 1}", float(agg[i0, j])))
        _write_csv(path("instance_bar.csv"), ["method", "feature", "value"], bar_rows)

    if cfg.study == "disagreement_matrix" and report.payloads:
        payload = report.payloads[0]
        labels = payload["labels"]
        for name in ("feature_correlation", "kendall_tau", "rank_agreement"):
            matrix = payload[name]
            rows = [[labels[i]] + [float(matrix[i, j]) for j in range(len(labels))]
                    for i in range(len(labels))]
            _write_csv(path(f"{name}.csv"), ["method"] + labels, rows)

    pipelines = {p["pipeline"]["cell"]: p["pipeline"]["spec"]
                 for p in report.payloads if "pipeline" in p}
    summary = {
        "study": cfg.study,
        "config": report.config,
        "wall_clock_s": report.wall_clock_s,
        "files": report.files,
        "n_metric_rows": len(report.metric_rows),
        "model_fit": {
            "mean_r_squared_nn": _mean_r2(report.model_fit_rows, "nn"),
            "low_fit_runs": sum(r[-1] for r in report.model_fit_rows),
        },
        "pipelines": pipelines,
        "seed_provenance": {
            "base_seed": cfg.base_seed,
            "streams": "rng streams derive from (base_seed, stream_tag, "
                       "cell_or_dgp_key, repetition)",
        },
    }
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    report.files["report.json"] = os.path.join(out, "report.json")


def _mean_r2(model_fit_rows, model: str):
    vals = [r[4] for r in model_fit_rows if r[3] == model]
    return float(np.mean(vals)) if vals else None


def execute(cfg: ExperimentConfig, data: DatasetBundle | None = None) -> ExperimentReport:
    """Run a configured study end to end; write outputs if out_dir is set."""
    start = time.monotonic()
    if data is not None:
        if cfg.study != "disagreement_matrix":
            raise ValueError("direct data bundles are only used by the disagreement study")
        from .studies import _disagreement_unit
        results = [_disagreement_unit(cfg, data=data)]
    else:
        results = _execute_units(cfg, study_cells(cfg))
    report = _collect(cfg, results)
    report.wall_clock_s = time.monotonic() - start
    if cfg.out_dir:
        _write_outputs(cfg, report)
    return report


def _checked(cfg: ExperimentConfig, study: str) -> ExperimentConfig:
    if cfg.study != study:
        raise ValueError(f"config is for study {cfg.study!r}, expected {study!r}")
    return cfg


def run_demo_sec3(cfg: ExperimentConfig) -> ExperimentReport:
    return execute(_checked(cfg, "demo_sec3"))


def run_prep_study(cfg: ExperimentConfig) -> ExperimentReport:
    return execute(_checked(cfg, "prep_study"))


def run_faithfulness_study(cfg: ExperimentConfig) -> ExperimentReport:
    return execute(_checked(cfg, "faithfulness_study"))


def run_importance_study(cfg: ExperimentConfig) -> ExperimentReport:
    return execute(_checked(cfg, "importance_study"))


def run_disagreement_matrix(cfg: ExperimentConfig,
                            data: DatasetBundle | None = None) -> ExperimentReport:
    return execute(_checked(cfg, "disagreement_matrix"), data=data)
