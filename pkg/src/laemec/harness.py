"""Benchmark pipeline: dataset generation and labeling, solver
evaluation, and the two benchmark metrics (average cost ratio and cost
accuracy rate).

A dataset is a line-delimited file of serialized records plus a sidecar
``<path>.meta.json`` holding the generation config, master seed and the
frozen padding penalty maxima; the sidecar is sufficient to regenerate
the dataset bit-identically.
"""

import json
import logging
import math
import os
import time
from dataclasses import dataclass, field, asdict

from .instance import (DatasetRecord, GenerationError, RecordParseError,
                       RecordVersionError, SCHEMA_VERSION, SystemParams,
                       format_scale_tag, pad_edges, parse_scale_tag,
                       record_seed, sample_scenario, serialize_record,
                       deserialize_record)
from .solve import (EnumerationCapError, check_constraints,
                    evaluate_objective, get_solver)

log = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
LABELERS = ("oracle", "mcmf")


class MetricError(ValueError):
    """Reference costs unusable for ratio metrics."""


class DataError(RuntimeError):
    """Dataset file missing or entirely unreadable."""


def average_cost_ratio(predicted, reference) -> float:
    """Mean of predicted/reference cost over paired samples."""
    if len(predicted) != len(reference):
        raise MetricError("predicted and reference lengths differ")
    if len(predicted) == 0:
        raise MetricError("no samples")
    for r in reference:
        if r <= 0:
            raise MetricError(f"nonpositive reference cost {r}")
    return sum(p / r for p, r in zip(predicted, reference)) / len(predicted)


def cost_accuracy_rate(predicted, reference, threshold: float = 1.1) -> float:
    """Fraction of samples whose cost ratio is below ``threshold``."""
    if len(predicted) != len(reference):
        raise MetricError("predicted and reference lengths differ")
    if len(predicted) == 0:
        raise MetricError("no samples")
    for r in reference:
        if r <= 0:
            raise MetricError(f"nonpositive reference cost {r}")
    hits = sum(1 for p, r in zip(predicted, reference) if p / r < threshold)
    return hits / len(predicted)


@dataclass
class BenchmarkReport:
    dataset_tag: str
    solver: str
    count: int
    average_cost_ratio: float
    cost_accuracy_rate: float
    threshold: float
    objective: str
    eval_seed: int
    wall_time_total: float
    wall_time_mean: float
    skipped: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    schema_version: int = REPORT_SCHEMA_VERSION


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------


def _oracle_scale_guard(scale, cap: int = 20_000_000):
    n_gs, n_gu, n_au = scale
    worst = (n_gs + 2) ** (n_gu + n_au)
    if worst > cap:
        raise EnumerationCapError(
            f"scale {format_scale_tag(scale)} can reach {worst:.2e} "
            f"assignments (> cap {cap}); use --labeler mcmf")


def generate_records(scale, count: int, master_seed: int, labeler: str,
                     params: SystemParams = None) -> tuple:
    """Generate ``count`` labeled records; returns (records, metadata).

    Record i is a pure function of (master_seed, scale, i).  Padding
    penalties are the cost maxima over the whole batch and are frozen
    into the metadata so later padding matches.
    """
    if labeler not in LABELERS:
        raise ValueError(f"labeler must be one of {LABELERS}, got {labeler!r}")
    if isinstance(scale, str):
        scale = parse_scale_tag(scale)
    if labeler == "oracle":
        _oracle_scale_guard(scale)
    if params is None:
        params = SystemParams()
    solver = get_solver("oracle" if labeler == "oracle" else "mcmf")
    tag = format_scale_tag(scale)

    drafts = []
    penalty = [0.0, 0.0, 0.0]
    for i in range(count):
        rseed = record_seed(master_seed, i)
        inst = sample_scenario(scale, params, rseed)
        label = solver(inst)
        report = check_constraints(inst, label)
        if not report.passed:
            raise GenerationError(
                f"labeler {labeler} produced an infeasible label for "
                f"record {i}: {report.first_violation}")
        cost = evaluate_objective(inst, label)
        for e in inst.edges:
            penalty[0] = max(penalty[0], e.feature.j_loc)
            penalty[1] = max(penalty[1], e.feature.j_tr)
            penalty[2] = max(penalty[2], e.feature.j_exe)
        drafts.append((i, rseed, inst, label, cost))

    records = [DatasetRecord(tag, i, master_seed, rseed, inst,
                             label.x, label.y, cost, labeler,
                             padded=pad_edges(inst, tuple(penalty)))
               for i, rseed, inst, label, cost in drafts]
    metadata = {
        "schema_version": SCHEMA_VERSION,
        "scale_tag": tag,
        "count": count,
        "master_seed": master_seed,
        "labeler": labeler,
        "penalty": list(penalty),
        "params": params.to_dict(),
    }
    return records, metadata


def write_dataset(path: str, records, metadata: dict):
    """Write records (one line each) and the sidecar metadata file."""
    tmp = path + ".partial"
    try:
        with open(tmp, "wb") as fh:
            for record in records:
                fh.write(serialize_record(record))
                fh.write(b"\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(metadata, fh, sort_keys=True, indent=1)
        fh.write("\n")


def read_dataset(path: str):
    """Read a dataset file; returns (records, metadata, skipped).

    Unreadable lines are collected as (line_number, message) and
    skipped; the metadata is {} when the sidecar is missing.
    """
    if not os.path.exists(path):
        raise DataError(f"dataset file not found: {path}")
    records, skipped = [], []
    with open(path, "rb") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(deserialize_record(line))
            except (RecordParseError, RecordVersionError) as exc:
                skipped.append((lineno, str(exc)))
                log.warning("skipping line %d of %s: %s", lineno, path, exc)
    metadata = {}
    meta_path = path + ".meta.json"
    if os.path.exists(meta_path):
        with open(meta_path, "r", encoding="utf-8") as fh:
            metadata = json.load(fh)
    return records, metadata, skipped


def run_generate(scale, count: int, seed: int, labeler: str, out_path: str,
                 params: SystemParams = None) -> dict:
    """Generate, label and write a dataset; returns the metadata."""
    records, metadata = generate_records(scale, count, seed, labeler, params)
    write_dataset(out_path, records, metadata)
    log.info("wrote %d records to %s", len(records), out_path)
    return metadata


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def run_evaluate(dataset_path: str, solver_name: str, out_path: str = None,
                 threshold: float = 1.1, objective: str = "per_user",
                 seed: int = 0) -> BenchmarkReport:
    """Solve every record of a dataset and score it against the labels.

    Writes a machine-readable line-delimited report to ``out_path`` and
    a human-readable table to ``out_path + ".txt"`` when a path is
    given.  Per-record solver seeds derive from (seed, record index),
    so the numbers in the report are reproducible.
    """
    records, metadata, skipped = read_dataset(dataset_path)
    if not records:
        raise DataError(f"no readable records in {dataset_path}")
    solver = get_solver(solver_name)

    lines = []
    predicted, reference, times = [], [], []
    for record in records:
        t0 = time.perf_counter()
        solution = solver(record.instance,
                          seed=record_seed(seed, record.index))
        elapsed = time.perf_counter() - t0
        cost = evaluate_objective(record.instance, solution, objective)
        feasible = check_constraints(record.instance, solution).passed
        predicted.append(cost)
        reference.append(record.label_cost)
        times.append(elapsed)
        lines.append({"kind": "record", "index": record.index,
                      "solver_cost": cost, "label_cost": record.label_cost,
                      "ratio": cost / record.label_cost,
                      "feasible": feasible})

    report = BenchmarkReport(
        dataset_tag=metadata.get("scale_tag",
                                 records[0].scale_tag if records else "?"),
        solver=solver_name,
        count=len(records),
        average_cost_ratio=average_cost_ratio(predicted, reference),
        cost_accuracy_rate=cost_accuracy_rate(predicted, reference,
                                              threshold),
        threshold=threshold,
        objective=objective,
        eval_seed=seed,
        wall_time_total=sum(times),
        wall_time_mean=sum(times) / len(times),
        skipped=[list(s) for s in skipped],
        config={"dataset": metadata, "dataset_path": dataset_path},
    )
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            for entry in lines:
                fh.write(json.dumps(entry, separators=(",", ":")) + "\n")
            summary = {"kind": "summary", **asdict(report)}
            fh.write(json.dumps(summary, separators=(",", ":")) + "\n")
        with open(out_path + ".txt", "w", encoding="utf-8") as fh:
            fh.write(format_report_table([report]))
    return report


def format_report_table(reports) -> str:
    """Human-readable summary table for one or more reports."""
    header = (f"{'dataset':<18} {'solver':<8} {'count':>6} "
              f"{'avg ratio':>10} {'accuracy':>9} {'mean t[s]':>10} "
              f"{'skipped':>8}")
    rows = [header, "-" * len(header)]
    for r in reports:
        rows.append(f"{r.dataset_tag:<18} {r.solver:<8} {r.count:>6} "
                    f"{r.average_cost_ratio:>10.4f} "
                    f"{r.cost_accuracy_rate:>9.4f} "
                    f"{r.wall_time_mean:>10.4f} {len(r.skipped):>8}")
    return "\n".join(rows) + "\n"


def inspect_dataset(path: str) -> dict:
    """Schema and basic statistics of a dataset file."""
    records, metadata, skipped = read_dataset(path)
    if not records and not metadata:
        raise DataError(f"nothing readable at {path}")
    costs = [r.label_cost for r in records]
    edge_counts = [r.instance.n_edges for r in records]
    return {
        "path": path,
        "schema_version": SCHEMA_VERSION,
        "count": len(records),
        "skipped": len(skipped),
        "scale_tags": sorted({r.scale_tag for r in records}),
        "labelers": sorted({r.labeler for r in records}),
        "label_cost_min": min(costs) if costs else None,
        "label_cost_mean": sum(costs) / len(costs) if costs else None,
        "label_cost_max": max(costs) if costs else None,
        "edges_min": min(edge_counts) if edge_counts else None,
        "edges_max": max(edge_counts) if edge_counts else None,
        "metadata": metadata,
    }
