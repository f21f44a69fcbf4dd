"""Objective, constraint checks and benchmark metrics computed directly
from the dataset records' slot features (self-contained: the generator
package is not imported)."""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

REPORT_SCHEMA_VERSION = 1
TOL = 1e-9


def user_local_cost(flags, costs, u) -> float:
    """j_loc of a user, read off any of its real slots."""
    real = np.flatnonzero(flags[u] > 0)
    return float(costs[u, real[0], 0])


def solution_cost(flags, costs, x, y) -> float:
    """Weighted total cost; each non-offloading user pays its local
    cost once, offloaded tasks pay transmission plus scaled execution."""
    total = 0.0
    for u in range(flags.shape[0]):
        chosen = np.flatnonzero(x[u] > 0)
        if len(chosen) == 0:
            total += user_local_cost(flags, costs, u)
            continue
        for s in chosen:
            if y[u, s] <= 0:
                return math.inf
            total += float(costs[u, s, 1]) + float(costs[u, s, 2]) / y[u, s]
    return total


def solution_feasible(flags, mu, lam, x, y) -> bool:
    """C1-C5 over slot arrays."""
    U, S = flags.shape
    for u in range(U):
        chosen = np.flatnonzero(x[u] > 0)
        if len(chosen) > 1:
            return False
        if len(chosen) == 0:
            real = np.flatnonzero(flags[u] > 0)
            if lam[u, real[0]] != 1:
                return False
        for s in chosen:
            if flags[u, s] == 0 or mu[u, s] <= 0:
                return False
            if y[u, s] < mu[u, s] - TOL or y[u, s] > 1.0 + TOL:
                return False
    for s in range(S):
        if float((x[:, s] * y[:, s]).sum()) > 1.0 + TOL:
            return False
    if ((y < -TOL) | (y > 1.0 + TOL)).any():
        return False
    return True


def average_cost_ratio(predicted, reference) -> float:
    if not predicted or len(predicted) != len(reference):
        raise ValueError("need equal, nonempty prediction/reference lists")
    if any(r <= 0 for r in reference):
        raise ValueError("nonpositive reference cost")
    return sum(p / r for p, r in zip(predicted, reference)) / len(predicted)


def cost_accuracy_rate(predicted, reference, threshold=1.1) -> float:
    if not predicted or len(predicted) != len(reference):
        raise ValueError("need equal, nonempty prediction/reference lists")
    if any(r <= 0 for r in reference):
        raise ValueError("nonpositive reference cost")
    return sum(1 for p, r in zip(predicted, reference)
               if p / r < threshold) / len(predicted)


@dataclass
class BenchmarkReport:
    """Mirror of the generator package's machine report summary."""

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


def write_report(path: str, report: BenchmarkReport, lines):
    with open(path, "w", encoding="utf-8") as fh:
        for entry in lines:
            fh.write(json.dumps(entry, separators=(",", ":")) + "\n")
        fh.write(json.dumps({"kind": "summary", **asdict(report)},
                            separators=(",", ":")) + "\n")
