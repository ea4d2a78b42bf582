"""Artifact writers: delimited tables, JSON summaries and plot-data manifests.

Numbers are written with Python's shortest round-trip float repr, so the
output is locale-independent and bitwise reproducible. Columns always come
out in the order given.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from kij_bench.mixing import KijMatrix
from kij_bench.optimizer import CostEvaluation, OptimizationResult
from kij_bench.saturation import SaturationCurve
from kij_bench.scorers.metrics import METRICS, MetricReport, spider_values

METRIC_COLUMNS = tuple(METRICS)


def fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, float):
        return None if not math.isfinite(value) else value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return _jsonable(value.tolist())
    return value


def write_json(path: str | Path, data: Any) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), indent=2) + "\n")
    return path


# ── kij tables ────────────────────────────────────────────────────────────────

KIJ_HEADER = ("T_K", "component_i", "component_j", "kij", "provenance")


def kij_rows(matrix: KijMatrix) -> list[tuple]:
    return [
        (float(matrix.T), ni, nj, float(matrix.values[i, j]), matrix.provenance[i][j])
        for i, ni in enumerate(matrix.names)
        for j, nj in enumerate(matrix.names)
    ]


def format_kij_matrix(matrix: KijMatrix) -> list[str]:
    """Square text rendering for the console."""
    width = max(8, *(len(n) for n in matrix.names))
    lines = [f"T = {matrix.T:g} K", " " * width + "".join(f"{n:>{width + 2}}" for n in matrix.names)]
    for i, name in enumerate(matrix.names):
        cells = []
        for j in range(len(matrix.names)):
            mark = "*" if matrix.provenance[i][j] == "overridden" else " "
            cells.append(f"{matrix.values[i, j]:>{width + 1}.5f}{mark}")
        lines.append(f"{name:<{width}}" + "".join(cells))
    return lines


# ── Saturation curves ─────────────────────────────────────────────────────────

CURVE_HEADER = ("z_CO2", "kind", "p_MPa", "converged", "iterations", "kij", "provenance")


def curve_rows(curve: SaturationCurve, kij: KijMatrix, pair: tuple[str, str] = ("CO2", "CH4")) -> list[tuple]:
    k, source = kij.k(*pair), kij.source(*pair)
    return [(p.z_CO2, p.kind, p.p_MPa, p.converged, p.iterations, k, source) for p in curve.points]


def plot_manifest(title: str, x: tuple[str, str], y: tuple[str, str], series: list[dict]) -> dict:
    """Axes and series description for external plotting tools."""
    return {
        "title": title,
        "x": {"column": x[0], "unit": x[1]},
        "y": {"column": y[0], "unit": y[1]},
        "series": series,
    }


# ── Metrics and fits ──────────────────────────────────────────────────────────

METRIC_UNITS = {"mae": "MPa", "mse": "MPa^2", "rmse": "MPa", "rmsle": "-", "maxe": "MPa"}
METRIC_HEADER = ("metric", "value", "unit")
# column names carry the display scaling
SPIDER_HEADER = ("label", "mae", "mse_div10", "rmse", "rmsle_x10", "maxe")


def metric_rows(report: MetricReport) -> list[tuple]:
    return [(kind, getattr(report, kind), METRIC_UNITS[kind]) for kind in METRIC_COLUMNS]


def spider_rows(label: str, report: MetricReport) -> tuple:
    values = spider_values(report)
    return (label, *(values[kind] for kind in METRIC_COLUMNS))


def report_row(label: str, T: float, evaluation: CostEvaluation | None) -> tuple:
    if evaluation is None or evaluation.report is None:
        return (label, T, *([math.nan] * len(METRIC_COLUMNS)), 0)
    r = evaluation.report
    return (label, T, *(getattr(r, kind) for kind in METRIC_COLUMNS), len(evaluation.failures))


TABLE1_HEADER = ("method", "T_K", *METRIC_COLUMNS, "excluded")
TABLE3_HEADER = ("T_K", "kij_gc", "kij_opt", "method", "metric")
TRACE_HEADER = ("k", "cost", "excluded")


def trace_rows(result: OptimizationResult) -> list[tuple]:
    return [(e.k_value, e.cost, len(e.failures)) for e in result.trace]


def optimization_summary(result: OptimizationResult) -> dict:
    best = result.best
    return {
        "k_opt": result.k_opt,
        "cost_opt": result.cost_opt,
        "metric": best.metric_kind,
        "method": result.method,
        "stage": result.stage,
        "evaluation_count": result.evaluation_count,
        "fell_back": result.fell_back,
        "warnings": list(result.warnings),
        "metrics_at_k_opt": best.report.as_dict() if best.report else None,
        "excluded_points": [{"z_CO2": z, "kind": kind, "reason": why} for z, kind, why in best.failures],
        "trace": [{"k": e.k_value, "cost": e.cost, "excluded": len(e.failures)} for e in result.trace],
    }


def table2_rows(table1: list[tuple]) -> list[tuple]:
    """Per-method means of every metric over isotherms, in first-seen method order."""
    by_method: dict[str, list[tuple]] = {}
    for row in table1:
        by_method.setdefault(row[0], []).append(row)
    out = []
    for method, rows in by_method.items():
        means = []
        for col in range(2, 2 + len(METRIC_COLUMNS)):
            values = [r[col] for r in rows if math.isfinite(r[col])]
            means.append(math.fsum(values) / len(values) if values else math.nan)
        out.append((method, *means))
    return out
