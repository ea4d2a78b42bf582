"""The five error metrics over paired predicted/actual pressures.

Each metric is a small function over the residual vector so the optimizer can
use any one of them as its cost; `evaluate` computes all five for reports.
RMSLE uses the natural logarithm. Values are in MPa (MPa^2 for MSE).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from kij_bench.errors import DomainError, InvalidInputError

logger = logging.getLogger(__name__)

UNIT = "MPa"

# Spider-chart rescaling so the five axes share a range
SPIDER_SCALE = {"mae": 1.0, "mse": 0.1, "rmse": 1.0, "rmsle": 10.0, "maxe": 1.0}


@dataclass(frozen=True, eq=False)
class PairedSeries:
    """Predicted and actual values, optionally labelled per point with (T, z_CO2, kind)."""

    predicted: np.ndarray
    actual: np.ndarray
    labels: tuple[tuple[float, float, str], ...] | None = None

    def __post_init__(self) -> None:
        p = np.array(self.predicted, dtype=float).ravel()
        a = np.array(self.actual, dtype=float).ravel()
        if p.size != a.size:
            raise InvalidInputError(f"Predicted and actual lengths differ ({p.size} vs {a.size})")
        if p.size == 0:
            raise InvalidInputError("A paired series needs at least one point")
        for label, values in (("predicted", p), ("actual", a)):
            bad = np.flatnonzero(~np.isfinite(values))
            if bad.size:
                raise InvalidInputError(f"Non-finite {label} value at index {int(bad[0])}")
        if self.labels is not None and len(self.labels) != p.size:
            raise InvalidInputError(f"{len(self.labels)} labels for {p.size} points")
        object.__setattr__(self, "predicted", p)
        object.__setattr__(self, "actual", a)

    def __len__(self) -> int:
        return int(self.predicted.size)

    @property
    def residuals(self) -> np.ndarray:
        return self.predicted - self.actual


@dataclass(frozen=True)
class MetricReport:
    mae: float
    mse: float
    rmse: float
    rmsle: float
    maxe: float
    n: int = 0
    unit: str = UNIT

    def get(self, kind: str) -> float:
        if kind not in METRICS:
            raise InvalidInputError(f"Unknown metric '{kind}'")
        return getattr(self, kind)

    def as_dict(self) -> dict[str, float]:
        return {kind: getattr(self, kind) for kind in METRICS}


def _mae(s: PairedSeries) -> float:
    return float(np.mean(np.abs(s.residuals)))


def _mse(s: PairedSeries) -> float:
    return float(np.mean(s.residuals**2))


def _rmse(s: PairedSeries) -> float:
    return math.sqrt(_mse(s))


def _check_log_domain(values: np.ndarray, label: str) -> None:
    bad = np.flatnonzero(values <= -1.0)
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"RMSLE needs {label} > -1; index {i} has {values[i]}")


def _rmsle(s: PairedSeries) -> float:
    _check_log_domain(s.predicted, "predicted")
    _check_log_domain(s.actual, "actual")
    return math.sqrt(float(np.mean((np.log1p(s.predicted) - np.log1p(s.actual)) ** 2)))


def _maxe(s: PairedSeries) -> float:
    return float(np.max(np.abs(s.residuals)))


METRICS: dict[str, Callable[[PairedSeries], float]] = {
    "mae": _mae,
    "mse": _mse,
    "rmse": _rmse,
    "rmsle": _rmsle,
    "maxe": _maxe,
}


def score(kind: str, s: PairedSeries) -> float:
    """A single metric, as used for the optimizer cost."""
    try:
        fn = METRICS[kind]
    except KeyError:
        raise InvalidInputError(f"Unknown metric '{kind}' (expected one of {', '.join(METRICS)})") from None
    return fn(s)


def evaluate(s: PairedSeries) -> MetricReport:
    values = {kind: fn(s) for kind, fn in METRICS.items()}
    return MetricReport(**values, n=len(s))


def spider_values(report: MetricReport) -> dict[str, float]:
    """Metric values rescaled for a five-axis spider chart (MSE / 10, RMSLE x 10)."""
    return {kind: getattr(report, kind) * SPIDER_SCALE[kind] for kind in METRICS}


def series_from(predicted: Sequence[float], actual: Sequence[float]) -> PairedSeries:
    return PairedSeries(np.asarray(predicted, dtype=float), np.asarray(actual, dtype=float))
