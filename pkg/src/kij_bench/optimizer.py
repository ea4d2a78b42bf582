"""Fitting k_CO2-CH4 to measured saturation pressures.

`cost` turns one candidate k into a metric value over an isotherm. Two
one-dimensional minimizers run on top of it:

- `two_stage_grid`: a coarse grid over [lower, upper] at coarse_step, then a
  fine grid at fine_step within refine_half_width of the coarse argmin.
  Candidates are enumerated as integer multiples of fine_step, so shared grid
  points are evaluated once.
- `golden_section_search`: bracket reduction for unimodal costs; falls back
  to the grid if an interior cost exceeds both bracket-edge costs.

Both accept any callable `k -> float | CostEvaluation`, which is how tests
inject stub costs.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from kij_bench.config import FitConfig, FlashSettings, SaturationSettings
from kij_bench.dataset import ExperimentalDataset
from kij_bench.errors import BracketError, CostUndefinedError, DegenerateStateError, InvalidInputError, NonConvergenceError
from kij_bench.flash import FlashResult, Mixture
from kij_bench.mixing import GroupInteractionTable, KijMatrix, Override, build_kij_matrix
from kij_bench.saturation import saturation_pressure, with_co2_loading
from kij_bench.scorers.metrics import MetricReport, PairedSeries, evaluate, score

logger = logging.getLogger(__name__)

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ModelSetup:
    """Model inputs shared by every cost evaluation of a fit."""

    fluid: Mixture
    table: GroupInteractionTable
    overrides: tuple[Override, ...] = ()
    metric: str = "mse"
    strategy: Literal["cold", "warm"] = "cold"
    pair: tuple[str, str] = ("CO2", "CH4")
    saturation: SaturationSettings = field(default_factory=SaturationSettings)
    flash: FlashSettings = field(default_factory=FlashSettings)

    def baseline(self, T: float) -> KijMatrix:
        """Group-contribution kij at T with the setup's fixed overrides."""
        return build_kij_matrix(self.fluid, T, self.table, self.overrides)

    def kij(self, k: float, T: float) -> KijMatrix:
        return self.baseline(T).with_overrides([(self.pair, k)])


@dataclass(frozen=True, eq=False)
class CostEvaluation:
    k_value: float
    metric_kind: str
    cost: float
    predicted: tuple[float, ...] = ()
    residuals: tuple[float, ...] = ()
    failures: tuple[tuple[float, str, str], ...] = ()
    report: MetricReport | None = None

    @property
    def defined(self) -> bool:
        return math.isfinite(self.cost)


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    k_opt: float
    cost_opt: float
    trace: tuple[CostEvaluation, ...]
    stage: Literal["coarse", "refined"]
    evaluation_count: int
    method: Literal["grid", "golden"] = "grid"
    warnings: tuple[str, ...] = ()
    fell_back: bool = False

    @property
    def best(self) -> CostEvaluation:
        return min(self.trace, key=lambda e: (e.cost, e.k_value))


Objective = Callable[[float], "float | CostEvaluation"]


def predict(
    kij: KijMatrix, data: ExperimentalDataset, T: float, setup: ModelSetup
) -> tuple[list[float], list[tuple[float, str, str]]]:
    """Model saturation pressures (MPa, NaN where failed) for every record at T."""
    predicted: list[float] = []
    failures: list[tuple[float, str, str]] = []
    previous: FlashResult | None = None
    for record in data.at(T):
        mix = with_co2_loading(setup.fluid, record.z_CO2)
        seed = previous if setup.strategy == "warm" else None
        try:
            point = saturation_pressure(mix, T, record.kind, kij, None, seed, setup.saturation, setup.flash)
        except (NonConvergenceError, DegenerateStateError, BracketError) as e:
            failures.append((record.z_CO2, record.kind, str(e)))
            predicted.append(math.nan)
            continue
        predicted.append(point.p_MPa)
        if point.edge is not None:
            previous = point.edge
    return predicted, failures


def cost(k: float, data: ExperimentalDataset, T: float, setup: ModelSetup) -> CostEvaluation:
    """Metric over the isotherm T with (CO2, CH4) set to k; failed points are excluded.

    Raises:
        CostUndefinedError: Every saturation point failed.
    """
    if not math.isfinite(k):
        raise InvalidInputError(f"Candidate k must be finite, got {k}")
    records = data.at(T)
    predicted, failures = predict(setup.kij(k, T), data, T, setup)

    ok = [i for i, p in enumerate(predicted) if math.isfinite(p)]
    if not ok:
        raise CostUndefinedError(f"All {len(records)} saturation points failed at k={k}, T={T} K", failures)
    if failures:
        logger.info("k=%.4f at %.2f K: %d of %d points excluded", k, T, len(failures), len(records))

    series = PairedSeries(
        np.array([predicted[i] for i in ok]),
        np.array([records[i].p_MPa for i in ok]),
        labels=tuple((records[i].T, records[i].z_CO2, records[i].kind) for i in ok),
    )
    value = score(setup.metric, series)
    logger.debug("cost(k=%.4f, T=%.2f K) %s=%.6g", k, T, setup.metric, value)
    return CostEvaluation(
        k_value=k,
        metric_kind=setup.metric,
        cost=value,
        predicted=tuple(predicted),
        residuals=tuple(float(r) for r in series.residuals),
        failures=tuple(failures),
        report=evaluate(series),
    )


def _evaluate(objective: Objective, k: float, metric: str) -> CostEvaluation:
    try:
        value = objective(k)
    except CostUndefinedError as e:
        logger.warning("Cost undefined at k=%.4f: %s", k, e)
        return CostEvaluation(k_value=k, metric_kind=metric, cost=math.inf, failures=tuple(e.failures))
    if isinstance(value, CostEvaluation):
        return value
    return CostEvaluation(k_value=k, metric_kind=metric, cost=float(value))


class _Evaluator:
    """Memoized objective over integer grid indices k = i / scale."""

    def __init__(self, objective: Objective, scale: int, metric: str, max_workers: int):
        self.objective = objective
        self.scale = scale
        self.metric = metric
        self.max_workers = max_workers
        self.cache: dict[int, CostEvaluation] = {}

    def run(self, indices: list[int]) -> None:
        pending = [i for i in dict.fromkeys(indices) if i not in self.cache]
        ks = [i / self.scale for i in pending]
        if self.max_workers > 1 and len(pending) > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                results = list(pool.map(lambda k: _evaluate(self.objective, k, self.metric), ks))
        else:
            results = [_evaluate(self.objective, k, self.metric) for k in ks]
        self.cache.update(zip(pending, results))

    def argmin(self, indices: list[int]) -> int:
        return min(indices, key=lambda i: (self.cache[i].cost, i))


def two_stage_grid(objective: Objective, fit: FitConfig | None = None) -> OptimizationResult:
    """Coarse grid then a fine grid around its argmin. Ties go to the smaller k."""
    fit = fit or FitConfig()
    scale = round(1.0 / fit.fine_step)
    stride = round(fit.coarse_step / fit.fine_step)
    half = round(fit.refine_half_width / fit.fine_step)
    lo_i, hi_i = round(fit.lower * scale), round(fit.upper * scale)

    coarse = list(range(lo_i, hi_i + 1, stride))
    if coarse[-1] != hi_i:
        coarse.append(hi_i)
    evaluator = _Evaluator(objective, scale, fit.metric, fit.max_workers)
    evaluator.run(coarse)
    centre = evaluator.argmin(coarse)
    if not math.isfinite(evaluator.cache[centre].cost):
        raise CostUndefinedError(
            "Cost undefined at every coarse candidate",
            [f for e in evaluator.cache.values() for f in e.failures],
        )

    warnings = []
    if centre in (lo_i, hi_i):
        msg = f"Coarse minimum at the search boundary k={centre / scale:g}; the true minimum may lie outside"
        logger.warning(msg)
        warnings.append(msg)

    fine = list(range(max(lo_i, centre - half), min(hi_i, centre + half) + 1))
    evaluator.run(fine)
    best = evaluator.argmin(coarse + fine)
    trace = tuple(evaluator.cache[i] for i in coarse) + tuple(evaluator.cache[i] for i in fine)
    logger.info(
        "Grid search: coarse argmin %.3f, refined argmin %.3f (cost %.6g, %d evaluations)",
        centre / scale, best / scale, evaluator.cache[best].cost, len(evaluator.cache),
    )
    return OptimizationResult(
        k_opt=best / scale,
        cost_opt=evaluator.cache[best].cost,
        trace=trace,
        stage="refined",
        evaluation_count=len(evaluator.cache),
        method="grid",
        warnings=tuple(warnings),
    )


def golden_section_search(
    objective: Objective,
    bracket: tuple[float, float] | None = None,
    tol: float | None = None,
    fit: FitConfig | None = None,
) -> OptimizationResult:
    """Golden-section reduction until the bracket is narrower than tol.

    Returns the best evaluated point. If an interior cost exceeds both edge
    costs the cost is not unimodal; the grid search then runs instead and the
    result is flagged with fell_back=True.
    """
    fit = fit or FitConfig(method="golden")
    a, b = bracket or (fit.lower, fit.upper)
    tol = tol if tol is not None else fit.golden_tol
    if not a < b:
        raise InvalidInputError(f"Bracket must satisfy lo < hi, got ({a}, {b})")
    if not tol > 0:
        raise InvalidInputError(f"Tolerance must be > 0, got {tol}")

    trace: list[CostEvaluation] = []

    def f(k: float) -> float:
        evaluation = _evaluate(objective, k, fit.metric)
        trace.append(evaluation)
        return evaluation.cost

    fa, fb = f(a), f(b)
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a >= tol:
        if max(fc, fd) > max(fa, fb):
            msg = f"Cost is not unimodal on [{a:g}, {b:g}]; falling back to grid search"
            logger.warning(msg)
            grid = two_stage_grid(objective, fit)
            return OptimizationResult(
                k_opt=grid.k_opt,
                cost_opt=grid.cost_opt,
                trace=tuple(trace) + grid.trace,
                stage=grid.stage,
                evaluation_count=len(trace) + grid.evaluation_count,
                method="golden",
                warnings=(msg, *grid.warnings),
                fell_back=True,
            )
        if fc <= fd:
            b, fb = d, fd
            d, fd = c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, fa = c, fc
            c, fc = d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)

    best = min(trace, key=lambda e: (e.cost, e.k_value))
    if not best.defined:
        raise CostUndefinedError("Cost undefined at every golden-section candidate")
    logger.info("Golden section: argmin %.4f (cost %.6g, %d evaluations)", best.k_value, best.cost, len(trace))
    return OptimizationResult(
        k_opt=best.k_value,
        cost_opt=best.cost,
        trace=tuple(trace),
        stage="refined",
        evaluation_count=len(trace),
        method="golden",
    )


def grid_search(data: ExperimentalDataset, T: float, setup: ModelSetup, fit: FitConfig | None = None) -> OptimizationResult:
    data.at(T)
    return two_stage_grid(lambda k: cost(k, data, T, setup), fit)


def golden_section(
    data: ExperimentalDataset,
    T: float,
    setup: ModelSetup,
    fit: FitConfig | None = None,
    bracket: tuple[float, float] | None = None,
    tol: float | None = None,
) -> OptimizationResult:
    data.at(T)
    return golden_section_search(lambda k: cost(k, data, T, setup), bracket, tol, fit)


def optimize(data: ExperimentalDataset, T: float, setup: ModelSetup, fit: FitConfig) -> OptimizationResult:
    """Dispatch on fit.method."""
    if fit.method == "golden":
        return golden_section(data, T, setup, fit)
    return grid_search(data, T, setup, fit)
