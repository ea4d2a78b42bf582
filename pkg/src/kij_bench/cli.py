"""kij-bench command line.

Usage:
    kij-bench kij --fluid oil.yaml --temperature 323.15 373.15 423.15
    kij-bench flash --fluid oil.yaml --temperature 300 --pressure 5
    kij-bench envelope --fluid oil.yaml --temperature 373.15 --z-range 0 0.6 13 --strategy warm
    kij-bench fit --fluid oil.yaml --experiments data.csv --method golden
    kij-bench metrics --predicted pred.txt --actual exp.txt
    kij-bench compare --fluid oil.yaml --experiments data.csv --adj-k 323.15=-0.07 373.15=-0.2 423.15=-0.25
    kij-bench synth --fluid oil.yaml --temperature 323.15 --z-range 0.05 0.5 10 --k-star 0.11
    kij-bench replay runs/fit/2026-01-01T12-00-00

Temperatures are in K and pressures in MPa. Each command writes its artifacts
plus run.json and workbench.log into --out (default runs/<command>/<timestamp>).

Exit codes: 0 success, 2 input error, 3 convergence failure, 4 partial results.
"""

import argparse
import logging
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from kij_bench import __version__
from kij_bench.config import METHODS, METRIC_KINDS, WorkbenchConfig, load_config, parse_override
from kij_bench.dataset import dump_experiments, load_experiments, synthesize_dataset
from kij_bench.errors import (
    BracketError,
    ConfigurationError,
    CostUndefinedError,
    DegenerateStateError,
    DomainError,
    InvalidInputError,
    NonConvergenceError,
)
from kij_bench.flash import Mixture, pt_flash
from kij_bench.fluid import load_component_library, load_fluid
from kij_bench.mixing import GroupInteractionTable, Override, build_kij_matrix, load_group_table
from kij_bench.optimizer import CostEvaluation, ModelSetup, cost, optimize
from kij_bench.report import (
    CURVE_HEADER,
    KIJ_HEADER,
    METRIC_HEADER,
    SPIDER_HEADER,
    TABLE1_HEADER,
    TABLE3_HEADER,
    TRACE_HEADER,
    curve_rows,
    format_kij_matrix,
    kij_rows,
    metric_rows,
    optimization_summary,
    plot_manifest,
    report_row,
    spider_rows,
    table2_rows,
    trace_rows,
    write_csv,
    write_json,
)
from kij_bench.runs import (
    LOG_FILE,
    RunRecord,
    file_digest,
    new_run_dir,
    now,
    output_digests,
    prepare_run_dir,
    replay,
    run_lock,
    write_record,
)
from kij_bench.saturation import envelope_sweep, strategy_discrepancies
from kij_bench.scorers.metrics import MetricReport, PairedSeries, evaluate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_PARTIAL = 4

RUNS_ROOT = Path("runs")
COMPARE_METHODS = ("ppr78", "adj", "ing", "opt")

_INPUT_ARGS = ("fluid", "experiments", "config", "groups", "library", "predicted", "actual")


# ── Logging setup ─────────────────────────────────────────────────────────────
# INFO → stdout (bare messages); DEBUG → <run-dir>/workbench.log

_package_logger = logging.getLogger("kij_bench")
_installed: list[logging.Handler] = []


def _configure_logging(verbose: bool) -> None:
    _remove_handlers()
    console = logging.StreamHandler(sys.stdout)
    console.setLevel(logging.DEBUG if verbose else logging.INFO)
    console.setFormatter(logging.Formatter("%(message)s"))
    _package_logger.setLevel(logging.DEBUG)
    _package_logger.addHandler(console)
    _installed.append(console)


def _add_file_handler(log_path: Path) -> None:
    fh = logging.FileHandler(log_path)
    fh.setLevel(logging.DEBUG)
    fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)-8s %(message)s"))
    _package_logger.addHandler(fh)
    _installed.append(fh)
    logger.debug("Workbench log: %s", log_path)


def _remove_handlers() -> None:
    while _installed:
        handler = _installed.pop()
        _package_logger.removeHandler(handler)
        handler.close()


# ── Shared context ────────────────────────────────────────────────────────────


@dataclass
class Context:
    args: argparse.Namespace
    config: WorkbenchConfig
    table: GroupInteractionTable
    overrides: tuple[Override, ...]
    run_dir: Path

    def fluid(self) -> Mixture:
        if not self.args.fluid:
            raise InvalidInputError("--fluid is required for this command")
        library_path = self.args.library or self.config.model.library
        return load_fluid(self.args.fluid, load_component_library(library_path), self.table)

    def setup(self, fluid: Mixture, **changes) -> ModelSetup:
        fit = self.config.fit
        base = ModelSetup(
            fluid=fluid,
            table=self.table,
            overrides=self.overrides,
            metric=fit.metric,
            strategy=fit.strategy,
            pair=fit.pair,
            saturation=self.config.saturation,
            flash=self.config.flash,
        )
        return replace(base, **changes)

    def out(self, name: str) -> Path:
        return self.run_dir / name


def _resolve_config(args: argparse.Namespace) -> WorkbenchConfig:
    cfg = load_config(args.config) if args.config else WorkbenchConfig()
    fit_changes = {}
    if args.metric:
        fit_changes["metric"] = args.metric
    if args.method:
        fit_changes["method"] = args.method
    if args.strategy:
        fit_changes["strategy"] = args.strategy
    if args.workers:
        fit_changes["max_workers"] = args.workers
    try:
        fit = replace(cfg.fit, **fit_changes)
    except ValueError as e:
        raise InvalidInputError(str(e)) from None
    return replace(cfg, fit=fit)


def _overrides(args: argparse.Namespace, cfg: WorkbenchConfig) -> tuple[Override, ...]:
    try:
        extra = tuple(parse_override(text) for text in args.kij or [])
    except ValueError as e:
        raise InvalidInputError(str(e)) from None
    return cfg.model.overrides + extra


def _z_grid(args: argparse.Namespace) -> list[float]:
    if args.z_co2:
        return [float(z) for z in args.z_co2]
    if args.z_range:
        start, stop, n = args.z_range
        count = int(n)
        if count < 1 or count != n:
            raise InvalidInputError(f"--z-range count must be a positive integer, got {n}")
        return [float(z) for z in np.linspace(start, stop, count)]
    raise InvalidInputError("Give CO2 loadings with --z-co2 or --z-range")


def _temperatures(args: argparse.Namespace) -> list[float]:
    if not args.temperature:
        raise InvalidInputError("--temperature is required for this command")
    return [float(t) for t in args.temperature]


def _adj_k_by_isotherm(values: list[str], temps: list[float]) -> dict[float, float]:
    """Map each isotherm to its 'adj' k from either one K or T=K pairs."""
    if len(values) == 1 and "=" not in values[0]:
        try:
            k = float(values[0])
        except ValueError:
            raise InvalidInputError(f"Bad --adj-k value '{values[0]}'") from None
        return {T: k for T in temps}

    pairs: dict[float, float] = {}
    for text in values:
        t_text, sep, k_text = text.partition("=")
        try:
            if not sep:
                raise ValueError
            pairs[float(t_text)] = float(k_text)
        except ValueError:
            raise InvalidInputError(f"--adj-k expects K or T=K pairs, got '{text}'") from None

    by_isotherm = {}
    for T in temps:
        match = [k for t, k in pairs.items() if abs(t - T) <= 0.01]
        if not match:
            raise InvalidInputError(f"--adj-k has no value for the {T:.2f} K isotherm")
        by_isotherm[T] = match[0]
    return by_isotherm


def _config_snapshot(config: WorkbenchConfig) -> dict:
    return asdict(config)


# ── Commands ──────────────────────────────────────────────────────────────────


def cmd_kij(ctx: Context) -> int:
    fluid = ctx.fluid()
    rows = []
    for T in _temperatures(ctx.args):
        matrix = build_kij_matrix(fluid, T, ctx.table, ctx.overrides)
        for line in format_kij_matrix(matrix):
            logger.info(line)
        logger.info("")
        rows.extend(kij_rows(matrix))
    write_csv(ctx.out("kij.csv"), KIJ_HEADER, rows)
    return EXIT_OK


def cmd_flash(ctx: Context) -> int:
    fluid = ctx.fluid()
    T = _temperatures(ctx.args)[0]
    if ctx.args.pressure is None:
        raise InvalidInputError("--pressure is required for flash")
    kij = build_kij_matrix(fluid, T, ctx.table, ctx.overrides)
    result = pt_flash(fluid, T, ctx.args.pressure * 1e6, kij, settings=ctx.config.flash)
    logger.info("%s at %.2f K, %.4g MPa: beta=%.6f", result.phase_label, T, ctx.args.pressure, result.beta)
    write_json(
        ctx.out("flash.json"),
        {
            "T_K": T,
            "p_MPa": ctx.args.pressure,
            "phase": result.phase_label,
            "phase_count": result.phase_count,
            "beta": result.beta,
            "components": list(fluid.names),
            "x": result.x,
            "y": result.y,
            "Z_liquid": result.Z_liquid,
            "Z_vapor": result.Z_vapor,
            "iterations": result.iterations,
            "stability_iterations": result.stability_iterations,
        },
    )
    return EXIT_OK


def cmd_envelope(ctx: Context) -> int:
    fluid = ctx.fluid()
    T = _temperatures(ctx.args)[0]
    fractions = _z_grid(ctx.args)
    fit = ctx.config.fit
    kij = build_kij_matrix(fluid, T, ctx.table, ctx.overrides)
    curve = envelope_sweep(
        fluid, fractions, T, kij, fit.strategy, ctx.config.saturation, ctx.config.flash, fit.max_workers
    )
    for p in curve.points:
        status = f"{p.p_MPa:10.4f} MPa" if p.converged else "    failed"
        logger.info("  z_CO2=%.4f  %-6s %s", p.z_CO2, p.kind, status)

    write_csv(ctx.out("curve.csv"), CURVE_HEADER, curve_rows(curve, kij, fit.pair))
    write_json(
        ctx.out("curve.json"),
        plot_manifest(
            f"{fluid.name} saturation pressure at {T:g} K",
            ("z_CO2", "-"),
            ("p_MPa", "MPa"),
            [{"name": f"T={T:g} K ({curve.strategy})", "file": "curve.csv", "kind_column": "kind"}],
        ),
    )
    summary = {
        "T_K": T,
        "strategy": curve.strategy,
        "points": len(curve.points),
        "failed": len(curve.failures),
        "total_iterations": curve.total_iterations,
        "kij": {"pair": list(fit.pair), "value": kij.k(*fit.pair), "provenance": kij.source(*fit.pair)},
    }
    if ctx.args.check_strategies:
        other = "cold" if curve.strategy == "warm" else "warm"
        twin = envelope_sweep(fluid, fractions, T, kij, other, ctx.config.saturation, ctx.config.flash)
        cold, warm = (curve, twin) if curve.strategy == "cold" else (twin, curve)
        diffs = strategy_discrepancies(cold, warm)
        summary["strategy_check"] = {
            "cold_iterations": cold.total_iterations,
            "warm_iterations": warm.total_iterations,
            "discrepancies": [{"z_CO2": z, "dp_kPa": dp / 1e3} for z, dp in diffs],
        }
    write_json(ctx.out("summary.json"), summary)

    if curve.points and len(curve.failures) == len(curve.points):
        logger.error("Every saturation point failed")
        return EXIT_CONVERGENCE
    return EXIT_PARTIAL if curve.failures else EXIT_OK


def _safe_cost(k: float, data, T: float, setup: ModelSetup) -> CostEvaluation | None:
    try:
        return cost(k, data, T, setup)
    except CostUndefinedError as e:
        logger.warning("Cost undefined at k=%.4f, T=%.2f K: %s", k, T, e)
        return None


def cmd_fit(ctx: Context) -> int:
    fluid = ctx.fluid()
    if not ctx.args.experiments:
        raise InvalidInputError("--experiments is required for fit")
    data = load_experiments(ctx.args.experiments, fluid=fluid.name)
    temps = [float(t) for t in ctx.args.temperature] if ctx.args.temperature else data.isotherms
    fit = ctx.config.fit
    setup = ctx.setup(fluid)

    table1, table3, summaries = [], [], []
    partial = False
    for T in temps:
        logger.info("")
        logger.info("Fitting k_%s-%s at %.2f K (%s, %s)", *fit.pair, T, fit.method, fit.metric)
        result = optimize(data, T, setup, fit)
        k_gc = setup.baseline(T).k(*fit.pair)
        at_gc = _safe_cost(k_gc, data, T, setup)
        best = result.best
        partial = partial or bool(best.failures)

        logger.info("  k_opt = %.4f  (%s = %.6g, %d evaluations)", result.k_opt, fit.metric, result.cost_opt, result.evaluation_count)
        logger.info("  k_gc  = %.4f  (%s = %s)", k_gc, fit.metric, f"{at_gc.cost:.6g}" if at_gc else "undefined")
        table1.append(report_row("ppr78", T, at_gc))
        table1.append(report_row("opt", T, best))
        table3.append((T, k_gc, result.k_opt, result.method, fit.metric))
        write_csv(ctx.out(f"trace_{T:g}K.csv"), TRACE_HEADER, trace_rows(result))
        summaries.append({"T_K": T, "k_gc": k_gc, **optimization_summary(result)})

    write_csv(ctx.out("table1.csv"), TABLE1_HEADER, table1)
    write_csv(ctx.out("table3.csv"), TABLE3_HEADER, table3)
    write_json(ctx.out("fit.json"), {"fluid": fluid.name, "pair": list(fit.pair), "isotherms": summaries})
    return EXIT_PARTIAL if partial else EXIT_OK


def _read_values(path: str) -> np.ndarray:
    values = []
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"Values file not found: {p}")
    for line_num, line in enumerate(p.read_text().splitlines(), 1):
        text = line.split("#", 1)[0].strip().rstrip(",")
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise InvalidInputError(f"Bad number '{text}' on line {line_num} of {p}") from None
    return np.array(values)


def cmd_metrics(ctx: Context) -> int:
    if not (ctx.args.predicted and ctx.args.actual):
        raise InvalidInputError("metrics needs --predicted and --actual")
    report = evaluate(PairedSeries(_read_values(ctx.args.predicted), _read_values(ctx.args.actual)))
    for kind, value, unit in metric_rows(report):
        logger.info("  %-6s %.6g %s", kind.upper(), value, unit)
    write_csv(ctx.out("metrics.csv"), METRIC_HEADER, metric_rows(report))
    write_csv(ctx.out("spider.csv"), SPIDER_HEADER, [spider_rows("series", report)])
    return EXIT_OK


def cmd_compare(ctx: Context) -> int:
    fluid = ctx.fluid()
    if not ctx.args.experiments:
        raise InvalidInputError("--experiments is required for compare")
    data = load_experiments(ctx.args.experiments, fluid=fluid.name)
    temps = [float(t) for t in ctx.args.temperature] if ctx.args.temperature else data.isotherms
    methods = ctx.args.methods or list(COMPARE_METHODS)
    unknown = set(methods) - set(COMPARE_METHODS)
    if unknown:
        raise InvalidInputError(f"Unknown compare methods {sorted(unknown)} (expected {', '.join(COMPARE_METHODS)})")
    adj_k = {}
    if "adj" in methods:
        if not ctx.args.adj_k:
            raise InvalidInputError("Method 'adj' needs --adj-k")
        adj_k = _adj_k_by_isotherm(ctx.args.adj_k, temps)

    fit = ctx.config.fit
    cold = ctx.setup(fluid, strategy="cold")
    warm = ctx.setup(fluid, strategy="warm")
    table1 = []
    partial = False
    for T in temps:
        k_gc = cold.baseline(T).k(*fit.pair)
        for method in methods:
            if method == "ppr78":
                evaluation = _safe_cost(k_gc, data, T, cold)
            elif method == "adj":
                evaluation = _safe_cost(adj_k[T], data, T, cold)
            elif method == "ing":
                evaluation = _safe_cost(k_gc, data, T, warm)
            else:
                evaluation = optimize(data, T, cold, fit).best
            partial = partial or evaluation is None or bool(evaluation.failures)
            row = report_row(method, T, evaluation)
            table1.append(row)
            logger.info("  %-6s %7.2f K  %s", method, T, "  ".join(f"{v:.4g}" for v in row[2:7]))

    table2 = table2_rows(table1)
    spider = [
        spider_rows(row[0], MetricReport(**dict(zip(("mae", "mse", "rmse", "rmsle", "maxe"), row[1:]))))
        for row in table2
    ]
    write_csv(ctx.out("table1.csv"), TABLE1_HEADER, table1)
    write_csv(ctx.out("table2.csv"), ("method", "mae", "mse", "rmse", "rmsle", "maxe"), table2)
    write_csv(ctx.out("spider.csv"), SPIDER_HEADER, spider)
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_synth(ctx: Context) -> int:
    fluid = ctx.fluid()
    if ctx.args.k_star is None:
        raise InvalidInputError("synth needs --k-star")
    data = synthesize_dataset(
        fluid,
        _temperatures(ctx.args),
        _z_grid(ctx.args),
        ctx.args.k_star,
        noise_mpa=ctx.args.noise,
        seed=ctx.args.seed,
        table=ctx.table,
        pair=ctx.config.fit.pair,
        settings=ctx.config.saturation,
        flash_settings=ctx.config.flash,
    )
    dump_experiments(data, ctx.out("experiments.csv"))
    logger.info("Wrote %d synthetic points (%s)", len(data), data.source)
    return EXIT_OK


COMMANDS: dict[str, Callable[[Context], int]] = {
    "kij": cmd_kij,
    "flash": cmd_flash,
    "envelope": cmd_envelope,
    "fit": cmd_fit,
    "metrics": cmd_metrics,
    "compare": cmd_compare,
    "synth": cmd_synth,
}


# ── Argument parsing ──────────────────────────────────────────────────────────


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fluid", metavar="FILE", help="Fluid definition YAML")
    common.add_argument("--groups", metavar="FILE", help="Group interaction table YAML (default: bundled PPR78)")
    common.add_argument("--library", metavar="FILE", help="Component library YAML (default: bundled)")
    common.add_argument("--config", metavar="FILE", help="Workbench config YAML")
    common.add_argument("--out", metavar="DIR", help="Run directory (default: runs/<command>/<timestamp>)")
    common.add_argument(
        "--kij", metavar="A:B=VALUE", action="append", help="Override one kij pair, e.g. CO2:CH4=0.105 (repeatable)"
    )
    common.add_argument("--metric", choices=METRIC_KINDS, help="Cost metric for fits (default mse)")
    common.add_argument("--method", choices=METHODS, help="Fit method (default grid)")
    common.add_argument("--strategy", choices=("cold", "warm"), help="Saturation sweep / cost strategy")
    common.add_argument("--workers", type=int, metavar="N", help="Concurrent cost or sweep evaluations")
    common.add_argument("--temperature", "-T", type=float, nargs="+", metavar="K", help="Temperature(s) in K")
    common.add_argument("--verbose", "-v", action="store_true", help="DEBUG output on the console")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kij-bench",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    sub.add_parser("kij", parents=[common], help="kij matrix per temperature")

    p = sub.add_parser("flash", parents=[common], help="PT flash of the fluid")
    p.add_argument("--pressure", "-P", type=float, metavar="MPA", help="Pressure in MPa")

    def z_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--z-co2", type=float, nargs="+", metavar="Z", help="CO2 loadings")
        p.add_argument("--z-range", type=float, nargs=3, metavar=("START", "STOP", "N"), help="Evenly spaced loadings")

    p = sub.add_parser("envelope", parents=[common], help="Saturation pressure vs. CO2 loading")
    z_options(p)
    p.add_argument("--check-strategies", action="store_true", help="Also run the other strategy and compare")

    p = sub.add_parser("fit", parents=[common], help="Fit k_CO2-CH4 to experiments")
    p.add_argument("--experiments", metavar="CSV", help="Experiment CSV (T_K,z_CO2,kind,p_MPa)")

    p = sub.add_parser("metrics", parents=[common], help="Five error metrics of paired value files")
    p.add_argument("--predicted", metavar="FILE", help="Predicted values, one per line (MPa)")
    p.add_argument("--actual", metavar="FILE", help="Actual values, one per line (MPa)")

    p = sub.add_parser("compare", parents=[common], help="Metric tables for several model variants")
    p.add_argument("--experiments", metavar="CSV", help="Experiment CSV")
    p.add_argument("--methods", nargs="+", metavar="M", help=f"Subset of {', '.join(COMPARE_METHODS)}")
    p.add_argument(
        "--adj-k", nargs="+", metavar="K|T=K",
        help="Fixed k_CO2-CH4 for the 'adj' variant, one value or one T=K pair per isotherm",
    )

    p = sub.add_parser("synth", parents=[common], help="Generate model data at a known k")
    z_options(p)
    p.add_argument("--k-star", type=float, metavar="K", help="Generating k_CO2-CH4")
    p.add_argument("--noise", type=float, default=0.0, metavar="MPA", help="Uniform noise half-width in MPa")
    p.add_argument("--seed", type=int, default=0, help="Noise seed")

    p = sub.add_parser("replay", help="Re-run a recorded run and compare artifacts")
    p.add_argument("run_dir", metavar="RUN_DIR")
    p.add_argument("--verbose", "-v", action="store_true")
    return parser


def _strip_out(argv: list[str]) -> list[str]:
    out, skip = [], False
    for arg in argv:
        if skip:
            skip = False
            continue
        if arg == "--out":
            skip = True
            continue
        if arg.startswith("--out="):
            continue
        out.append(arg)
    return out


def _run_command(args: argparse.Namespace, argv: list[str]) -> int:
    config = _resolve_config(args)
    run_dir = prepare_run_dir(args.out or new_run_dir(RUNS_ROOT, args.command))
    with run_lock(run_dir):
        _add_file_handler(run_dir / LOG_FILE)
        record = RunRecord(
            run_id=run_dir.name,
            command=args.command,
            argv=_strip_out(argv),
            config=_config_snapshot(config),
            inputs={
                str(Path(path).resolve()): file_digest(path)
                for name in _INPUT_ARGS
                if (path := getattr(args, name, None)) and Path(path).is_file()
            },
            started=now(),
        )
        write_record(run_dir, record)
        code = EXIT_INPUT
        try:
            ctx = Context(
                args=args,
                config=config,
                table=load_group_table(args.groups or config.model.groups),
                overrides=_overrides(args, config),
                run_dir=run_dir,
            )
            code = COMMANDS[args.command](ctx)
            return code
        except (NonConvergenceError, DegenerateStateError, CostUndefinedError):
            code = EXIT_CONVERGENCE
            raise
        finally:
            record.outputs = output_digests(run_dir)
            record.finished = now()
            record.exit_code = code
            record.status = {EXIT_OK: "completed", EXIT_PARTIAL: "partial"}.get(code, "failed")
            write_record(run_dir, record)
            logger.info("Run dir: %s", run_dir)


def _execute_nested(argv: list[str], verbose: bool) -> int:
    try:
        return main(argv)
    finally:
        _configure_logging(verbose)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        if args.command == "replay":
            mismatches = replay(args.run_dir, lambda recorded: _execute_nested(recorded, args.verbose))
            return EXIT_CONVERGENCE if mismatches else EXIT_OK
        return _run_command(args, argv)
    except (InvalidInputError, DomainError, ConfigurationError, BracketError, FileNotFoundError) as e:
        logger.error("error: %s", e)
        return EXIT_INPUT
    except (NonConvergenceError, DegenerateStateError, CostUndefinedError) as e:
        logger.error("convergence failure: %s", e)
        return EXIT_CONVERGENCE
    except ValueError as e:
        logger.error("error: %s", e)
        return EXIT_INPUT
    finally:
        _remove_handlers()


if __name__ == "__main__":
    sys.exit(main())
