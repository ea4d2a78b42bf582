#!/usr/bin/env python3
"""kij-bench fit matrix.

Runs `kij-bench fit` for every fluid × isotherm × metric cell of a YAML
config. Each cell gets its own run directory (with run.json and
workbench.log) under a timestamped matrix directory that also holds a copy of
the config and matrix.log.

Usage:
    uv run scripts/run_fit_matrix.py configs/fit-matrix.example.yaml
    uv run scripts/run_fit_matrix.py configs/fit-matrix.example.yaml --dry-run
    uv run scripts/run_fit_matrix.py --resume runs/matrix/fit-matrix.example/2026-01-01T12-00-00

See configs/fit-matrix.example.yaml for the config format.
"""

import argparse
import json
import logging
import shutil
import sys
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import yaml

# src/ layout
sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from kij_bench import cli  # noqa: E402
from kij_bench.config import METHODS, METRIC_KINDS  # noqa: E402
from kij_bench.dataset import load_experiments  # noqa: E402
from kij_bench.runs import RUN_FILE  # noqa: E402

_REPO_ROOT = Path(__file__).resolve().parents[1]

# ── Logging setup ─────────────────────────────────────────────────────────────
# INFO → stdout (human-readable progress)
# DEBUG → matrix.log (full detail for debugging)

logger = logging.getLogger("kij_bench.matrix")


def _attach_handlers(log_path: Path | None) -> None:
    console = logging.StreamHandler(sys.stdout)
    console.setLevel(logging.INFO)
    console.setFormatter(logging.Formatter("%(message)s"))
    logger.setLevel(logging.DEBUG)
    logger.addHandler(console)
    logger.propagate = False
    if log_path is not None:
        fh = logging.FileHandler(log_path)
        fh.setLevel(logging.DEBUG)
        fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)-8s %(message)s"))
        logger.addHandler(fh)
        logger.debug("Matrix log: %s", log_path)


# ── Data model ────────────────────────────────────────────────────────────────


@dataclass
class FluidEntry:
    name: str
    fluid: str
    experiments: str
    isotherms: list[float] | None = None


@dataclass
class Cell:
    fluid: FluidEntry
    T: float
    metric: str

    @property
    def label(self) -> str:
        return f"{self.fluid.name}/{self.T:g}K/{self.metric}"

    @property
    def subdir(self) -> str:
        return f"{self.fluid.name}-{self.T:g}K-{self.metric}"


@dataclass
class CellResult:
    cell: Cell
    status: str  # "completed" | "partial" | "failed" | "skipped"
    exit_code: int | None = None
    k_opt: float | None = None
    cost_opt: float | None = None
    wall_time: float | None = None


# ── Config loading ────────────────────────────────────────────────────────────


def _load_config(path: Path) -> dict:
    with open(path) as f:
        cfg = yaml.safe_load(f) or {}

    missing = {"fluids", "metrics"} - set(cfg)
    if missing:
        sys.exit(f"Config error: missing required keys: {', '.join(sorted(missing))}")
    if not cfg.get("fluids"):
        sys.exit("Config error: fluids list is empty")
    if not cfg.get("metrics"):
        sys.exit("Config error: metrics list is empty")
    for metric in cfg["metrics"]:
        if metric not in METRIC_KINDS:
            sys.exit(f"Config error: unknown metric '{metric}' (expected one of {', '.join(METRIC_KINDS)})")
    if cfg.get("method", "grid") not in METHODS:
        sys.exit(f"Config error: method must be one of {', '.join(METHODS)}")
    return cfg


def _config_base(cfg_path: Path, cfg: dict) -> Path:
    """Directory that relative paths in the config resolve against."""
    base = cfg_path.resolve().parent
    if cfg.get("base_dir"):
        base = (base / cfg["base_dir"]).resolve()
    return base


def _save_config(cfg_path: Path, base: Path, run_dir: Path) -> Path:
    """Copy the config into the run dir with base_dir pinned so --resume resolves the same files."""
    raw = yaml.safe_load(cfg_path.read_text()) or {}
    raw["base_dir"] = str(base)
    saved = run_dir / cfg_path.name
    saved.write_text(yaml.safe_dump(raw, sort_keys=False))
    return saved


def _parse_fluids(cfg: dict, base: Path) -> list[FluidEntry]:
    fluids = []
    for f in cfg["fluids"]:
        for key in ("name", "fluid", "experiments"):
            if key not in f:
                sys.exit(f"Config error: fluid entry missing '{key}': {f}")
        fluids.append(
            FluidEntry(
                name=str(f["name"]),
                fluid=str((base / f["fluid"]).resolve()),
                experiments=str((base / f["experiments"]).resolve()),
                isotherms=[float(t) for t in f["isotherms"]] if f.get("isotherms") else None,
            )
        )
    return fluids


def _build_matrix(fluids: list[FluidEntry], metrics: list[str]) -> list[Cell]:
    """Ordered cells: fluids → isotherms → metrics."""
    matrix: list[Cell] = []
    for fluid in fluids:
        isotherms = fluid.isotherms
        if isotherms is None:
            try:
                isotherms = load_experiments(fluid.experiments).isotherms
            except (FileNotFoundError, ValueError) as e:
                sys.exit(f"Config error: {fluid.name}: {e}")
        for T in isotherms:
            for metric in metrics:
                matrix.append(Cell(fluid=fluid, T=T, metric=metric))
    return matrix


def _cell_argv(cell: Cell, cfg: dict, base: Path, out: Path) -> list[str]:
    argv = [
        "fit",
        "--fluid", cell.fluid.fluid,
        "--experiments", cell.fluid.experiments,
        "--temperature", repr(cell.T),
        "--metric", cell.metric,
        "--method", cfg.get("method", "grid"),
        "--strategy", cfg.get("strategy", "cold"),
        "--out", str(out),
    ]
    if cfg.get("workbench_config"):
        argv += ["--config", str((base / cfg["workbench_config"]).resolve())]
    if cfg.get("workers"):
        argv += ["--workers", str(cfg["workers"])]
    for override in cfg.get("kij", []) or []:
        argv += ["--kij", str(override)]
    return argv


def _read_cell(out: Path) -> tuple[str | None, float | None, float | None]:
    """(status, k_opt, cost_opt) from a finished cell directory."""
    record_path = out / RUN_FILE
    if not record_path.exists():
        return None, None, None
    record = json.loads(record_path.read_text())
    k_opt = cost_opt = None
    fit_path = out / "fit.json"
    if fit_path.exists():
        isotherms = json.loads(fit_path.read_text()).get("isotherms") or []
        if isotherms:
            k_opt, cost_opt = isotherms[0].get("k_opt"), isotherms[0].get("cost_opt")
    return record.get("status"), k_opt, cost_opt


# ── Summary display ───────────────────────────────────────────────────────────


def _print_run_plan(matrix: list[Cell], fluids: list[FluidEntry], cfg: dict, run_dir: Path) -> None:
    logger.info("=" * 60)
    logger.info("kij-bench fit matrix")
    logger.info("=" * 60)
    logger.info("Fluids:       %s", ", ".join(f.name for f in fluids))
    logger.info("Metrics:      %s", ", ".join(cfg["metrics"]))
    logger.info("Method:       %s", cfg.get("method", "grid"))
    logger.info("Strategy:     %s", cfg.get("strategy", "cold"))
    logger.info("Total cells:  %d", len(matrix))
    logger.info("Run dir:      %s/", run_dir)
    logger.info("=" * 60)


def _print_summary(results: list[CellResult], total_wall: float) -> None:
    by_status: dict[str, list[CellResult]] = {}
    for r in results:
        by_status.setdefault(r.status, []).append(r)

    logger.info("")
    logger.info("=" * 60)
    logger.info("Matrix Complete")
    logger.info("=" * 60)
    m, s = divmod(int(total_wall), 60)
    logger.info("Total wall time: %dm %02ds", m, s)
    logger.info(
        "Cells: %d completed, %d partial, %d failed, %d skipped",
        *(len(by_status.get(k, [])) for k in ("completed", "partial", "failed", "skipped")),
    )
    logger.info("")
    logger.info("  %-40s %8s %12s", "cell", "k_opt", "cost")
    for r in results:
        k = f"{r.k_opt:.3f}" if r.k_opt is not None else "-"
        c = f"{r.cost_opt:.4g}" if r.cost_opt is not None else "-"
        logger.info("  %-40s %8s %12s  %s", r.cell.label, k, c, r.status)
    logger.info("=" * 60)


# ── Main ──────────────────────────────────────────────────────────────────────


def main() -> None:
    parser = argparse.ArgumentParser(
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "config",
        metavar="CONFIG",
        nargs="?",
        help="Path to matrix config YAML (required unless --resume is given)",
    )
    parser.add_argument("--dry-run", action="store_true", help="Print the plan and exit without fitting")
    parser.add_argument(
        "--resume",
        metavar="RUN_DIR",
        help="Resume a previous matrix: path to its directory. Config is read from inside it.",
    )
    args = parser.parse_args()

    if args.resume and args.config:
        sys.exit("Cannot specify both CONFIG and --resume")
    if not args.resume and not args.config:
        sys.exit("Must specify CONFIG or --resume <run-dir>")

    if args.resume:
        run_dir = Path(args.resume).resolve()
        if not run_dir.is_dir():
            sys.exit(f"Resume directory not found: {run_dir}")
        yaml_files = sorted(run_dir.glob("*.yaml"))
        if not yaml_files:
            sys.exit(f"No config YAML found in resume directory: {run_dir}")
        cfg_path = yaml_files[0]
    else:
        cfg_path = Path(args.config).resolve()
        if not cfg_path.exists():
            sys.exit(f"Config file not found: {cfg_path}")

    cfg = _load_config(cfg_path)
    base = _config_base(cfg_path, cfg)
    fluids = _parse_fluids(cfg, base)
    matrix = _build_matrix(fluids, cfg["metrics"])

    if not args.resume:
        timestamp = datetime.now().strftime("%Y-%m-%dT%H-%M-%S")
        run_dir = _REPO_ROOT / cfg.get("log_dir", "runs") / "matrix" / cfg_path.stem / timestamp

    if args.dry_run:
        _attach_handlers(None)
    else:
        if not args.resume:
            run_dir.mkdir(parents=True, exist_ok=True)
            _save_config(cfg_path, base, run_dir)
        _attach_handlers(run_dir / "matrix.log")
        logger.debug("Config: %s", cfg_path)
        logger.debug("Matrix: %d cells", len(matrix))

    _print_run_plan(matrix, fluids, cfg, run_dir)

    if args.dry_run:
        logger.info("")
        logger.info("Dry run: nothing fitted.")
        for i, cell in enumerate(matrix, 1):
            logger.info("  [%d/%d] %s", i, len(matrix), cell.label)
            logger.debug("  ARGV: %s", " ".join(_cell_argv(cell, cfg, base, run_dir / cell.subdir)))
        return

    results: list[CellResult] = []
    total_start = time.monotonic()
    for i, cell in enumerate(matrix, 1):
        out = run_dir / cell.subdir
        logger.info("")
        logger.info("[%d/%d] %s", i, len(matrix), cell.label)

        if args.resume:
            status, k_opt, cost_opt = _read_cell(out)
            if status in ("completed", "partial"):
                logger.info("  Skipping, already %s", status)
                results.append(CellResult(cell=cell, status="skipped", k_opt=k_opt, cost_opt=cost_opt))
                continue
            if out.exists():
                shutil.rmtree(out)

        start = time.monotonic()
        code = cli.main(_cell_argv(cell, cfg, base, out))
        status, k_opt, cost_opt = _read_cell(out)
        results.append(
            CellResult(
                cell=cell,
                status=status or "failed",
                exit_code=code,
                k_opt=k_opt,
                cost_opt=cost_opt,
                wall_time=time.monotonic() - start,
            )
        )
        logger.info("  Done: exit %d | %.0fs", code, time.monotonic() - start)

    _print_summary(results, time.monotonic() - total_start)


if __name__ == "__main__":
    main()
