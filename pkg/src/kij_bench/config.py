"""Run configuration: solver tolerances, saturation brackets, fit settings.

Defaults mirror the constants the modules document. A YAML config may set any
subset; CLI flags override both (see kij_bench.cli).

Units: the YAML file uses MPa / kPa as labelled; the dataclasses hold SI.
"""

import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from kij_bench._yaml import fail, load_document

logger = logging.getLogger(__name__)

METRIC_KINDS = ("mae", "mse", "rmse", "rmsle", "maxe")
METHODS = ("grid", "golden")
STRATEGIES = ("cold", "warm")


@dataclass(frozen=True)
class FlashSettings:
    stability_tol: float = 1e-10
    stability_max_iter: int = 500
    tpd_threshold: float = -1e-8
    # split loop polishes below the 1e-8 fugacity-equality contract
    fugacity_tol: float = 1e-10
    flash_max_iter: int = 2000
    trivial_tol: float = 1e-7


@dataclass(frozen=True)
class SaturationSettings:
    p_lo: float = 0.1e6
    p_hi: float = 40e6
    p_tol: float = 1e3
    scan_points: int = 40
    warm_window: float = 2e6


@dataclass(frozen=True)
class FitConfig:
    metric: str = "mse"
    method: str = "grid"
    lower: float = -0.2
    upper: float = 0.2
    coarse_step: float = 0.01
    fine_step: float = 0.001
    refine_half_width: float = 0.01
    golden_tol: float = 0.001
    strategy: str = "cold"
    max_workers: int = 1
    pair: tuple[str, str] = ("CO2", "CH4")

    def __post_init__(self) -> None:
        if self.metric not in METRIC_KINDS:
            raise ValueError(f"Unknown metric '{self.metric}' (expected one of {', '.join(METRIC_KINDS)})")
        if self.method not in METHODS:
            raise ValueError(f"Unknown method '{self.method}' (expected one of {', '.join(METHODS)})")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"Unknown strategy '{self.strategy}' (expected one of {', '.join(STRATEGIES)})")
        if not self.lower < self.upper:
            raise ValueError(f"Search bounds must satisfy lower < upper, got ({self.lower}, {self.upper})")
        if self.max_workers < 1:
            raise ValueError("max_workers must be >= 1")


@dataclass(frozen=True)
class ModelConfig:
    groups: str | None = None
    library: str | None = None
    overrides: tuple[tuple[tuple[str, str], float], ...] = ()


@dataclass(frozen=True)
class WorkbenchConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    flash: FlashSettings = field(default_factory=FlashSettings)
    saturation: SaturationSettings = field(default_factory=SaturationSettings)
    fit: FitConfig = field(default_factory=FitConfig)


def parse_override(text: str) -> tuple[tuple[str, str], float]:
    """Parse `CO2:CH4=0.105` into (("CO2", "CH4"), 0.105)."""
    pair, sep, value = text.partition("=")
    names = pair.split(":")
    if not sep or len(names) != 2 or not all(n.strip() for n in names):
        raise ValueError(f"kij override must look like NAME:NAME=VALUE, got '{text}'")
    try:
        k = float(value)
    except ValueError:
        raise ValueError(f"kij override value is not a number: '{value}'") from None
    return (names[0].strip(), names[1].strip()), k


def _section(data: dict, name: str, allowed: set[str], path: Path, node) -> dict:
    section = data.get(name) or {}
    if not isinstance(section, dict):
        fail(f"'{name}' must be a mapping", path, node, name)
    unknown = set(section) - allowed
    if unknown:
        fail(f"Unknown keys in '{name}': {', '.join(sorted(unknown))}", path, node, name)
    return section


def load_config(path: str | Path) -> WorkbenchConfig:
    """Load a workbench YAML config.

    Raises:
        FileNotFoundError: If path doesn't exist.
        ParseError: On malformed YAML, unknown keys or invalid values.
    """
    path = Path(path)
    data, node = load_document(path)
    if data is None:
        return WorkbenchConfig()
    if not isinstance(data, dict):
        fail("Config must be a mapping", path, node)
    unknown = set(data) - {"model", "flash", "saturation", "fit"}
    if unknown:
        fail(f"Unknown top-level keys: {', '.join(sorted(unknown))}", path, node)

    model_raw = _section(data, "model", {"groups", "library", "kij"}, path, node)
    try:
        overrides = tuple(parse_override(str(item)) for item in model_raw.get("kij", []) or [])
    except ValueError as e:
        fail(str(e), path, node, "model", "kij")
    model = ModelConfig(groups=model_raw.get("groups"), library=model_raw.get("library"), overrides=overrides)

    flash_raw = _section(data, "flash", {f.name for f in fields(FlashSettings)}, path, node)
    flash = replace(FlashSettings(), **flash_raw)

    sat_raw = _section(data, "saturation", {"bracket_MPa", "pressure_tol_kPa", "scan_points", "warm_window_MPa"}, path, node)
    sat_kwargs: dict[str, Any] = {}
    if "bracket_MPa" in sat_raw:
        lo, hi = sat_raw["bracket_MPa"]
        if not 0 < lo < hi:
            fail("bracket_MPa must satisfy 0 < lo < hi", path, node, "saturation", "bracket_MPa")
        sat_kwargs["p_lo"], sat_kwargs["p_hi"] = lo * 1e6, hi * 1e6
    if "pressure_tol_kPa" in sat_raw:
        sat_kwargs["p_tol"] = sat_raw["pressure_tol_kPa"] * 1e3
    if "scan_points" in sat_raw:
        sat_kwargs["scan_points"] = int(sat_raw["scan_points"])
    if "warm_window_MPa" in sat_raw:
        sat_kwargs["warm_window"] = sat_raw["warm_window_MPa"] * 1e6
    saturation = replace(SaturationSettings(), **sat_kwargs)

    fit_raw = _section(data, "fit", {f.name for f in fields(FitConfig)}, path, node)
    if "pair" in fit_raw:
        fit_raw = {**fit_raw, "pair": tuple(fit_raw["pair"])}
    try:
        fit = replace(FitConfig(), **fit_raw)
    except ValueError as e:
        fail(str(e), path, node, "fit")

    logger.debug("Loaded config %s", path)
    return WorkbenchConfig(model=model, flash=flash, saturation=saturation, fit=fit)
