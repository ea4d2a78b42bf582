"""Experimental saturation-pressure datasets.

CSV schema (header required, `#` lines and blank lines ignored):

    T_K,z_CO2,kind,p_MPa
    323.15,0.2,bubble,15.3

`kind` is bubble or dew, case-insensitive.
"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from kij_bench.config import FlashSettings, SaturationSettings
from kij_bench.errors import InvalidInputError
from kij_bench.flash import Mixture
from kij_bench.mixing import GroupInteractionTable, build_kij_matrix, load_group_table
from kij_bench.saturation import envelope_sweep

logger = logging.getLogger(__name__)

HEADER = ("T_K", "z_CO2", "kind", "p_MPa")
KINDS = ("bubble", "dew")

# Records within this many kelvin belong to one isotherm
ISOTHERM_TOL = 0.01


@dataclass(frozen=True)
class ExperimentRecord:
    T: float
    z_CO2: float
    kind: str
    p_MPa: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.T) and self.T > 0):
            raise InvalidInputError(f"Temperature must be > 0 K, got {self.T}")
        if not 0.0 <= self.z_CO2 < 1.0:
            raise InvalidInputError(f"z_CO2 must lie in [0, 1), got {self.z_CO2}")
        if self.kind not in KINDS:
            raise InvalidInputError(f"Unknown kind '{self.kind}' (expected bubble or dew)")
        if not (math.isfinite(self.p_MPa) and self.p_MPa > 0):
            raise InvalidInputError(f"Pressure must be > 0 MPa, got {self.p_MPa}")


@dataclass(frozen=True)
class ExperimentalDataset:
    """Saturation measurements for one fluid, grouped by isotherm on access."""

    records: tuple[ExperimentRecord, ...]
    fluid: str = ""
    source: str = ""

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ExperimentRecord]:
        return iter(self.records)

    @property
    def isotherms(self) -> list[float]:
        temps: list[float] = []
        for r in sorted(self.records, key=lambda r: r.T):
            if not temps or r.T - temps[-1] > ISOTHERM_TOL:
                temps.append(r.T)
        return temps

    def at(self, T: float) -> tuple[ExperimentRecord, ...]:
        """Records on the isotherm T, ordered by z_CO2."""
        found = tuple(sorted((r for r in self.records if abs(r.T - T) <= ISOTHERM_TOL), key=lambda r: r.z_CO2))
        if not found:
            raise InvalidInputError(f"No experiments at {T} K (isotherms: {', '.join(f'{t:g}' for t in self.isotherms)})")
        return found


def _parse_float(text: str, column: str, line: int, path: Path) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InvalidInputError(f"Bad {column} value '{text}' on row {line} of {path}") from None
    if not math.isfinite(value):
        raise InvalidInputError(f"Non-finite {column} value on row {line} of {path}")
    return value


def load_experiments(file_path: str | Path, fluid: str = "") -> ExperimentalDataset:
    """Load experimental bubble/dew pressures from a CSV file.

    Args:
        file_path: CSV with header T_K,z_CO2,kind,p_MPa.
        fluid: Name of the fluid the data belongs to.

    Raises:
        FileNotFoundError: If file_path doesn't exist.
        InvalidInputError: On a bad header, malformed row, unknown kind,
            non-positive pressure (all with row numbers) or an empty result.
    """
    file_path = Path(file_path)
    if not file_path.exists():
        raise FileNotFoundError(f"Experiment file not found: {file_path}")

    records = []
    header_seen = False
    with open(file_path, newline="") as f:
        reader = csv.reader(f, skipinitialspace=True)
        for row in reader:
            line = reader.line_num
            cells = [c.strip() for c in row]
            if not cells or not any(cells) or cells[0].startswith("#"):
                continue
            if not header_seen:
                if tuple(cells) != HEADER:
                    raise InvalidInputError(f"Expected header {','.join(HEADER)} on row {line} of {file_path}")
                header_seen = True
                continue
            if len(cells) != len(HEADER):
                raise InvalidInputError(f"Expected {len(HEADER)} columns, got {len(cells)} on row {line} of {file_path}")

            T = _parse_float(cells[0], "T_K", line, file_path)
            z = _parse_float(cells[1], "z_CO2", line, file_path)
            kind = cells[2].lower()
            if kind not in KINDS:
                raise InvalidInputError(f"Unknown kind '{cells[2]}' on row {line} of {file_path}")
            p = _parse_float(cells[3], "p_MPa", line, file_path)
            if p <= 0.0:
                raise InvalidInputError(f"Non-positive pressure {p} on row {line} of {file_path}")
            try:
                records.append(ExperimentRecord(T=T, z_CO2=z, kind=kind, p_MPa=p))
            except InvalidInputError as e:
                raise InvalidInputError(f"{e} on row {line} of {file_path}") from None

    if not records:
        raise InvalidInputError(f"No experiments loaded from {file_path}")
    logger.debug("Loaded %d experiments from %s", len(records), file_path)
    return ExperimentalDataset(records=tuple(records), fluid=fluid, source=str(file_path))


def dump_experiments(dataset: ExperimentalDataset, file_path: str | Path) -> None:
    """Write a dataset in the CSV schema load_experiments reads."""
    with open(file_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HEADER)
        for r in dataset.records:
            writer.writerow([repr(r.T), repr(r.z_CO2), r.kind, repr(r.p_MPa)])


def synthesize_dataset(
    fluid: Mixture,
    temperatures: Sequence[float],
    co2_fractions: Sequence[float],
    k_star: float,
    noise_mpa: float = 0.0,
    seed: int = 0,
    table: GroupInteractionTable | None = None,
    pair: tuple[str, str] = ("CO2", "CH4"),
    settings: SaturationSettings | None = None,
    flash_settings: FlashSettings | None = None,
) -> ExperimentalDataset:
    """Model-generated saturation data at a known k, with seeded uniform noise.

    Points whose saturation solve fails are left out (with a warning).
    """
    if noise_mpa < 0:
        raise InvalidInputError(f"Noise amplitude must be >= 0, got {noise_mpa}")
    table = table or load_group_table()
    rng = np.random.default_rng(seed)
    records = []
    for T in temperatures:
        kij = build_kij_matrix(fluid, T, table, overrides=[(pair, k_star)])
        curve = envelope_sweep(fluid, co2_fractions, T, kij, "cold", settings, flash_settings)
        for point in curve.points:
            noise = float(rng.uniform(-noise_mpa, noise_mpa)) if noise_mpa > 0 else 0.0
            if not point.converged:
                logger.warning("Skipping synthetic point z_CO2=%.4f at %.2f K: %s", point.z_CO2, T, point.message)
                continue
            records.append(ExperimentRecord(T=float(T), z_CO2=point.z_CO2, kind=point.kind, p_MPa=point.p_MPa + noise))
    if not records:
        raise InvalidInputError("No synthetic point converged")
    return ExperimentalDataset(
        records=tuple(records),
        fluid=fluid.name,
        source=f"synthetic k*={k_star} noise={noise_mpa} MPa seed={seed}",
    )
