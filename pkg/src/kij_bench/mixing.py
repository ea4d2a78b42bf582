"""van der Waals one-fluid mixing rules and group-contribution kij(T).

kij(T) follows the PPR78 group-contribution form:

    kij = [-1/2 sum_k sum_l (a_ik - a_jk)(a_il - a_jl) A_kl (298.15/T)^(B_kl/A_kl - 1)
           - (sqrt(a_i)/b_i - sqrt(a_j)/b_j)^2] / [2 sqrt(a_i a_j) / (b_i b_j)]

with A_kl, B_kl stored in MPa and converted to Pa before combining with the
SI a_i, b_i of kij_bench.eos.
"""

import logging
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

from kij_bench._yaml import fail, load_document
from kij_bench.eos import Component, PureParams, pure_params
from kij_bench.errors import ConfigurationError, DomainError, InvalidInputError

if TYPE_CHECKING:
    from kij_bench.flash import Mixture

logger = logging.getLogger(__name__)

GC_REFERENCE_T = 298.15
MPA = 1e6

GC_PREDICTED = "gc-predicted"
OVERRIDDEN = "overridden"

DEFAULT_GROUP_TABLE = resources.files("kij_bench") / "data" / "ppr78_groups.yaml"

# Module-level cache for loaded group tables (keyed by absolute path)
_table_cache: dict[str, "GroupInteractionTable"] = {}

Override = tuple[tuple[str, str], float]


@dataclass(frozen=True, eq=False)
class GroupInteractionTable:
    """A_kl / B_kl group-pair parameters in MPa. Immutable after construction."""

    groups: tuple[str, ...]
    names: tuple[str, ...]
    A: np.ndarray
    B: np.ndarray
    version: str = ""
    source: str = ""

    def __post_init__(self) -> None:
        n = len(self.groups)
        if len(set(self.groups)) != n:
            raise ConfigurationError("Group ids must be unique")
        for label in ("A", "B"):
            m = np.array(getattr(self, label), dtype=float)
            if m.shape != (n, n):
                raise ConfigurationError(f"{label} must be {n}x{n}, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ConfigurationError(f"{label} has non-finite entries")
            if np.any(np.diag(m) != 0.0):
                raise ConfigurationError(f"{label} diagonal must be zero")
            if not np.array_equal(m, m.T):
                raise ConfigurationError(f"{label} must be symmetric")
            m.setflags(write=False)
            object.__setattr__(self, label, m)

    def index(self, group_id: str) -> int:
        try:
            return self.groups.index(group_id)
        except ValueError:
            raise ConfigurationError(f"Group '{group_id}' is not in the group interaction table") from None


def _square_from_upper(rows, n: int, key: str, path, node) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != max(n - 1, 0):
        fail(f"'{key}' must list {n - 1} upper-triangle rows", path, node, key)
    m = np.zeros((n, n))
    for k, row in enumerate(rows):
        expected = n - 1 - k
        if not isinstance(row, list) or len(row) != expected:
            fail(f"'{key}' row {k + 1} must list {expected} values", path, node, key, k)
        for offset, value in enumerate(row):
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                fail(f"'{key}' entry {value!r} is not a finite number", path, node, key, k, offset)
            l = k + 1 + offset
            m[k, l] = m[l, k] = float(value)
    return m


def load_group_table(path: str | Path | None = None) -> GroupInteractionTable:
    """Load a group interaction table (keys `groups`, `A_MPa`, `B_MPa`).

    Args:
        path: YAML file; defaults to the bundled PPR78 table.

    Raises:
        FileNotFoundError: If path doesn't exist.
        ParseError: On malformed YAML or a structurally invalid table.
    """
    path = Path(str(path if path is not None else DEFAULT_GROUP_TABLE))
    key = str(path.resolve())
    if key in _table_cache:
        return _table_cache[key]

    data, node = load_document(path)
    if not isinstance(data, dict):
        fail("Group table must be a mapping", path, node)
    missing = {"groups", "A_MPa", "B_MPa"} - set(data)
    if missing:
        fail(f"Missing keys {sorted(missing)}", path, node)

    groups, names = [], []
    for i, entry in enumerate(data["groups"] or []):
        if not isinstance(entry, dict) or "id" not in entry:
            fail("Each group needs an 'id'", path, node, "groups", i)
        groups.append(str(entry["id"]))
        names.append(str(entry.get("name", entry["id"])))
    if len(set(groups)) != len(groups):
        fail("Duplicate group id", path, node, "groups")

    n = len(groups)
    table = GroupInteractionTable(
        groups=tuple(groups),
        names=tuple(names),
        A=_square_from_upper(data["A_MPa"], n, "A_MPa", path, node),
        B=_square_from_upper(data["B_MPa"], n, "B_MPa", path, node),
        version=str(data.get("version", "")),
        source=str(data.get("source", "")),
    )
    logger.debug("Loaded group table %s (%d groups, version %s)", path, n, table.version or "?")
    _table_cache[key] = table
    return table


def clear_table_cache() -> None:
    """Clear the cached group tables (useful for testing)."""
    _table_cache.clear()


def group_fractions(c: Component, table: GroupInteractionTable) -> np.ndarray:
    """alpha_ik: fraction of molecule i occupied by each group of the table."""
    if not c.groups:
        raise ConfigurationError(f"Component '{c.name}' has no group decomposition")
    total = sum(count for _, count in c.groups)
    alpha = np.zeros(len(table.groups))
    for gid, count in c.groups:
        alpha[table.index(gid)] += count / total
    return alpha


def gc_kij(i: Component, j: Component, T: float, table: GroupInteractionTable) -> float:
    """Temperature-dependent binary interaction parameter by group contribution."""
    if not (math.isfinite(T) and T > 0):
        raise DomainError(f"Temperature must be > 0 K, got {T}")
    if i == j:
        return 0.0

    d = group_fractions(i, table) - group_fractions(j, table)
    active = np.flatnonzero(d)
    A = table.A[np.ix_(active, active)]
    B = table.B[np.ix_(active, active)]

    undefined = (A == 0.0) & (B != 0.0)
    if undefined.any():
        k, l = np.argwhere(undefined)[0]
        pair = (table.groups[active[k]], table.groups[active[l]])
        raise ConfigurationError(f"A_kl = 0 with B_kl != 0 for groups {pair}: exponent undefined")

    # pairs with A = B = 0 contribute nothing
    with np.errstate(divide="ignore", invalid="ignore"):
        exponent = np.where(A != 0.0, B / A - 1.0, 0.0)
    E = np.where(A != 0.0, np.exp(exponent * math.log(GC_REFERENCE_T / T)), 0.0)
    d_act = d[active]
    group_sum = float(d_act @ (A * MPA * E) @ d_act)

    pi, pj = pure_params(i, T), pure_params(j, T)
    di = math.sqrt(pi.a) / pi.b
    dj = math.sqrt(pj.a) / pj.b
    return (-0.5 * group_sum - (di - dj) ** 2) / (2.0 * di * dj)


@dataclass(frozen=True, eq=False)
class KijMatrix:
    """Binary interaction parameters at one temperature, with per-pair provenance."""

    names: tuple[str, ...]
    T: float
    values: np.ndarray
    provenance: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.shape != (len(self.names), len(self.names)):
            raise InvalidInputError(f"kij matrix shape {v.shape} does not match {len(self.names)} components")
        if np.any(np.diag(v) != 0.0) or not np.array_equal(v, v.T):
            raise InvalidInputError("kij matrix must be symmetric with a zero diagonal")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, names: Sequence[str], T: float) -> "KijMatrix":
        n = len(names)
        return cls(tuple(names), T, np.zeros((n, n)), tuple((GC_PREDICTED,) * n for _ in range(n)))

    def _index(self, name: str) -> int:
        for idx, candidate in enumerate(self.names):
            if candidate == name:
                return idx
        lowered = name.lower()
        for idx, candidate in enumerate(self.names):
            if candidate.lower() == lowered:
                return idx
        raise InvalidInputError(f"Component '{name}' is not in the mixture ({', '.join(self.names)})")

    def k(self, i: str, j: str) -> float:
        return float(self.values[self._index(i), self._index(j)])

    def source(self, i: str, j: str) -> str:
        return self.provenance[self._index(i)][self._index(j)]

    def with_overrides(self, overrides: Iterable[Override] | Mapping[tuple[str, str], float]) -> "KijMatrix":
        """New matrix with pairs substituted symmetrically; this matrix is untouched."""
        items = overrides.items() if isinstance(overrides, Mapping) else overrides
        values = self.values.copy()
        provenance = [list(row) for row in self.provenance]
        for (ni, nj), value in items:
            i, j = self._index(ni), self._index(nj)
            if i == j:
                raise InvalidInputError(f"Cannot override diagonal pair ({ni}, {nj})")
            if not math.isfinite(value):
                raise InvalidInputError(f"Override for ({ni}, {nj}) must be finite, got {value}")
            values[i, j] = values[j, i] = float(value)
            provenance[i][j] = provenance[j][i] = OVERRIDDEN
        return KijMatrix(self.names, self.T, values, tuple(tuple(row) for row in provenance))


def build_kij_matrix(
    mix: "Mixture",
    T: float,
    table: GroupInteractionTable,
    overrides: Iterable[Override] | Mapping[tuple[str, str], float] = (),
) -> KijMatrix:
    """gc_kij for every pair of the mixture, then overrides substituted symmetrically."""
    comps = mix.components
    n = len(comps)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = gc_kij(comps[i], comps[j], T, table)
    baseline = KijMatrix(
        names=tuple(c.name for c in comps),
        T=T,
        values=values,
        provenance=tuple((GC_PREDICTED,) * n for _ in range(n)),
    )
    return baseline.with_overrides(overrides)


@dataclass(frozen=True, eq=False)
class MixedParams:
    a: float
    b: float
    a_ij: np.ndarray
    b_i: np.ndarray


def cross_energy(pure: Sequence[PureParams], kij: KijMatrix) -> tuple[np.ndarray, np.ndarray]:
    """(a_ij, b_i): the composition-independent tables the fugacity routines need."""
    a_i = np.array([p.a for p in pure])
    if np.any(a_i < 0.0):
        raise DomainError(f"Energy parameters must be >= 0, got {a_i}")
    sq = np.sqrt(a_i)
    return np.outer(sq, sq) * (1.0 - kij.values), np.array([p.b for p in pure])


def vdw_mix(z: Sequence[float] | np.ndarray, pure: Sequence[PureParams], kij: KijMatrix) -> MixedParams:
    """Mixture a and b by the classical one-fluid rules, keeping the a_ij table."""
    z = np.asarray(z, dtype=float)
    if abs(z.sum() - 1.0) > 1e-12:
        raise InvalidInputError(f"Mole fractions must sum to 1, got {z.sum():.15g}")
    a_ij, b_i = cross_energy(pure, kij)
    return MixedParams(a=float(z @ a_ij @ z), b=float(z @ b_i), a_ij=a_ij, b_i=b_i)
