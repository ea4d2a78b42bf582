"""Fluid files and the component library.

A fluid file lists components either by library reference (`ref: CH4`, with
any constant overridable) or in full (`name`, `Tc_K`, `Pc_MPa`, `omega`,
`groups`), each with a mole `fraction`:

    name: synthetic-oil
    source: "lab notebook 12"
    components:
      - {ref: CH4, fraction: 0.45}
      - {ref: nC10, fraction: 0.45, omega: 0.49}
      - {ref: CO2, fraction: 0.10}

Fractions summing to 1 within 1e-10 are taken as is; otherwise they are
renormalized with a warning up to 1e-3; anything further off is rejected.
"""

import logging
import math
from importlib import resources
from pathlib import Path

import yaml

from kij_bench._yaml import fail, load_document
from kij_bench.eos import Component
from kij_bench.errors import ConfigurationError, InvalidInputError
from kij_bench.flash import Mixture
from kij_bench.mixing import GroupInteractionTable

logger = logging.getLogger(__name__)

DEFAULT_LIBRARY = resources.files("kij_bench") / "data" / "components.yaml"

EXACT_SUM_TOL = 1e-10
RENORMALIZE_TOL = 1e-3

# Module-level cache for loaded libraries (keyed by absolute path)
_library_cache: dict[str, dict[str, Component]] = {}

_CONSTANT_KEYS = ("Tc_K", "Pc_MPa", "omega")
_ENTRY_KEYS = {"ref", "name", "fraction", "groups", "source", *_CONSTANT_KEYS}


def _number(value, path, node, *keys) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        fail(f"Expected a finite number, got {value!r}", path, node, *keys)
    return float(value)


def _groups(raw, path, node, *keys) -> tuple[tuple[str, int], ...]:
    if not isinstance(raw, dict) or not raw:
        fail("'groups' must map group ids to occurrence counts", path, node, *keys)
    out = []
    for gid, count in raw.items():
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            fail(f"Group '{gid}' count must be a positive integer, got {count!r}", path, node, *keys, gid)
        out.append((str(gid), count))
    return tuple(out)


def load_component_library(path: str | Path | None = None) -> dict[str, Component]:
    """Load a component library keyed by lower-cased name.

    Raises:
        FileNotFoundError: If path doesn't exist.
        ParseError: On malformed YAML or an invalid entry (with line/column).
    """
    path = Path(str(path if path is not None else DEFAULT_LIBRARY))
    key = str(path.resolve())
    if key in _library_cache:
        return _library_cache[key]

    data, node = load_document(path)
    if not isinstance(data, dict) or not isinstance(data.get("components"), list):
        fail("Library must have a 'components' list", path, node)

    library: dict[str, Component] = {}
    for i, entry in enumerate(data["components"]):
        if not isinstance(entry, dict):
            fail("Library entry must be a mapping", path, node, "components", i)
        missing = {"name", *_CONSTANT_KEYS, "groups", "source"} - set(entry)
        if missing:
            fail(f"Library entry missing {sorted(missing)}", path, node, "components", i)
        name = str(entry["name"])
        if name.lower() in library:
            fail(f"Duplicate library component '{name}'", path, node, "components", i, "name")
        try:
            library[name.lower()] = Component(
                name=name,
                Tc=_number(entry["Tc_K"], path, node, "components", i, "Tc_K"),
                Pc=_number(entry["Pc_MPa"], path, node, "components", i, "Pc_MPa") * 1e6,
                omega=_number(entry["omega"], path, node, "components", i, "omega"),
                groups=_groups(entry["groups"], path, node, "components", i, "groups"),
                source=str(entry["source"]),
            )
        except InvalidInputError as e:
            fail(str(e), path, node, "components", i)

    logger.debug("Loaded component library %s (%d components)", path, len(library))
    _library_cache[key] = library
    return library


def clear_library_cache() -> None:
    """Clear the cached libraries (useful for testing)."""
    _library_cache.clear()


def _component(entry: dict, library: dict[str, Component], path, node, i: int) -> Component:
    keys = ("components", i)
    unknown = set(entry) - _ENTRY_KEYS
    if unknown:
        fail(f"Unknown keys {sorted(unknown)}", path, node, *keys, sorted(unknown)[0])

    if "ref" in entry:
        ref = str(entry["ref"])
        base = library.get(ref.lower())
        if base is None:
            fail(f"Unknown library component '{ref}'", path, node, *keys, "ref")
        fields = {"name": str(entry.get("name", base.name)), "Tc": base.Tc, "Pc": base.Pc, "omega": base.omega,
                  "groups": base.groups, "source": base.source}
    else:
        missing = {"name", *_CONSTANT_KEYS, "groups"} - set(entry)
        if missing:
            fail(f"Component needs 'ref' or all of {sorted(missing)}", path, node, *keys)
        fields = {"name": str(entry["name"]), "source": str(entry.get("source", ""))}

    if "Tc_K" in entry:
        fields["Tc"] = _number(entry["Tc_K"], path, node, *keys, "Tc_K")
    if "Pc_MPa" in entry:
        fields["Pc"] = _number(entry["Pc_MPa"], path, node, *keys, "Pc_MPa") * 1e6
    if "omega" in entry:
        fields["omega"] = _number(entry["omega"], path, node, *keys, "omega")
    if "groups" in entry:
        fields["groups"] = _groups(entry["groups"], path, node, *keys, "groups")
    if "source" in entry:
        fields["source"] = str(entry["source"])
    try:
        return Component(**fields)
    except InvalidInputError as e:
        fail(str(e), path, node, *keys)


def load_fluid(
    path: str | Path,
    library: dict[str, Component] | None = None,
    table: GroupInteractionTable | None = None,
) -> Mixture:
    """Load a fluid file into a validated Mixture.

    Args:
        path: Fluid YAML file.
        library: Component library; defaults to the bundled one.
        table: When given, every group id must exist in it.

    Raises:
        FileNotFoundError: If path doesn't exist.
        ParseError: Malformed YAML, unknown group or library reference, duplicate
            component, negative fraction or a sum outside 1 +/- 1e-3.
    """
    path = Path(path)
    library = library if library is not None else load_component_library()
    data, node = load_document(path)
    if not isinstance(data, dict):
        fail("Fluid file must be a mapping", path, node)
    entries = data.get("components")
    if not isinstance(entries, list) or not entries:
        fail("Fluid file needs a non-empty 'components' list", path, node, "components")

    components: list[Component] = []
    fractions: list[float] = []
    seen: set[str] = set()
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            fail("Component entry must be a mapping", path, node, "components", i)
        c = _component(entry, library, path, node, i)
        if c.name.lower() in seen:
            fail(f"Duplicate component '{c.name}'", path, node, "components", i)
        seen.add(c.name.lower())
        if table is not None:
            for gid, _ in c.groups:
                if gid not in table.groups:
                    fail(f"Unknown group '{gid}' in component '{c.name}'", path, node, "components", i, "groups", gid)
        if "fraction" not in entry:
            fail(f"Component '{c.name}' has no 'fraction'", path, node, "components", i)
        frac = _number(entry["fraction"], path, node, "components", i, "fraction")
        if frac < 0.0:
            fail(f"Mole fraction of '{c.name}' is negative ({frac})", path, node, "components", i, "fraction")
        components.append(c)
        fractions.append(frac)

    total = math.fsum(fractions)
    if abs(total - 1.0) > RENORMALIZE_TOL:
        fail(f"Mole fractions sum to {total:.12g}, not 1", path, node, "components")
    if abs(total - 1.0) > EXACT_SUM_TOL:
        logger.warning("Mole fractions in %s sum to %.12g; renormalizing", path, total)
    fractions = [f / total for f in fractions]

    name = str(data.get("name", path.stem))
    logger.debug("Loaded fluid %s (%d components)", name, len(components))
    try:
        return Mixture(tuple(components), fractions, name=name)
    except InvalidInputError as e:
        raise ConfigurationError(f"{path}: {e}") from e


def dump_fluid(mix: Mixture, path: str | Path, source: str = "") -> None:
    """Write a Mixture as a fully specified fluid file (no library references)."""
    doc = {"name": mix.name or Path(path).stem}
    if source:
        doc["source"] = source
    doc["components"] = [
        {
            "name": c.name,
            "Tc_K": c.Tc,
            "Pc_MPa": c.Pc / 1e6,
            "omega": c.omega,
            "groups": dict(c.groups),
            "source": c.source,
            "fraction": float(z),
        }
        for c, z in zip(mix.components, mix.z)
    ]
    Path(path).write_text(yaml.safe_dump(doc, sort_keys=False))
