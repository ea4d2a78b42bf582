"""Strict YAML loading with line/column diagnostics.

The data files (group table, component library, fluids, configs) are parsed
twice: once into a node graph to keep source marks, once into plain Python
objects. Validation errors are then reported at the offending token.
"""

from pathlib import Path
from typing import Any, NoReturn

import yaml

from kij_bench.errors import ParseError


def load_document(path: str | Path) -> tuple[Any, yaml.Node | None]:
    """Parse a YAML file, returning (data, root node).

    Raises:
        FileNotFoundError: If path doesn't exist.
        ParseError: On malformed YAML, with line and column of the problem.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    text = path.read_text()
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        raise ParseError(
            str(e.problem or e),
            path=str(path),
            line=mark.line + 1 if mark else None,
            column=mark.column + 1 if mark else None,
        ) from e
    except yaml.YAMLError as e:
        raise ParseError(str(e), path=str(path)) from e
    return data, node


def locate(node: yaml.Node | None, *keys: str | int) -> tuple[int | None, int | None]:
    """1-based (line, column) of the node reached by following keys, or of the deepest match."""
    current = node
    found = node
    for key in keys:
        if isinstance(current, yaml.MappingNode):
            nxt = next((v for k, v in current.value if getattr(k, "value", None) == key), None)
        elif isinstance(current, yaml.SequenceNode) and isinstance(key, int) and 0 <= key < len(current.value):
            nxt = current.value[key]
        else:
            nxt = None
        if nxt is None:
            break
        current = found = nxt
    if found is None:
        return None, None
    return found.start_mark.line + 1, found.start_mark.column + 1


def fail(message: str, path: str | Path, node: yaml.Node | None, *keys: str | int) -> NoReturn:
    line, column = locate(node, *keys)
    raise ParseError(message, path=str(path), line=line, column=column)
