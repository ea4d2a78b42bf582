"""Run directories and RunRecords.

Every CLI command except `replay` writes its artifacts into one run directory
together with `run.json`: the command line, a config snapshot, SHA-256
digests of its inputs and outputs, and start/finish timestamps. `replay`
re-runs the recorded command line into a scratch directory and compares the
output digests.
"""

import fcntl
import hashlib
import json
import logging
import tempfile
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterator

from kij_bench.errors import InvalidInputError

logger = logging.getLogger(__name__)

RUN_FILE = "run.json"
LOG_FILE = "workbench.log"
LOCK_FILE = ".lock"

# Never part of the reproducible output set
_BOOKKEEPING = {RUN_FILE, LOG_FILE, LOCK_FILE}


@dataclass
class RunRecord:
    run_id: str
    command: str
    argv: list[str]
    config: dict = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    started: str = ""
    finished: str = ""
    status: str = "running"
    exit_code: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        try:
            return cls(**data)
        except TypeError as e:
            raise InvalidInputError(f"Malformed run record: {e}") from None


def now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def output_digests(run_dir: Path) -> dict[str, str]:
    return {
        p.name: file_digest(p)
        for p in sorted(run_dir.iterdir())
        if p.is_file() and p.name not in _BOOKKEEPING
    }


def new_run_dir(root: str | Path, command: str) -> Path:
    """runs/<command>/<timestamp>, suffixed when the timestamp is taken."""
    timestamp = datetime.now().strftime("%Y-%m-%dT%H-%M-%S")
    base = Path(root) / command / timestamp
    candidate, n = base, 1
    while candidate.exists():
        candidate = base.with_name(f"{timestamp}-{n}")
        n += 1
    return candidate


def prepare_run_dir(run_dir: str | Path) -> Path:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    if (run_dir / RUN_FILE).exists():
        raise InvalidInputError(f"{run_dir} already holds a run; choose another --out")
    return run_dir


@contextmanager
def run_lock(run_dir: Path) -> Iterator[None]:
    """Advisory exclusive lock on a run directory."""
    with open(run_dir / LOCK_FILE, "w") as f:
        try:
            fcntl.flock(f, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except BlockingIOError:
            raise InvalidInputError(f"Run directory {run_dir} is locked by another process") from None
        try:
            yield
        finally:
            fcntl.flock(f, fcntl.LOCK_UN)


def write_record(run_dir: Path, record: RunRecord) -> Path:
    path = run_dir / RUN_FILE
    path.write_text(json.dumps(record.to_dict(), indent=2) + "\n")
    return path


def load_record(run_dir: str | Path) -> RunRecord:
    path = Path(run_dir) / RUN_FILE
    if not path.exists():
        raise FileNotFoundError(f"No {RUN_FILE} in {run_dir}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"Invalid JSON in {path}: {e}") from None
    return RunRecord.from_dict(data)


def replay(run_dir: str | Path, execute: Callable[[list[str]], int]) -> list[str]:
    """Re-run a recorded command and list the artifacts whose bytes differ.

    Args:
        run_dir: Directory holding run.json.
        execute: Runs a CLI argument list and returns its exit code.
    """
    record = load_record(run_dir)
    for path, digest in record.inputs.items():
        if not Path(path).exists():
            raise FileNotFoundError(f"Recorded input is missing: {path}")
        if file_digest(path) != digest:
            logger.warning("Input changed since the run was recorded: %s", path)

    scratch = Path(tempfile.mkdtemp(prefix="kij-bench-replay-"))
    target = scratch / "run"
    code = execute([*record.argv, "--out", str(target)])
    if code != record.exit_code:
        logger.warning("Replay exit code %s differs from recorded %s", code, record.exit_code)

    replayed = output_digests(target) if target.exists() else {}
    mismatches = sorted(
        name
        for name in set(record.outputs) | set(replayed)
        if record.outputs.get(name) != replayed.get(name)
    )
    for name in mismatches:
        logger.error("  differs: %s", name)
    logger.info("Replay of %s: %d artifact(s) compared, %d differ", record.run_id, len(record.outputs), len(mismatches))
    return mismatches
