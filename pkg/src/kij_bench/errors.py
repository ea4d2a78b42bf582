"""Exception hierarchy for the phase-behaviour engine and workbench.

Every error derives from a builtin (ValueError or RuntimeError) as well as
KijBenchError, so callers may catch either. The CLI maps these classes to exit
codes (see kij_bench.cli).
"""

from typing import Any


class KijBenchError(Exception):
    """Base class for all kij-bench errors."""


class InvalidInputError(KijBenchError, ValueError):
    """Argument or file content violates a documented precondition."""


class DomainError(KijBenchError, ValueError):
    """Numeric argument outside the mathematical domain of an operation."""


class ConfigurationError(KijBenchError, ValueError):
    """Model data (group table, component library, config file) is unusable."""


class ParseError(ConfigurationError):
    """Structured-text file could not be parsed.

    Carries the file path and 1-based line/column of the offending token when known.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None, column: int | None = None):
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if path:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
                if column is not None:
                    where += f":{column}"
            where += ": "
        super().__init__(f"{where}{message}")


class DegenerateStateError(KijBenchError, RuntimeError):
    """Thermodynamic state has no physical solution (no valid root, trivial split)."""


class NonConvergenceError(KijBenchError, RuntimeError):
    """Iterative solver hit its iteration cap. `last_iterate` holds the final state."""

    def __init__(self, message: str, last_iterate: Any = None, iterations: int | None = None):
        self.last_iterate = last_iterate
        self.iterations = iterations
        super().__init__(message)


class IndeterminateStabilityError(NonConvergenceError):
    """Neither stability trial converged; `last_iterate` holds both partial trials."""


class BracketError(KijBenchError, ValueError):
    """Pressure bracket does not straddle a phase boundary."""

    def __init__(self, message: str, lo_state: str | None = None, hi_state: str | None = None):
        self.lo_state = lo_state
        self.hi_state = hi_state
        super().__init__(message)


class CostUndefinedError(KijBenchError, RuntimeError):
    """Every saturation point failed, so no cost can be formed."""

    def __init__(self, message: str, failures: list | None = None):
        self.failures = failures or []
        super().__init__(message)
