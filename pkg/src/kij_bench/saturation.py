"""Bubble/dew pressures by bisection on the flash phase state, and CO2-loading sweeps.

A saturation pressure is bracketed by two pressures whose flashes disagree
(two-phase on one side, single phase on the other) and bisected to 1 kPa. If
both ends of the default bracket are single phase with different identities,
a log-spaced pressure scan locates the two-phase window first.

The `warm` sweep strategy seeds every point from its predecessor: the inner
flashes start from the previous K-values and the bracket is narrowed around
the previous pressure, falling back to the full bracket when the narrow one
does not straddle the boundary.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from kij_bench.config import FlashSettings, SaturationSettings
from kij_bench.errors import BracketError, DegenerateStateError, InvalidInputError, NonConvergenceError
from kij_bench.flash import FlashResult, Mixture, pt_flash
from kij_bench.mixing import KijMatrix

logger = logging.getLogger(__name__)

SaturationKind = Literal["bubble", "dew"]
Strategy = Literal["cold", "warm"]

CO2 = "CO2"


@dataclass(frozen=True, eq=False)
class SaturationPoint:
    T: float
    z_CO2: float
    kind: SaturationKind
    p: float
    converged: bool
    iterations: int = 0
    edge: FlashResult | None = None
    message: str = ""

    @property
    def p_MPa(self) -> float:
        return self.p / 1e6


@dataclass(frozen=True)
class SaturationCurve:
    T: float
    points: tuple[SaturationPoint, ...] = ()
    strategy: Strategy = "cold"

    def __post_init__(self) -> None:
        z = [p.z_CO2 for p in self.points]
        if any(b <= a for a, b in zip(z, z[1:])):
            raise InvalidInputError("Curve points must have strictly increasing z_CO2")

    @property
    def total_iterations(self) -> int:
        return sum(p.iterations for p in self.points)

    @property
    def failures(self) -> list[SaturationPoint]:
        return [p for p in self.points if not p.converged]


@dataclass
class _FlashTracker:
    """Runs the inner flashes of one saturation solve, carrying the warm start forward."""

    mix: Mixture
    T: float
    kij: KijMatrix
    settings: FlashSettings
    seed: tuple[np.ndarray, np.ndarray, float] | None = None
    iterations: int = 0
    calls: int = 0

    def __call__(self, P: float) -> FlashResult:
        try:
            result = pt_flash(self.mix, self.T, P, self.kij, warm_start=self.seed, settings=self.settings)
        except NonConvergenceError as e:
            raise NonConvergenceError(
                f"Flash failed at P={P:.6g} Pa during saturation search: {e}",
                last_iterate=e.last_iterate,
                iterations=e.iterations,
            ) from e
        self.calls += 1
        self.iterations += result.total_iterations
        if result.phase_count == 2:
            self.seed = (result.x, result.y, result.beta)
        return result


def _edge_kind(edge: FlashResult) -> SaturationKind:
    # near-critical ties resolve to dew when beta at the two-phase edge exceeds 0.5
    return "dew" if edge.beta > 0.5 else "bubble"


def _scan_for_bracket(
    flash: _FlashTracker,
    lo: tuple[float, FlashResult],
    hi: tuple[float, FlashResult],
    kind: str,
    subcritical_pure: bool,
    settings: SaturationSettings,
) -> tuple[tuple[float, FlashResult], tuple[float, FlashResult]]:
    pressures = np.geomspace(lo[0], hi[0], max(settings.scan_points, 3))
    states = [lo] + [(float(p), flash(float(p))) for p in pressures[1:-1]] + [hi]

    matches = []
    for a, b in zip(states, states[1:]):
        if a[1].phase_label == b[1].phase_label:
            continue
        edge = a[1] if a[1].phase_count == 2 else b[1] if b[1].phase_count == 2 else None
        if edge is None:
            if subcritical_pure:
                matches.append((a, b))
            continue
        if kind == "auto" or _edge_kind(edge) == kind:
            matches.append((a, b))
    if not matches:
        labels = ", ".join(f"{p / 1e6:.4g} MPa {r.phase_label}" for p, r in states)
        raise BracketError(
            f"No {kind} boundary found scanning [{lo[0]:.6g}, {hi[0]:.6g}] Pa ({labels})",
            lo_state=lo[1].phase_label,
            hi_state=hi[1].phase_label,
        )
    # the upper boundary is the saturation line of a loaded oil
    return matches[-1]


def saturation_pressure(
    mix: Mixture,
    T: float,
    kind: str,
    kij: KijMatrix,
    bracket: tuple[float, float] | None = None,
    warm_start: FlashResult | None = None,
    settings: SaturationSettings | None = None,
    flash_settings: FlashSettings | None = None,
) -> SaturationPoint:
    """Bubble or dew pressure of `mix` at T.

    Args:
        kind: "bubble", "dew" or "auto". With "auto" the returned point carries
            the kind detected at the crossing.
        bracket: (p_lo, p_hi) in Pa; defaults to SaturationSettings.
        warm_start: A converged two-phase flash used to seed the inner flashes.

    Raises:
        BracketError: The bracket ends agree on phase state, no boundary of the
            requested kind lies inside it, or a lone component is supercritical.
        NonConvergenceError: An inner flash failed; the message names the pressure.
    """
    if kind not in ("bubble", "dew", "auto"):
        raise InvalidInputError(f"Unknown saturation kind '{kind}' (expected bubble, dew or auto)")
    settings = settings or SaturationSettings()
    p_lo, p_hi = bracket or (settings.p_lo, settings.p_hi)
    if not 0 < p_lo < p_hi:
        raise InvalidInputError(f"Bracket must satisfy 0 < p_lo < p_hi, got ({p_lo}, {p_hi})")

    seed = None
    if warm_start is not None and warm_start.phase_count == 2:
        seed = (warm_start.x, warm_start.y, warm_start.beta)
    flash = _FlashTracker(mix, T, kij, flash_settings or FlashSettings(), seed=seed)
    present = np.flatnonzero(mix.z)
    # a lone component jumps liquid to vapor without a two-phase window only below its Tc
    subcritical_pure = len(present) == 1 and T < mix.components[int(present[0])].Tc

    lo = (p_lo, flash(p_lo))
    hi = (p_hi, flash(p_hi))
    if lo[1].phase_label == hi[1].phase_label:
        raise BracketError(
            f"Bracket [{p_lo:.6g}, {p_hi:.6g}] Pa does not straddle a phase boundary "
            f"(both ends {lo[1].phase_label})",
            lo_state=lo[1].phase_label,
            hi_state=hi[1].phase_label,
        )
    if lo[1].phase_count == 1 and hi[1].phase_count == 1:
        lo, hi = _scan_for_bracket(flash, lo, hi, kind, subcritical_pure, settings)

    lo_label = lo[1].phase_label
    while hi[0] - lo[0] >= settings.p_tol:
        mid = 0.5 * (lo[0] + hi[0])
        result = flash(mid)
        if result.phase_label == lo_label:
            lo = (mid, result)
        else:
            hi = (mid, result)

    p = 0.5 * (lo[0] + hi[0])
    edge = lo[1] if lo[1].phase_count == 2 else hi[1] if hi[1].phase_count == 2 else None
    if edge is not None:
        detected = _edge_kind(edge)
    else:
        detected = "bubble" if kind == "auto" else kind
    if kind not in ("auto", detected):
        raise BracketError(
            f"Requested a {kind} point but the boundary near {p:.6g} Pa is a {detected} point "
            f"(beta at the two-phase edge {edge.beta:.3f})",
            lo_state=lo[1].phase_label,
            hi_state=hi[1].phase_label,
        )

    logger.debug("%s pressure at T=%.2f K: %.6g Pa (%d flashes)", detected, T, p, flash.calls)
    return SaturationPoint(
        T=T,
        z_CO2=_co2_fraction(mix),
        kind=detected,
        p=p,
        converged=True,
        iterations=flash.iterations,
        edge=edge,
    )


def _co2_fraction(mix: Mixture) -> float:
    i = mix.index(CO2)
    return float(mix.z[i]) if i is not None else 0.0


def with_co2_loading(base_oil: Mixture, z_co2: float) -> Mixture:
    """base_oil's non-CO2 part renormalized to (1 - z_co2), plus CO2 at z_co2."""
    i = base_oil.index(CO2)
    if i is None:
        raise InvalidInputError(f"Fluid '{base_oil.name or 'unnamed'}' has no {CO2} component to load")
    if not 0.0 <= z_co2 < 1.0:
        raise InvalidInputError(f"z_CO2 must lie in [0, 1), got {z_co2}")
    rest = np.array(base_oil.z, dtype=float)
    rest[i] = 0.0
    if rest.sum() <= 0.0:
        raise InvalidInputError("Base oil has no components besides CO2")
    z = rest / rest.sum() * (1.0 - z_co2)
    z[i] = z_co2
    # absorb roundoff so the sum is 1 to machine precision
    j = int(np.argmax(z))
    z[j] += 1.0 - z.sum()
    return base_oil.with_composition(z)


def _failed_point(T: float, z_co2: float, kind: SaturationKind, error: Exception) -> SaturationPoint:
    return SaturationPoint(T=T, z_CO2=z_co2, kind=kind, p=math.nan, converged=False, message=str(error))


def _sweep_point(
    base_oil: Mixture,
    z_co2: float,
    T: float,
    kij: KijMatrix,
    kind: str,
    bracket: tuple[float, float] | None,
    warm_start: FlashResult | None,
    settings: SaturationSettings,
    flash_settings: FlashSettings,
) -> SaturationPoint:
    mix = with_co2_loading(base_oil, z_co2)
    return saturation_pressure(mix, T, kind, kij, bracket, warm_start, settings, flash_settings)


def envelope_sweep(
    base_oil: Mixture,
    co2_fractions: Sequence[float],
    T: float,
    kij: KijMatrix,
    strategy: Strategy = "cold",
    settings: SaturationSettings | None = None,
    flash_settings: FlashSettings | None = None,
    max_workers: int = 1,
) -> SaturationCurve:
    """Saturation pressure at each CO2 loading along one isotherm.

    Points that fail are recorded with converged=False and the sweep goes on.
    `cold` sweeps may run points on `max_workers` threads; `warm` sweeps are
    sequential.
    """
    if strategy not in ("cold", "warm"):
        raise InvalidInputError(f"Unknown strategy '{strategy}' (expected cold or warm)")
    fractions = [float(f) for f in co2_fractions]
    if any(b <= a for a, b in zip(fractions, fractions[1:])):
        raise InvalidInputError("CO2 fractions must be strictly increasing")
    if any(not 0.0 <= f < 1.0 for f in fractions):
        raise InvalidInputError("CO2 fractions must lie in [0, 1)")
    settings = settings or SaturationSettings()
    flash_settings = flash_settings or FlashSettings()
    failures = (NonConvergenceError, DegenerateStateError, BracketError)

    if strategy == "cold":

        def solve(z_co2: float) -> SaturationPoint:
            try:
                return _sweep_point(base_oil, z_co2, T, kij, "auto", None, None, settings, flash_settings)
            except failures as e:
                logger.warning("Saturation point z_CO2=%.4f at %.2f K failed: %s", z_co2, T, e)
                return _failed_point(T, z_co2, "bubble", e)

        if max_workers > 1 and len(fractions) > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                points = list(pool.map(solve, fractions))
        else:
            points = [solve(f) for f in fractions]
        return SaturationCurve(T=T, points=tuple(points), strategy="cold")

    points: list[SaturationPoint] = []
    previous: SaturationPoint | None = None
    for z_co2 in fractions:
        kind_so_far: SaturationKind = "dew" if any(p.kind == "dew" and p.converged for p in points) else "bubble"
        try:
            point = None
            if previous is not None:
                window = (
                    max(settings.p_lo, previous.p - settings.warm_window),
                    min(settings.p_hi, previous.p + settings.warm_window),
                )
                try:
                    point = _sweep_point(
                        base_oil, z_co2, T, kij, "auto", window, previous.edge, settings, flash_settings
                    )
                except BracketError:
                    logger.debug("Warm window %s missed the boundary at z_CO2=%.4f, using full bracket", window, z_co2)
            if point is None:
                seed = previous.edge if previous is not None else None
                point = _sweep_point(base_oil, z_co2, T, kij, "auto", None, seed, settings, flash_settings)
        except failures as e:
            logger.warning("Saturation point z_CO2=%.4f at %.2f K failed: %s", z_co2, T, e)
            points.append(_failed_point(T, z_co2, kind_so_far, e))
            continue
        if kind_so_far == "dew" and point.kind == "bubble":
            logger.warning("Sweep at %.2f K switched back from dew to bubble at z_CO2=%.4f", T, z_co2)
        points.append(point)
        previous = point
    return SaturationCurve(T=T, points=tuple(points), strategy="warm")


def strategy_discrepancies(
    cold: SaturationCurve, warm: SaturationCurve, tolerance: float = 2e3
) -> list[tuple[float, float]]:
    """(z_CO2, |p_cold - p_warm| in Pa) for points whose pressures differ beyond tolerance."""
    out = []
    for a, b in zip(cold.points, warm.points):
        if a.converged and b.converged and abs(a.p - b.p) > tolerance:
            out.append((a.z_CO2, abs(a.p - b.p)))
    for z_co2, diff in out:
        logger.warning("Warm and cold sweeps disagree at z_CO2=%.4f by %.3g kPa", z_co2, diff / 1e3)
    return out
