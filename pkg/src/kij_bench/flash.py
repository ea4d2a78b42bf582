"""Isothermal two-phase PT flash.

Stability is checked first (tangent-plane distance from a vapor-like and a
liquid-like Wilson trial). An unstable feed is then split by successive
substitution on K-values with a Rachford-Rice solve for the vapor fraction.
Components with zero feed fraction are carried through with zero fractions in
both phases.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import brentq

from kij_bench.config import FlashSettings
from kij_bench.eos import R, Component, PhaseFugacity, PhaseRoot, fugacity_coefficients, is_vapor_like, pure_params
from kij_bench.errors import (
    DegenerateStateError,
    DomainError,
    IndeterminateStabilityError,
    InvalidInputError,
    NonConvergenceError,
)
from kij_bench.mixing import KijMatrix, cross_energy

logger = logging.getLogger(__name__)

WILSON_CONSTANT = 5.373

PhaseLabel = Literal["two-phase", "liquid", "vapor"]


@dataclass(frozen=True, eq=False)
class Mixture:
    """Components plus a global composition (sums to 1 within 1e-10)."""

    components: tuple[Component, ...]
    z: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise InvalidInputError("A mixture needs at least one component")
        z = np.array(self.z, dtype=float)
        if z.shape != (len(comps),):
            raise InvalidInputError(f"Composition has {z.size} entries for {len(comps)} components")
        if not np.all(np.isfinite(z)):
            raise InvalidInputError("Mole fractions must be finite")
        if np.any(z < 0.0):
            i = int(np.argmin(z))
            raise InvalidInputError(f"Mole fraction of {comps[i].name} is negative ({z[i]})")
        if abs(z.sum() - 1.0) > 1e-10:
            raise InvalidInputError(f"Mole fractions must sum to 1 within 1e-10, got {z.sum():.15g}")
        names = [c.name.lower() for c in comps]
        if len(set(names)) != len(names):
            raise InvalidInputError(f"Duplicate component names in {[c.name for c in comps]}")
        z.setflags(write=False)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "z", z)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.components)

    def index(self, name: str) -> int | None:
        lowered = name.lower()
        for i, c in enumerate(self.components):
            if c.name.lower() == lowered:
                return i
        return None

    def with_composition(self, z: Sequence[float] | np.ndarray) -> "Mixture":
        return Mixture(self.components, np.asarray(z, dtype=float), self.name)


@dataclass(frozen=True, eq=False)
class StabilityReport:
    tpd_min: float
    trial_composition: np.ndarray
    stable: bool
    iterations: int = 0


@dataclass(frozen=True, eq=False)
class FlashResult:
    phase_count: int
    beta: float
    x: np.ndarray
    y: np.ndarray
    Z_liquid: float
    Z_vapor: float
    iterations: int
    converged: bool
    stability_iterations: int = 0

    @property
    def phase_label(self) -> PhaseLabel:
        if self.phase_count == 2:
            return "two-phase"
        return "vapor" if self.beta >= 1.0 else "liquid"

    @property
    def total_iterations(self) -> int:
        return self.iterations + self.stability_iterations


class _PhaseModel:
    """Composition-independent EOS tables for one (mixture, T), restricted to present components."""

    def __init__(self, mix: Mixture, T: float, kij: KijMatrix):
        if not (math.isfinite(T) and T > 0):
            raise DomainError(f"Temperature must be > 0 K, got {T}")
        if [n.lower() for n in kij.names] != [n.lower() for n in mix.names]:
            raise InvalidInputError(f"kij matrix components {kij.names} do not match mixture {mix.names}")
        a_ij, b_i = cross_energy([pure_params(c, T) for c in mix.components], kij)
        self.mix = mix
        self.T = T
        self.active = np.flatnonzero(mix.z > 0.0)
        self.a_ij = a_ij[np.ix_(self.active, self.active)]
        self.b_i = b_i[self.active]
        self.z = mix.z[self.active] / mix.z[self.active].sum()
        self.components = [mix.components[i] for i in self.active]

    def fugacity(self, x: np.ndarray, P: float, root: PhaseRoot) -> PhaseFugacity:
        return fugacity_coefficients(self.a_ij, self.b_i, x, self.T, P, root)

    def reduced_b(self, x: np.ndarray, P: float) -> float:
        return float(self.b_i @ x) * P / (R * self.T)

    def wilson(self, P: float) -> np.ndarray:
        return np.array([wilson_k(c, self.T, P) for c in self.components])

    def expand(self, x: np.ndarray) -> np.ndarray:
        full = np.zeros(len(self.mix.components))
        full[self.active] = x
        return full


def wilson_k(c: Component, T: float, P: float) -> float:
    """Wilson K-factor estimate (Pc/P) exp(5.373 (1 + omega)(1 - Tc/T))."""
    if not (T > 0 and P > 0):
        raise DomainError(f"Wilson K needs T > 0 and P > 0, got T={T}, P={P}")
    return c.Pc / P * math.exp(WILSON_CONSTANT * (1.0 + c.omega) * (1.0 - c.Tc / T))


def _rr_objective(beta: float, z: np.ndarray, km1: np.ndarray) -> float:
    return float(np.sum(z * km1 / (1.0 + beta * km1)))


def rachford_rice(z: Sequence[float] | np.ndarray, K: Sequence[float] | np.ndarray) -> float | None:
    """Vapor fraction from the Rachford-Rice equation.

    Returns None (single phase) unless some present component has K > 1 and
    another K < 1. The root may lie outside [0, 1]; callers clip.
    """
    z = np.asarray(z, dtype=float)
    K = np.asarray(K, dtype=float)
    if z.shape != K.shape:
        raise InvalidInputError(f"z and K lengths differ ({z.size} vs {K.size})")
    present = z > 0.0
    z, K = z[present], K[present]
    if not (np.any(K > 1.0) and np.any(K < 1.0)):
        return None

    km1 = K - 1.0
    lo = 1.0 / (1.0 - K.max())
    hi = 1.0 / (1.0 - K.min())
    margin = (hi - lo) * 1e-14
    beta = brentq(_rr_objective, lo + margin, hi - margin, args=(z, km1), xtol=1e-16, rtol=8.9e-16, maxiter=500)

    # one Newton step on the monotone objective
    g = _rr_objective(beta, z, km1)
    dg = -float(np.sum(z * km1 * km1 / (1.0 + beta * km1) ** 2))
    if dg != 0.0:
        polished = beta - g / dg
        if lo < polished < hi and abs(_rr_objective(polished, z, km1)) <= abs(g):
            beta = polished
    return float(beta)


@dataclass
class _Trial:
    tm: float
    w: np.ndarray
    iterations: int
    converged: bool


def _tpd_trial(model: _PhaseModel, d: np.ndarray, W0: np.ndarray, P: float, settings: FlashSettings) -> _Trial:
    lnW = np.log(W0)
    converged = False
    it = 0
    for it in range(1, settings.stability_max_iter + 1):
        W = np.exp(lnW)
        w = W / W.sum()
        lnW_new = d - model.fugacity(w, P, "stable").ln_phi
        step = float(np.max(np.abs(lnW_new - lnW)))
        lnW = lnW_new
        if step < settings.stability_tol:
            converged = True
            break
        if np.max(np.abs(w - model.z)) < settings.trivial_tol:
            # collapsed onto the feed
            converged = True
            break

    W = np.exp(lnW)
    w = W / W.sum()
    ln_phi = model.fugacity(w, P, "stable").ln_phi
    tm = 1.0 + float(np.sum(W * (lnW + ln_phi - d - 1.0)))
    return _Trial(tm=tm, w=w, iterations=it, converged=converged)


def _stability(model: _PhaseModel, P: float, settings: FlashSettings) -> StabilityReport:
    if model.z.size == 1:
        return StabilityReport(tpd_min=0.0, trial_composition=model.expand(model.z), stable=True)

    d = np.log(model.z) + model.fugacity(model.z, P, "stable").ln_phi
    K = model.wilson(P)
    trials = [
        _tpd_trial(model, d, model.z * K, P, settings),
        _tpd_trial(model, d, model.z / K, P, settings),
    ]
    best = min(trials, key=lambda t: t.tm)
    iterations = sum(t.iterations for t in trials)

    # an unconverged trial with negative tm still proves instability
    if not any(t.converged for t in trials) and best.tm >= settings.tpd_threshold:
        raise IndeterminateStabilityError(
            f"Neither stability trial converged at T={model.T} K, P={P} Pa",
            last_iterate=trials,
            iterations=iterations,
        )
    stable = best.tm >= settings.tpd_threshold
    logger.debug("Stability at T=%.2f K P=%.6g Pa: tm=%.3e (%s)", model.T, P, best.tm, "stable" if stable else "unstable")
    return StabilityReport(
        tpd_min=best.tm,
        trial_composition=model.expand(best.w),
        stable=stable,
        iterations=iterations,
    )


def stability_test(
    mix: Mixture, T: float, P: float, kij: KijMatrix, settings: FlashSettings | None = None
) -> StabilityReport:
    """Tangent-plane stability of the feed at (T, P).

    Raises:
        IndeterminateStabilityError: Neither trial converged and none went negative.
    """
    if not P > 0:
        raise DomainError(f"Pressure must be > 0 Pa, got {P}")
    return _stability(_PhaseModel(mix, T, kij), P, settings or FlashSettings())


def _split(
    model: _PhaseModel, P: float, K: np.ndarray, settings: FlashSettings
) -> tuple[FlashResult, bool]:
    """Successive substitution from K. Returns (result, collapsed_to_trivial)."""
    z = model.z
    beta = 0.5
    x = y = z
    fl = fv = None
    for it in range(1, settings.flash_max_iter + 1):
        rr = rachford_rice(z, K)
        if rr is None:
            rr = 1.0 if np.all(K >= 1.0) else 0.0
        beta = min(max(rr, 0.0), 1.0)
        x = z / (1.0 + beta * (K - 1.0))
        y = K * x
        x = x / x.sum()
        y = y / y.sum()

        fl = model.fugacity(x, P, "liquid")
        fv = model.fugacity(y, P, "vapor")
        residual = float(np.max(np.abs((np.log(x) + fl.ln_phi) - (np.log(y) + fv.ln_phi))))
        if residual < settings.fugacity_tol:
            result = FlashResult(2, beta, model.expand(x), model.expand(y), fl.Z, fv.Z, it, True)
            return result, False
        if np.max(np.abs(x - y)) < settings.trivial_tol:
            return FlashResult(2, beta, model.expand(x), model.expand(y), fl.Z, fv.Z, it, False), True
        K = np.exp(fl.ln_phi - fv.ln_phi)

    last = FlashResult(2, beta, model.expand(x), model.expand(y), fl.Z, fv.Z, settings.flash_max_iter, False)
    raise NonConvergenceError(
        f"Flash did not converge in {settings.flash_max_iter} iterations at T={model.T} K, P={P} Pa",
        last_iterate=last,
        iterations=settings.flash_max_iter,
    )


def _warm_k(model: _PhaseModel, warm_start: tuple[np.ndarray, np.ndarray, float], P: float) -> np.ndarray:
    x0, y0, _ = warm_start
    x0 = np.asarray(x0, dtype=float)[model.active]
    y0 = np.asarray(y0, dtype=float)[model.active]
    K = model.wilson(P)
    usable = (x0 > 0.0) & (y0 > 0.0)
    K[usable] = y0[usable] / x0[usable]
    return K


def pt_flash(
    mix: Mixture,
    T: float,
    P: float,
    kij: KijMatrix,
    warm_start: tuple[np.ndarray, np.ndarray, float] | None = None,
    settings: FlashSettings | None = None,
) -> FlashResult:
    """Two-phase PT flash.

    Args:
        mix: Feed mixture.
        T: Temperature, K.
        P: Pressure, Pa.
        kij: Interaction parameters for the mixture's components at T.
        warm_start: (x, y, beta) of a nearby converged state; replaces the
            Wilson initial K-values.
        settings: Tolerances and iteration caps.

    Raises:
        NonConvergenceError: Split loop hit its cap; last_iterate is the final FlashResult.
        DegenerateStateError: Split collapsed onto the trivial solution twice.
    """
    if not (math.isfinite(P) and P > 0):
        raise DomainError(f"Pressure must be > 0 Pa, got {P}")
    settings = settings or FlashSettings()
    model = _PhaseModel(mix, T, kij)
    report = _stability(model, P, settings)

    if report.stable:
        feed = model.fugacity(model.z, P, "stable")
        beta = 1.0 if is_vapor_like(feed.Z, model.reduced_b(model.z, P)) else 0.0
        z = model.expand(model.z)
        return FlashResult(1, beta, z, z.copy(), feed.Z, feed.Z, 0, True, report.iterations)

    K = _warm_k(model, warm_start, P) if warm_start is not None else model.wilson(P)
    result, collapsed = _split(model, P, K, settings)
    if collapsed:
        # retry from the stability trial phase
        w = report.trial_composition[model.active]
        K = np.where(w > 0.0, w / model.z, 1.0)
        if not np.any(K > 1.0):
            K = 1.0 / K
        logger.debug("Trivial split at T=%.2f K P=%.6g Pa, retrying from trial composition", T, P)
        result, collapsed = _split(model, P, K, settings)
        if collapsed:
            raise DegenerateStateError(f"Flash collapsed to the trivial solution at T={T} K, P={P} Pa")

    return FlashResult(
        phase_count=2,
        beta=result.beta,
        x=result.x,
        y=result.y,
        Z_liquid=result.Z_liquid,
        Z_vapor=result.Z_vapor,
        iterations=result.iterations,
        converged=True,
        stability_iterations=report.iterations,
    )
