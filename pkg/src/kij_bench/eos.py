"""PR78 cubic equation of state: pure-component parameters, Z roots, fugacities.

Units are SI throughout (Pa, K, m3/mol, J/mol). MPa only appears at the file
and CLI boundaries (see kij_bench.fluid and kij_bench.cli).
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from kij_bench.errors import DegenerateStateError, DomainError, InvalidInputError

logger = logging.getLogger(__name__)

R = 8.314472
OMEGA_A = 0.457235529
OMEGA_B = 0.0777960739
OMEGA_BRANCH = 0.491
SQRT2 = math.sqrt(2.0)
ROOT_MARGIN = 1e-12

# Zc / Omega_b of the PR family. A lone root with v/b above this is treated as vapor-like.
CRITICAL_VOLUME_RATIO = 0.307401308 / OMEGA_B

PhaseRoot = Literal["liquid", "vapor", "stable"]


@dataclass(frozen=True)
class Component:
    """One chemical species: critical constants, acentric factor, group decomposition.

    `groups` holds (group-id, occurrence-count) pairs; a mapping is accepted and
    converted. Group ids are resolved against a GroupInteractionTable later,
    in kij_bench.mixing.
    """

    name: str
    Tc: float
    Pc: float
    omega: float
    groups: tuple[tuple[str, int], ...] = ()
    source: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise InvalidInputError("Component name must be non-empty")
        if not (math.isfinite(self.Tc) and self.Tc > 0):
            raise InvalidInputError(f"{self.name}: Tc must be > 0 K, got {self.Tc}")
        if not (math.isfinite(self.Pc) and self.Pc > 0):
            raise InvalidInputError(f"{self.name}: Pc must be > 0 Pa, got {self.Pc}")
        if not math.isfinite(self.omega):
            raise InvalidInputError(f"{self.name}: acentric factor must be finite, got {self.omega}")

        raw = self.groups.items() if isinstance(self.groups, Mapping) else self.groups
        groups = tuple((str(gid), int(count)) for gid, count in raw)
        for gid, count in groups:
            if count < 1:
                raise InvalidInputError(f"{self.name}: group '{gid}' occurrence count must be >= 1, got {count}")
        object.__setattr__(self, "groups", groups)


@dataclass(frozen=True)
class PureParams:
    a: float
    b: float
    m: float
    alpha: float


@dataclass(frozen=True)
class CubicRoots:
    """Physical compressibility roots, sorted ascending.

    `candidates` keeps every real root of the cubic before the middle root is
    dropped and the Z > B filter is applied.
    """

    roots: tuple[float, ...]
    candidates: tuple[float, ...]
    B: float

    @property
    def liquid_like(self) -> float:
        return self.roots[0]

    @property
    def vapor_like(self) -> float:
        return self.roots[-1]


class PhaseFugacity(NamedTuple):
    ln_phi: np.ndarray
    Z: float
    root_count: int


def m_factor(omega: float) -> float:
    """PR78 slope factor; hard switch between the two polynomials at omega = 0.491."""
    if not math.isfinite(omega):
        raise InvalidInputError(f"Acentric factor must be finite, got {omega}")
    if omega <= OMEGA_BRANCH:
        return 0.37464 + 1.54226 * omega - 0.26992 * omega**2
    return 0.374642 + 1.48503 * omega - 0.164423 * omega**2 + 0.016666 * omega**3


def pure_params(c: Component, T: float) -> PureParams:
    """Energy parameter, co-volume and Soave alpha of a component at temperature T."""
    if not (math.isfinite(T) and T > 0):
        raise DomainError(f"Temperature must be > 0 K, got {T}")
    m = m_factor(c.omega)
    alpha = (1.0 + m * (1.0 - math.sqrt(T / c.Tc))) ** 2
    a = OMEGA_A * (R * c.Tc) ** 2 / c.Pc * alpha
    b = OMEGA_B * R * c.Tc / c.Pc
    return PureParams(a=a, b=b, m=m, alpha=alpha)


def _real_cubic_roots(c2: float, c1: float, c0: float) -> list[float]:
    """Real roots of z^3 + c2 z^2 + c1 z + c0 (trigonometric / Cardano)."""
    q = (c2 * c2 - 3.0 * c1) / 9.0
    r = (2.0 * c2**3 - 9.0 * c2 * c1 + 27.0 * c0) / 54.0
    q3 = q**3
    disc = q3 - r * r
    shift = c2 / 3.0

    if disc >= 0.0:
        if q <= 0.0:
            # triple root
            return [-shift] * 3
        theta = math.acos(max(-1.0, min(1.0, r / math.sqrt(q3))))
        s = -2.0 * math.sqrt(q)
        return [s * math.cos((theta + 2.0 * math.pi * k) / 3.0) - shift for k in range(3)]

    e = math.cbrt(math.sqrt(-disc) + abs(r))
    if r > 0:
        e = -e
    root = (e + q / e if e != 0.0 else 0.0) - shift
    return [root]


def _newton_polish(z: float, c2: float, c1: float, c0: float) -> float:
    f = ((z + c2) * z + c1) * z + c0
    fp = (3.0 * z + 2.0 * c2) * z + c1
    if abs(fp) < 1e-300:
        return z
    return z - f / fp


def solve_cubic_z(A: float, B: float) -> CubicRoots:
    """Solve Z^3 - (1-B)Z^2 + (A-3B^2-2B)Z - (AB-B^2-B^3) = 0 for physical roots.

    The middle root of a three-root solution is always discarded; surviving
    roots must satisfy Z > B + 1e-12.
    """
    if not B >= 0.0:
        raise DomainError(f"Reduced co-volume B must be >= 0, got {B}")
    c2 = -(1.0 - B)
    c1 = A - 3.0 * B * B - 2.0 * B
    c0 = -(A * B - B * B - B**3)

    candidates = sorted(_newton_polish(z, c2, c1, c0) for z in _real_cubic_roots(c2, c1, c0))
    kept = [candidates[0], candidates[2]] if len(candidates) == 3 else list(candidates)
    roots = sorted({z for z in kept if z > B + ROOT_MARGIN})
    if not roots:
        raise DegenerateStateError(f"No physical compressibility root for A={A:.6g}, B={B:.6g} (roots {candidates})")
    return CubicRoots(roots=tuple(roots), candidates=tuple(candidates), B=B)


def _log_ratio(Z: float, B: float) -> float:
    return math.log((Z + (1.0 + SQRT2) * B) / (Z + (1.0 - SQRT2) * B))


def _mixture_ln_phi(Z: float, A: float, B: float) -> float:
    """ln of the mixture fugacity coefficient; used to rank roots by Gibbs energy."""
    attraction = A / (2.0 * SQRT2 * B) * _log_ratio(Z, B) if B > 0.0 else 0.0
    return Z - 1.0 - math.log(Z - B) - attraction


def select_root(roots: CubicRoots, A: float, B: float, phase: PhaseRoot) -> float:
    """Pick the liquid-like, vapor-like or lowest-Gibbs-energy root.

    A lone root serves every phase identity.
    """
    if phase == "liquid":
        return roots.liquid_like
    if phase == "vapor":
        return roots.vapor_like
    if len(roots.roots) == 1:
        return roots.roots[0]
    lo, hi = roots.liquid_like, roots.vapor_like
    return lo if _mixture_ln_phi(lo, A, B) < _mixture_ln_phi(hi, A, B) else hi


def is_vapor_like(Z: float, B: float) -> bool:
    """Phase identity of a single-phase root from its reduced volume v/b = Z/B."""
    if B <= 0.0:
        return True
    return Z / B > CRITICAL_VOLUME_RATIO


def fugacity_coefficients(
    a_ij: np.ndarray,
    b_i: np.ndarray,
    x: Sequence[float] | np.ndarray,
    T: float,
    P: float,
    phase_root: PhaseRoot = "stable",
) -> PhaseFugacity:
    """ln(phi_i) of every component in a phase of composition x.

    Args:
        a_ij: Cross-energy table sqrt(a_i a_j)(1 - k_ij), Pa m6/mol2.
        b_i: Pure co-volumes, m3/mol.
        x: Phase mole fractions (sum to 1 within 1e-12).
        T: Temperature, K.
        P: Pressure, Pa.
        phase_root: "liquid" (smallest root), "vapor" (largest) or "stable"
            (lower Gibbs energy).

    Returns:
        PhaseFugacity(ln_phi, Z, root_count).
    """
    x = np.asarray(x, dtype=float)
    if abs(x.sum() - 1.0) > 1e-12:
        raise InvalidInputError(f"Phase composition must sum to 1, got {x.sum():.15g}")
    if not P > 0.0:
        raise DomainError(f"Pressure must be > 0 Pa, got {P}")

    RT = R * T
    a_x = a_ij @ x
    a_mix = float(x @ a_x)
    b_mix = float(b_i @ x)
    A = a_mix * P / (RT * RT)
    B = b_mix * P / RT

    roots = solve_cubic_z(A, B)
    Z = select_root(roots, A, B, phase_root)
    if Z <= B:
        raise DegenerateStateError(f"Selected root Z={Z} is not above B={B}")

    b_ratio = b_i / b_mix
    ln_phi = b_ratio * (Z - 1.0) - math.log(Z - B)
    if A > 0.0 and B > 0.0:
        ln_phi = ln_phi - A / (2.0 * SQRT2 * B) * (2.0 * a_x / a_mix - b_ratio) * _log_ratio(Z, B)
    if not np.all(np.isfinite(ln_phi)):
        raise DegenerateStateError(f"Non-finite fugacity coefficient at T={T} K, P={P} Pa")
    return PhaseFugacity(ln_phi=ln_phi, Z=Z, root_count=len(roots.roots))


def _spinodal_pressures(a: float, b: float, T: float) -> tuple[float, float]:
    """Liquid and vapor spinodal pressures of a pure fluid from dP/dv = 0."""
    RT = R * T
    quad = np.array([1.0, 2.0 * b, -b * b])
    lhs = RT * np.polymul(quad, quad)
    rhs = 2.0 * a * np.polymul([1.0, b], np.polymul([1.0, -b], [1.0, -b]))
    poly = np.polysub(lhs, rhs)
    volumes = sorted(v.real for v in np.roots(poly) if abs(v.imag) < 1e-12 * abs(v) and v.real > b)
    if len(volumes) < 2:
        raise DomainError(f"No two-phase region on the isotherm T={T} K")

    def pressure(v: float) -> float:
        return RT / (v - b) - a / (v * v + 2.0 * b * v - b * b)

    return pressure(volumes[0]), pressure(volumes[-1])


def pure_saturation_pressure(c: Component, T: float) -> float:
    """Vapor pressure of a single component below Tc from equal liquid/vapor fugacity."""
    if not T < c.Tc:
        raise DomainError(f"{c.name}: saturation pressure needs T < Tc ({T} >= {c.Tc})")
    params = pure_params(c, T)
    p_liq_spinodal, p_vap_spinodal = _spinodal_pressures(params.a, params.b, T)
    hi = p_vap_spinodal * (1.0 - 1e-6)
    lo = p_liq_spinodal * (1.0 + 1e-6) if p_liq_spinodal > 0.0 else hi * 1e-10

    a_ij = np.array([[params.a]])
    b_i = np.array([params.b])
    x = np.ones(1)

    def residual(P: float) -> float:
        liq = fugacity_coefficients(a_ij, b_i, x, T, P, "liquid").ln_phi[0]
        vap = fugacity_coefficients(a_ij, b_i, x, T, P, "vapor").ln_phi[0]
        return liq - vap

    p_sat = brentq(residual, lo, hi, xtol=1e-6, rtol=1e-14, maxiter=500)
    logger.debug("Saturation pressure of %s at %.2f K: %.6g Pa", c.name, T, p_sat)
    return float(p_sat)
