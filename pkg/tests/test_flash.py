"""Tests for stability analysis, Rachford-Rice and the PT flash."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from kij_bench.config import FlashSettings
from kij_bench.eos import fugacity_coefficients, pure_params, pure_saturation_pressure
from kij_bench.errors import InvalidInputError, NonConvergenceError
from kij_bench.flash import Mixture, pt_flash, rachford_rice, stability_test, wilson_k
from kij_bench.mixing import build_kij_matrix, cross_energy


def _tables(mix: Mixture, T: float, kij):
    return cross_energy([pure_params(c, T) for c in mix.components], kij)


def _assert_material_balance(mix: Mixture, result) -> None:
    assert 0.0 <= result.beta <= 1.0
    assert result.x.sum() == pytest.approx(1.0, abs=1e-10)
    assert result.y.sum() == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(result.beta * result.y + (1 - result.beta) * result.x, mix.z, atol=1e-9)


def _assert_equal_fugacity(mix: Mixture, T: float, P: float, kij, result) -> None:
    a_ij, b_i = _tables(mix, T, kij)
    present = mix.z > 0
    a_ij, b_i = a_ij[np.ix_(present, present)], b_i[present]
    x, y = result.x[present], result.y[present]
    liq = fugacity_coefficients(a_ij, b_i, x, T, P, "liquid").ln_phi
    vap = fugacity_coefficients(a_ij, b_i, y, T, P, "vapor").ln_phi
    assert np.max(np.abs(np.log(x) + liq - np.log(y) - vap)) < 1e-8


def _gibbs_hull_split(mix: Mixture, T: float, P: float, kij, n: int = 20001):
    """Binary common-tangent compositions from the lower convex hull of g(x1) on a dense grid."""
    a_ij, b_i = _tables(mix, T, kij)
    grid = np.linspace(1e-5, 1 - 1e-5, n)
    g = np.empty(n)
    for i, x1 in enumerate(grid):
        x = np.array([x1, 1.0 - x1])
        g[i] = float(x @ (np.log(x) + fugacity_coefficients(a_ij, b_i, x, T, P, "stable").ln_phi))

    hull: list[int] = []
    for i in range(n):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (grid[a] - grid[o]) * (g[i] - g[o]) - (g[a] - g[o]) * (grid[i] - grid[o])
            if cross > 0:
                break
            hull.pop()
        hull.append(i)

    z1 = mix.z[0]
    step = grid[1] - grid[0]
    for u, v in zip(hull, hull[1:]):
        if grid[u] <= z1 <= grid[v] and grid[v] - grid[u] > 50 * step:
            return grid[u], grid[v]
    return None


# (T K, P Pa, z_CH4) for CH4/CO2 checks against brute-force Gibbs and TPD scans
BINARY_STATES = [
    (230.0, 1.5e6, 0.2),
    (230.0, 1.5e6, 0.5),
    (230.0, 2e6, 0.3),
    (230.0, 2e6, 0.6),
    (230.0, 3e6, 0.4),
    (230.0, 3e6, 0.7),
    (230.0, 4e6, 0.5),
    (240.0, 2.5e6, 0.3),
    (240.0, 2.5e6, 0.6),
    (250.0, 3e6, 0.2),
    (250.0, 3e6, 0.5),
    (250.0, 4e6, 0.4),
]


@pytest.fixture
def ch4_nc10(ch4, nc10) -> Mixture:
    return Mixture((ch4, nc10), [0.5, 0.5], name="ch4-nc10")


@pytest.fixture
def ch4_co2_nc10(ch4, co2, nc10) -> Mixture:
    return Mixture((ch4, co2, nc10), [0.4, 0.2, 0.4])


# ── Mixture ───────────────────────────────────────────────────────────────────


class TestMixture:
    """Mixture validation."""

    def test_negative_fraction_names_component(self, ch4, co2):
        with pytest.raises(InvalidInputError, match="CO2"):
            Mixture((ch4, co2), [1.1, -0.1])

    def test_sum_checked(self, ch4, co2):
        with pytest.raises(InvalidInputError, match="sum to 1"):
            Mixture((ch4, co2), [0.5, 0.4])

    def test_duplicate_names(self, ch4):
        with pytest.raises(InvalidInputError, match="Duplicate"):
            Mixture((ch4, ch4), [0.5, 0.5])

    def test_index_case_insensitive(self, ch4, co2):
        mix = Mixture((ch4, co2), [0.5, 0.5])
        assert mix.index("co2") == 1
        assert mix.index("N2") is None

    def test_composition_is_read_only(self, ch4, co2):
        mix = Mixture((ch4, co2), [0.5, 0.5])
        with pytest.raises(ValueError):
            mix.z[0] = 0.9


# ── Wilson / Rachford-Rice ────────────────────────────────────────────────────


class TestWilson:
    """Wilson K-value estimates."""

    def test_unity_at_critical_point(self, co2):
        assert wilson_k(co2, co2.Tc, co2.Pc) == pytest.approx(1.0, abs=1e-15)

    def test_half_critical_pressure(self, ch4):
        assert wilson_k(ch4, 190.564, 2.2995e6) == pytest.approx(2.0, rel=1e-12)

    def test_increasing_in_temperature(self, nc10):
        ks = [wilson_k(nc10, T, 1e6) for T in (300.0, 350.0, 400.0, 450.0)]
        assert ks == sorted(ks)


class TestRachfordRice:
    """Vapour-fraction solve."""

    def test_symmetric_case(self):
        assert rachford_rice([0.5, 0.5], [2.0, 0.5]) == pytest.approx(0.5, abs=1e-14)

    def test_matches_bisection(self):
        z, K = np.array([0.9, 0.1]), np.array([3.0, 0.01])

        def g(beta):
            return float(np.sum(z * (K - 1) / (1 + beta * (K - 1))))

        lo, hi = 1 / (1 - K.max()) + 1e-12, 1 / (1 - K.min()) - 1e-12
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) > 0:
                lo = mid
            else:
                hi = mid
        beta = rachford_rice(z, K)
        assert beta == pytest.approx(0.5 * (lo + hi), abs=1e-12)
        assert abs(g(beta)) < 1e-12

    def test_all_unity_is_single_phase(self):
        assert rachford_rice([0.3, 0.7], [1.0, 1.0]) is None

    def test_all_above_one_is_single_phase(self):
        assert rachford_rice([0.3, 0.7], [1.5, 2.0]) is None

    def test_absent_components_ignored(self):
        assert rachford_rice([0.5, 0.5, 0.0], [2.0, 0.5, 100.0]) == pytest.approx(0.5, abs=1e-14)

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            rachford_rice([0.5, 0.5], [2.0])


# ── Stability ─────────────────────────────────────────────────────────────────


class TestStability:
    """Tangent-plane stability analysis."""

    def test_supercritical_pure_component(self, ch4, table):
        mix = Mixture((ch4,), [1.0])
        kij = build_kij_matrix(mix, 250.0, table)
        assert stability_test(mix, 250.0, 10e6, kij).stable

    def test_low_pressure_is_stable(self, ch4, co2, table):
        mix = Mixture((ch4, co2), [0.5, 0.5])
        kij = build_kij_matrix(mix, 270.0, table)
        assert stability_test(mix, 270.0, 1e3, kij).stable

    @pytest.mark.parametrize("T,P,z_ch4", BINARY_STATES)
    def test_agrees_with_tpd_scan(self, ch4, co2, table, T, P, z_ch4):
        mix = Mixture((ch4, co2), [z_ch4, 1 - z_ch4])
        kij = build_kij_matrix(mix, T, table)
        a_ij, b_i = _tables(mix, T, kij)
        d = np.log(mix.z) + fugacity_coefficients(a_ij, b_i, mix.z, T, P, "stable").ln_phi
        tpd = []
        for w1 in np.linspace(5e-4, 1 - 5e-4, 2000):
            w = np.array([w1, 1 - w1])
            ln_phi = fugacity_coefficients(a_ij, b_i, w, T, P, "stable").ln_phi
            tpd.append(float(w @ (np.log(w) + ln_phi - d)))
        report = stability_test(mix, T, P, kij)
        if min(tpd) < -1e-5:
            assert not report.stable
        if not report.stable:
            # the scan step bounds how deep a narrow dip can hide
            assert min(tpd) < 1e-6

    def test_matches_dense_tpd_scan(self, ch4, co2, table):
        T, P = 270.0, 6e6
        mix = Mixture((ch4, co2), [0.5, 0.5])
        kij = build_kij_matrix(mix, T, table)
        a_ij, b_i = _tables(mix, T, kij)
        d = np.log(mix.z) + fugacity_coefficients(a_ij, b_i, mix.z, T, P, "stable").ln_phi
        tpd_min = np.inf
        for w1 in np.linspace(5e-4, 1 - 5e-4, 2000):
            w = np.array([w1, 1 - w1])
            ln_phi = fugacity_coefficients(a_ij, b_i, w, T, P, "stable").ln_phi
            tpd_min = min(tpd_min, float(w @ (np.log(w) + ln_phi - d)))
        assert stability_test(mix, T, P, kij).stable == (tpd_min >= -1e-8)

    def test_two_phase_state_is_unstable(self, ch4_nc10, table):
        kij = build_kij_matrix(ch4_nc10, 373.15, table)
        report = stability_test(ch4_nc10, 373.15, 5e6, kij)
        assert not report.stable
        assert report.tpd_min < -1e-8
        assert report.trial_composition.sum() == pytest.approx(1.0)


# ── PT flash ──────────────────────────────────────────────────────────────────


class TestPureComponentFlash:
    """A single component flips phase at its vapour pressure."""

    @pytest.mark.parametrize("name,T", [("co2", 270.0), ("ch4", 150.0)])
    def test_phase_switches_at_vapor_pressure(self, library, table, name, T):
        mix = Mixture((library[name],), [1.0])
        kij = build_kij_matrix(mix, T, table)
        p_sat = pure_saturation_pressure(library[name], T)
        below = pt_flash(mix, T, p_sat * 0.99, kij)
        above = pt_flash(mix, T, p_sat * 1.01, kij)
        assert below.phase_label == "vapor"
        assert above.phase_label == "liquid"
        assert below.phase_count == above.phase_count == 1


class TestTwoPhaseFlash:
    """Two-phase splits, warm starts and invariants of the PT flash."""

    def test_methane_decane_split(self, ch4_nc10, table):
        T, P = 373.15, 8e6
        kij = build_kij_matrix(ch4_nc10, T, table)
        result = pt_flash(ch4_nc10, T, P, kij)
        assert result.phase_label == "two-phase"
        assert result.converged
        assert result.y[0] > 0.95
        assert result.x[0] < 0.5
        assert result.Z_vapor > result.Z_liquid
        _assert_material_balance(ch4_nc10, result)
        _assert_equal_fugacity(ch4_nc10, T, P, kij, result)

    def test_ternary_split(self, ch4_co2_nc10, table):
        T, P = 373.15, 8e6
        kij = build_kij_matrix(ch4_co2_nc10, T, table)
        result = pt_flash(ch4_co2_nc10, T, P, kij)
        assert result.phase_count == 2
        _assert_material_balance(ch4_co2_nc10, result)
        _assert_equal_fugacity(ch4_co2_nc10, T, P, kij, result)

    def test_absent_component_stays_absent(self, ch4, co2, nc10, table):
        mix = Mixture((ch4, co2, nc10), [0.5, 0.0, 0.5])
        kij = build_kij_matrix(mix, 373.15, table)
        result = pt_flash(mix, 373.15, 8e6, kij)
        assert result.phase_count == 2
        assert result.x[1] == 0.0
        assert result.y[1] == 0.0

    def test_warm_start_agrees_with_cold(self, ch4_co2_nc10, table):
        T = 373.15
        kij = build_kij_matrix(ch4_co2_nc10, T, table)
        neighbour = pt_flash(ch4_co2_nc10, T, 8.5e6, kij)
        cold = pt_flash(ch4_co2_nc10, T, 8e6, kij)
        warm = pt_flash(ch4_co2_nc10, T, 8e6, kij, warm_start=(neighbour.x, neighbour.y, neighbour.beta))
        assert warm.beta == pytest.approx(cold.beta, abs=1e-9)
        np.testing.assert_allclose(warm.x, cold.x, atol=1e-9)
        np.testing.assert_allclose(warm.y, cold.y, atol=1e-9)

    @pytest.mark.slow
    @pytest.mark.parametrize("T,P,z_ch4", BINARY_STATES)
    def test_matches_gibbs_hull(self, ch4, co2, table, T, P, z_ch4):
        mix = Mixture((ch4, co2), [z_ch4, 1 - z_ch4])
        kij = build_kij_matrix(mix, T, table)
        result = pt_flash(mix, T, P, kij)
        split = _gibbs_hull_split(mix, T, P, kij)
        if split is None:
            assert result.phase_count == 1
        else:
            assert result.phase_count == 2
            assert result.x[0] == pytest.approx(split[0], abs=1e-3)
            assert result.y[0] == pytest.approx(split[1], abs=1e-3)

    def test_iteration_cap(self, ch4_nc10, table):
        kij = build_kij_matrix(ch4_nc10, 373.15, table)
        with pytest.raises(NonConvergenceError) as exc:
            pt_flash(ch4_nc10, 373.15, 8e6, kij, settings=FlashSettings(flash_max_iter=1))
        assert exc.value.last_iterate is not None
        assert exc.value.iterations == 1

    def test_kij_must_match_mixture(self, ch4_nc10, ch4, co2, table):
        other = build_kij_matrix(Mixture((ch4, co2), [0.5, 0.5]), 373.15, table)
        with pytest.raises(InvalidInputError, match="do not match"):
            pt_flash(ch4_nc10, 373.15, 8e6, other)

    @settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(z_ch4=st.floats(0.4, 0.7), pressure=st.floats(2e6, 8e6))
    def test_material_balance_property(self, ch4, nc10, table, z_ch4, pressure):
        T = 373.15
        mix = Mixture((ch4, nc10), [z_ch4, 1 - z_ch4])
        kij = build_kij_matrix(mix, T, table)
        result = pt_flash(mix, T, pressure, kij)
        _assert_material_balance(mix, result)
        if result.phase_count == 2:
            _assert_equal_fugacity(mix, T, pressure, kij, result)

    def test_flash_and_stability_agree(self, ch4_co2_nc10, table):
        T = 373.15
        kij = build_kij_matrix(ch4_co2_nc10, T, table)
        for P in (1e6, 3e6, 6e6, 9e6, 25e6, 35e6):
            two_phase = pt_flash(ch4_co2_nc10, T, P, kij).phase_count == 2
            assert two_phase == (not stability_test(ch4_co2_nc10, T, P, kij).stable)

    @settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(
        weights=st.tuples(st.floats(0.1, 1.0), st.floats(0.1, 1.0), st.floats(0.1, 1.0)),
        pressure=st.floats(2e6, 8e6),
    )
    def test_ternary_material_balance_property(self, ch4, co2, nc10, table, weights, pressure):
        T = 373.15
        z = np.array(weights) / sum(weights)
        mix = Mixture((ch4, co2, nc10), z)
        kij = build_kij_matrix(mix, T, table)
        result = pt_flash(mix, T, pressure, kij)
        _assert_material_balance(mix, result)
        if result.phase_count == 2:
            _assert_equal_fugacity(mix, T, pressure, kij, result)


@pytest.mark.slow
class TestRandomStateBank:
    """Flash and stability verdicts over seeded random CH4/CO2/nC10 states."""

    def test_flash_and_stability_agree(self, ch4, co2, nc10, table):
        rng = np.random.default_rng(20240611)
        checked = 0
        for _ in range(100):
            z = rng.dirichlet([2.0, 2.0, 2.0])
            T = float(rng.uniform(320.0, 450.0))
            P = float(rng.uniform(0.5e6, 8e6))
            mix = Mixture((ch4, co2, nc10), z)
            kij = build_kij_matrix(mix, T, table)
            # states within 1 kPa of a phase boundary are ambiguous for both tests
            if pt_flash(mix, T, P - 1e3, kij).phase_label != pt_flash(mix, T, P + 1e3, kij).phase_label:
                continue
            result = pt_flash(mix, T, P, kij)
            report = stability_test(mix, T, P, kij)
            assert (result.phase_count == 2) == (not report.stable), (z, T, P)
            _assert_material_balance(mix, result)
            if result.phase_count == 2:
                _assert_equal_fugacity(mix, T, P, kij, result)
            checked += 1
        assert checked >= 90
