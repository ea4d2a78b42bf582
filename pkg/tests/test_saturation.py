"""Tests for bubble/dew pressures and CO2-loading sweeps."""

import logging
import math

import numpy as np
import pytest

from kij_bench.config import SaturationSettings
from kij_bench.eos import pure_saturation_pressure
from kij_bench.errors import BracketError, InvalidInputError
from kij_bench.flash import Mixture, pt_flash
from kij_bench.mixing import build_kij_matrix
from kij_bench.saturation import (
    SaturationCurve,
    SaturationPoint,
    envelope_sweep,
    saturation_pressure,
    strategy_discrepancies,
    with_co2_loading,
)

T_OIL = 373.15


@pytest.fixture
def base_oil(ch4, nc10, co2) -> Mixture:
    return Mixture((ch4, nc10, co2), [0.5, 0.5, 0.0], name="ch4-nc10")


@pytest.fixture
def oil_kij(base_oil, table):
    return build_kij_matrix(base_oil, T_OIL, table)


def _point(z: float, p: float, converged: bool = True) -> SaturationPoint:
    return SaturationPoint(T=T_OIL, z_CO2=z, kind="bubble", p=p, converged=converged)


class TestCo2Loading:
    """Adding CO2 to a base oil."""

    def test_rest_keeps_its_ratios(self, base_oil):
        loaded = with_co2_loading(base_oil, 0.3)
        assert loaded.z.sum() == pytest.approx(1.0, abs=1e-15)
        assert loaded.z[2] == pytest.approx(0.3)
        assert loaded.z[0] == pytest.approx(0.35)
        assert loaded.z[1] == pytest.approx(0.35)
        assert loaded.name == "ch4-nc10"

    def test_needs_co2_component(self, ch4, nc10):
        oil = Mixture((ch4, nc10), [0.5, 0.5], name="dead")
        with pytest.raises(InvalidInputError, match="no CO2"):
            with_co2_loading(oil, 0.1)

    def test_loading_range(self, base_oil):
        with pytest.raises(InvalidInputError, match=r"\[0, 1\)"):
            with_co2_loading(base_oil, 1.0)


class TestPureComponent:
    """Saturation pressure of lone components."""

    @pytest.mark.parametrize("kind", ["bubble", "dew"])
    def test_matches_vapor_pressure(self, co2, table, kind):
        T = 270.0
        mix = Mixture((co2,), [1.0])
        kij = build_kij_matrix(mix, T, table)
        point = saturation_pressure(mix, T, kind, kij)
        assert point.converged
        assert point.kind == kind
        assert point.p == pytest.approx(pure_saturation_pressure(co2, T), abs=2e3)

    @pytest.mark.parametrize("kind", ["bubble", "dew", "auto"])
    def test_supercritical_component_has_no_boundary(self, ch4, table, kind):
        T = 250.0
        mix = Mixture((ch4,), [1.0])
        kij = build_kij_matrix(mix, T, table)
        with pytest.raises(BracketError):
            saturation_pressure(mix, T, kind, kij)


class TestSaturationPressure:
    """Bubble and dew pressures of mixtures."""

    def test_bubble_point_of_loaded_oil(self, base_oil, oil_kij):
        mix = with_co2_loading(base_oil, 0.2)
        point = saturation_pressure(mix, T_OIL, "bubble", oil_kij)
        assert point.kind == "bubble"
        assert point.z_CO2 == pytest.approx(0.2)
        assert 1e6 < point.p < 40e6
        assert point.edge is not None and point.edge.phase_count == 2
        assert point.iterations > 0

    def test_boundary_within_five_kpa(self, base_oil, oil_kij):
        mix = with_co2_loading(base_oil, 0.2)
        p = saturation_pressure(mix, T_OIL, "auto", oil_kij).p
        below = pt_flash(mix, T_OIL, p - 5e3, oil_kij)
        above = pt_flash(mix, T_OIL, p + 5e3, oil_kij)
        assert below.phase_label == "two-phase"
        assert above.phase_label == "liquid"

    def test_matches_dense_pressure_scan(self, ch4, co2, table):
        T = 230.0
        mix = Mixture((ch4, co2), [0.9, 0.1])
        kij = build_kij_matrix(mix, T, table)
        settings = SaturationSettings()
        pressures = np.geomspace(settings.p_lo, settings.p_hi, 500)
        labels = [pt_flash(mix, T, float(p), kij).phase_label for p in pressures]
        transitions = [i for i in range(len(labels) - 1) if labels[i] != labels[i + 1]]
        if not transitions:
            with pytest.raises(BracketError):
                saturation_pressure(mix, T, "auto", kij)
            return
        i = transitions[-1]
        point = saturation_pressure(mix, T, "auto", kij)
        assert pressures[i] - settings.p_tol <= point.p <= pressures[i + 1] + settings.p_tol

    def test_requested_kind_must_match_crossing(self, base_oil, oil_kij):
        mix = with_co2_loading(base_oil, 0.2)
        with pytest.raises(BracketError, match="Requested a dew point but .* is a bubble point"):
            saturation_pressure(mix, T_OIL, "dew", oil_kij)

    def test_bracket_without_boundary(self, base_oil, oil_kij):
        mix = with_co2_loading(base_oil, 0.2)
        with pytest.raises(BracketError, match="does not straddle") as exc:
            saturation_pressure(mix, T_OIL, "bubble", oil_kij, bracket=(1e6, 2e6))
        assert exc.value.lo_state == exc.value.hi_state == "two-phase"

    def test_unknown_kind(self, base_oil, oil_kij):
        with pytest.raises(InvalidInputError, match="Unknown saturation kind"):
            saturation_pressure(base_oil, T_OIL, "critical", oil_kij)

    def test_inverted_bracket(self, base_oil, oil_kij):
        with pytest.raises(InvalidInputError, match="p_lo < p_hi"):
            saturation_pressure(base_oil, T_OIL, "bubble", oil_kij, bracket=(5e6, 1e6))


class TestEnvelopeSweep:
    """Sweeps over CO2 loading, cold and warm."""

    def test_empty_grid(self, base_oil, oil_kij):
        curve = envelope_sweep(base_oil, [], T_OIL, oil_kij)
        assert curve.points == ()
        assert curve.failures == []

    def test_fractions_must_increase(self, base_oil, oil_kij):
        with pytest.raises(InvalidInputError, match="strictly increasing"):
            envelope_sweep(base_oil, [0.2, 0.1], T_OIL, oil_kij)

    def test_unknown_strategy(self, base_oil, oil_kij):
        with pytest.raises(InvalidInputError, match="strategy"):
            envelope_sweep(base_oil, [0.1], T_OIL, oil_kij, strategy="lukewarm")

    def test_warm_and_cold_agree(self, base_oil, oil_kij):
        grid = [0.0, 0.1, 0.2, 0.3]
        cold = envelope_sweep(base_oil, grid, T_OIL, oil_kij, strategy="cold")
        warm = envelope_sweep(base_oil, grid, T_OIL, oil_kij, strategy="warm")
        assert [p.z_CO2 for p in warm.points] == grid
        assert not cold.failures and not warm.failures
        for a, b in zip(cold.points, warm.points):
            assert a.p == pytest.approx(b.p, abs=2e3)
        assert strategy_discrepancies(cold, warm) == []

    def test_threaded_cold_sweep_is_deterministic(self, base_oil, oil_kij):
        grid = [0.0, 0.2]
        serial = envelope_sweep(base_oil, grid, T_OIL, oil_kij)
        threaded = envelope_sweep(base_oil, grid, T_OIL, oil_kij, max_workers=2)
        assert [p.p for p in serial.points] == [p.p for p in threaded.points]

    def test_failures_recorded_inline(self, base_oil, oil_kij):
        narrow = SaturationSettings(p_lo=1e6, p_hi=2e6)
        curve = envelope_sweep(base_oil, [0.1, 0.2], T_OIL, oil_kij, settings=narrow)
        assert len(curve.points) == 2
        assert len(curve.failures) == 2
        assert all(math.isnan(p.p) for p in curve.points)
        assert "straddle" in curve.points[0].message

    @pytest.mark.slow
    def test_warm_sweep_uses_fewer_iterations(self, base_oil, oil_kij):
        grid = [round(0.03 * i, 2) for i in range(20)]
        cold = envelope_sweep(base_oil, grid, T_OIL, oil_kij, strategy="cold")
        warm = envelope_sweep(base_oil, grid, T_OIL, oil_kij, strategy="warm")
        assert warm.total_iterations <= cold.total_iterations
        kinds = [p.kind for p in warm.points]
        # bubble points first, then dew points once the curve turns over
        assert kinds == sorted(kinds)


class TestStrategyDiscrepancies:
    """Cold and warm sweeps that disagree get logged."""

    def test_flags_only_large_differences(self, caplog):
        cold = SaturationCurve(T_OIL, (_point(0.1, 10e6), _point(0.2, 11e6)))
        warm = SaturationCurve(T_OIL, (_point(0.1, 10.001e6), _point(0.2, 11.005e6)), strategy="warm")
        with caplog.at_level(logging.WARNING, logger="kij_bench.saturation"):
            found = strategy_discrepancies(cold, warm)
        assert len(found) == 1
        assert found[0][0] == 0.2
        assert found[0][1] == pytest.approx(5e3)
        assert "disagree" in caplog.text

    def test_failed_points_ignored(self):
        cold = SaturationCurve(T_OIL, (_point(0.1, 10e6),))
        warm = SaturationCurve(T_OIL, (_point(0.1, math.nan, converged=False),))
        assert strategy_discrepancies(cold, warm) == []

    def test_curve_requires_increasing_z(self):
        with pytest.raises(InvalidInputError):
            SaturationCurve(T_OIL, (_point(0.2, 1e6), _point(0.1, 1e6)))
