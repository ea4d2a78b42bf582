"""Tests for fluid files and the component library."""

import logging

import numpy as np
import pytest
from pathlib import Path

from kij_bench.errors import ParseError
from kij_bench.fluid import dump_fluid, load_component_library, load_fluid

REPO_ROOT = Path(__file__).parent.parent
FLUIDS = REPO_ROOT / "sample_test_data" / "fluids"


def _fluid(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "fluid.yaml"
    path.write_text(text)
    return path


class TestLibrary:
    """The bundled component library."""

    def test_bundled_library(self, library):
        assert {"ch4", "co2", "nc10", "n2"} <= set(library)
        assert library["co2"].Pc == pytest.approx(7.383e6)
        assert dict(library["nc10"].groups) == {"CH3": 2, "CH2": 8}

    def test_cached(self, library):
        assert load_component_library() is library

    def test_entry_missing_constant(self, tmp_path):
        path = tmp_path / "lib.yaml"
        path.write_text("components:\n  - {name: X, Tc_K: 300, omega: 0.1, groups: {CH4: 1}, source: s}\n")
        with pytest.raises(ParseError, match="Pc_MPa") as exc:
            load_component_library(path)
        assert exc.value.line == 2


class TestLoadFluid:
    """Fluid YAML loading."""

    def test_sample_binary(self, table):
        mix = load_fluid(FLUIDS / "ch4-co2.yaml", table=table)
        assert mix.names == ("CH4", "CO2")
        np.testing.assert_allclose(mix.z, [0.9, 0.1])
        assert mix.name == "ch4-co2"

    def test_sample_oil_has_co2_slot(self, table):
        mix = load_fluid(FLUIDS / "ch4-nc10-co2.yaml", table=table)
        assert mix.index("CO2") == 2
        assert mix.z[2] == 0.0

    def test_live_oil_schema_example(self, table):
        mix = load_fluid(FLUIDS / "live-oil.example.yaml", table=table)
        assert mix.names[-1] == "C7+"
        assert mix.z.sum() == pytest.approx(1.0, abs=1e-12)

    def test_two_components(self, tmp_path):
        mix = load_fluid(_fluid(tmp_path, "components:\n  - {ref: CH4, fraction: 0.6}\n  - {ref: CO2, fraction: 0.4}\n"))
        np.testing.assert_allclose(mix.z, [0.6, 0.4])
        assert mix.name == "fluid"

    def test_constant_override(self, tmp_path):
        mix = load_fluid(_fluid(tmp_path, "components:\n  - {ref: nC10, fraction: 1.0, omega: 0.49}\n"))
        assert mix.components[0].omega == 0.49
        assert mix.components[0].Tc == pytest.approx(617.70)

    def test_renormalized_with_warning(self, tmp_path, caplog):
        path = _fluid(tmp_path, "components:\n  - {ref: CH4, fraction: 0.6}\n  - {ref: CO2, fraction: 0.399999}\n")
        with caplog.at_level(logging.WARNING, logger="kij_bench.fluid"):
            mix = load_fluid(path)
        assert mix.z.sum() == pytest.approx(1.0, abs=1e-15)
        assert "renormalizing" in caplog.text

    def test_sum_far_from_one(self, tmp_path):
        with pytest.raises(ParseError, match="sum to 0.9"):
            load_fluid(_fluid(tmp_path, "components:\n  - {ref: CH4, fraction: 0.5}\n  - {ref: CO2, fraction: 0.4}\n"))

    def test_negative_fraction_names_component(self, tmp_path):
        path = _fluid(tmp_path, "components:\n  - {ref: CH4, fraction: 1.1}\n  - {ref: CO2, fraction: -0.1}\n")
        with pytest.raises(ParseError, match="'CO2' is negative") as exc:
            load_fluid(path)
        assert exc.value.line == 3

    def test_duplicate_component(self, tmp_path):
        path = _fluid(tmp_path, "components:\n  - {ref: CH4, fraction: 0.5}\n  - {ref: ch4, fraction: 0.5}\n")
        with pytest.raises(ParseError, match="Duplicate component"):
            load_fluid(path)

    def test_unknown_group_located(self, tmp_path, table):
        text = (
            "components:\n"
            "  - {ref: CH4, fraction: 0.5}\n"
            "  - name: ethanol\n"
            "    Tc_K: 514.0\n"
            "    Pc_MPa: 6.137\n"
            "    omega: 0.644\n"
            "    groups: {CH3: 1, CH2OH: 1}\n"
            "    fraction: 0.5\n"
        )
        with pytest.raises(ParseError, match="Unknown group 'CH2OH'") as exc:
            load_fluid(_fluid(tmp_path, text), table=table)
        assert exc.value.line == 7

    def test_unknown_library_reference(self, tmp_path):
        with pytest.raises(ParseError, match="Unknown library component 'C99'"):
            load_fluid(_fluid(tmp_path, "components:\n  - {ref: C99, fraction: 1.0}\n"))

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ParseError, match="Unknown keys"):
            load_fluid(_fluid(tmp_path, "components:\n  - {ref: CH4, fraction: 1.0, colour: blue}\n"))

    def test_malformed_yaml(self, tmp_path):
        with pytest.raises(ParseError) as exc:
            load_fluid(_fluid(tmp_path, "components:\n  - {ref: CH4, fraction: 1.0\n"))
        assert exc.value.line is not None

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_fluid(tmp_path / "absent.yaml")


class TestDumpFluid:
    """Fluid YAML writing."""

    def test_dump_is_self_contained(self, tmp_path, table):
        original = load_fluid(FLUIDS / "ch4-nc10-co2.yaml", table=table)
        path = tmp_path / "out.yaml"
        dump_fluid(original, path, source="test")
        reloaded = load_fluid(path, library={}, table=table)
        assert reloaded.names == original.names
        np.testing.assert_array_equal(reloaded.z, original.z)
        for got, want in zip(reloaded.components, original.components):
            assert (got.Tc, got.omega, got.groups, got.source) == (want.Tc, want.omega, want.groups, want.source)
            assert got.Pc == pytest.approx(want.Pc, rel=1e-12)
