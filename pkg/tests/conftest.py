"""Shared pytest fixtures for kij-bench tests."""

import pytest
from pathlib import Path

from kij_bench.fluid import clear_library_cache, load_component_library
from kij_bench.mixing import clear_table_cache, load_group_table

REPO_ROOT = Path(__file__).parent.parent
SAMPLE_DATA_DIR = REPO_ROOT / "sample_test_data"


@pytest.fixture
def sample_data_dir() -> Path:
    return SAMPLE_DATA_DIR


@pytest.fixture
def table():
    return load_group_table()


@pytest.fixture
def library():
    return load_component_library()


@pytest.fixture
def ch4(library):
    return library["ch4"]


@pytest.fixture
def co2(library):
    return library["co2"]


@pytest.fixture
def nc10(library):
    return library["nc10"]


@pytest.fixture(autouse=True)
def _fresh_caches():
    yield
    clear_table_cache()
    clear_library_cache()
