"""Pytest fixtures: charts, reduced systems and the bundled problem documents.

Usage in tests:
    def test_something(kdv_a):
        V1, V2 = kdv_a.vessiot
        assert not V1.coeff("u_xxx").is_zero()
"""

from __future__ import annotations

import os
import random
from pathlib import Path

import pytest

from edswaves.config import get_settings
from edswaves.jettw import EvolutionPDE, TWSystem, reduce
from edswaves.symcore import Chart, jet_chart

ROOT = Path(__file__).resolve().parent.parent
PROBLEMS = ROOT / "problems"
CORPUS = ROOT / "corpus"


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test sees default settings; tests that set EDS_WAVES_* get them re-read."""
    for name in list(os.environ):
        if name.startswith("EDS_WAVES_"):
            monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return random.Random(20240607)


@pytest.fixture
def plane() -> Chart:
    return Chart(("x", "y"))


@pytest.fixture
def space() -> Chart:
    return Chart(("x", "y", "z"))


@pytest.fixture
def jet3() -> Chart:
    return jet_chart(3, ("c",))


def _reduce(F: str, order: int = 3) -> TWSystem:
    return reduce(EvolutionPDE.from_text(order, F, ("c",)))


@pytest.fixture(scope="session")
def kdv_a() -> TWSystem:
    """u_t = -u u_x + u_xxx."""
    return _reduce("-u*u_x + u_xxx")


@pytest.fixture(scope="session")
def kdv_b() -> TWSystem:
    """u_t = -u u_x - u_xxx."""
    return _reduce("-u*u_x - u_xxx")


@pytest.fixture(scope="session")
def linear() -> TWSystem:
    """u_t = u_xxx."""
    return _reduce("u_xxx")


@pytest.fixture(scope="session")
def burgers() -> TWSystem:
    """u_t = u u_x + u_xx."""
    return _reduce("u*u_x + u_xx", order=2)


@pytest.fixture
def problems_dir() -> Path:
    return PROBLEMS
