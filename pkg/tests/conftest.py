"""
Pytest configuration and fixtures for testing.
"""

import os

import pytest

# Keep INFO lines off the CLI output before anything reads the config
os.environ.setdefault("LOG_LEVEL", "WARNING")

from app.models import QuadratureConfig, SpectralParams  # noqa: E402
from app.services.catalog import describe  # noqa: E402
from app.services.oracle import quadrature_config  # noqa: E402


@pytest.fixture
def unit_params():
    """chi(1) = 1, unit volume, no zero modes."""
    return SpectralParams()


@pytest.fixture
def so2():
    return describe("so", 2)


@pytest.fixture
def so3():
    return describe("so", 3)


@pytest.fixture
def so4():
    return describe("so", 4)


@pytest.fixture
def su2():
    return describe("su", 2)


@pytest.fixture
def su3():
    return describe("su", 3)


@pytest.fixture
def f4():
    return describe("f4")


@pytest.fixture
def fast_config(so3):
    """40 digits on a seven point grid; enough for k <= 1."""
    return quadrature_config(so3, decimal_digits=40, depth=6)


@pytest.fixture
def oracle_config():
    """Builds the default oracle config for a descriptor at the given digits."""

    def build(desc, digits: int = 60) -> QuadratureConfig:
        return quadrature_config(desc, decimal_digits=digits)

    return build
