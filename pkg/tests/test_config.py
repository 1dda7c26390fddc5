"""
Tests for configuration.
"""

from unittest.mock import patch

import pytest

from app.config import get_config, load_config_file, quadrature_config_from, resolve_settings
from app.errors import InvalidArgumentError


@pytest.mark.unit
class TestConfig:
    """Tests for configuration functions."""

    def test_get_config_defaults(self):
        """Test getting config with default values."""
        with patch.dict("os.environ", {}, clear=True):
            config = get_config()
            assert config["HEAT_DIGITS"] == 60
            assert config["HEAT_GRID_RATIO"] == 0.5
            assert config["HEAT_RICHARDSON_DEPTH"] == 9
            assert config["HEAT_T0"] is None
            assert config["HEAT_TAIL_EPSILON"] is None
            assert config["HEAT_OUTPUT_PRECISION"] == 20
            assert config["LOG_LEVEL"] == "INFO"

    def test_get_config_from_env(self):
        """Test getting config from environment variables."""
        with patch.dict(
            "os.environ",
            {
                "HEAT_DIGITS": "80",
                "HEAT_T0": "0.001",
                "HEAT_TAIL_EPSILON": "1e-90",
                "LOG_LEVEL": "debug",
                "CELERY_BROKER_URL": "redis://broker:6379/1",
            },
        ):
            config = get_config()
            assert config["HEAT_DIGITS"] == 80
            assert config["HEAT_T0"] == 0.001
            assert config["HEAT_TAIL_EPSILON"] == 1e-90
            assert config["LOG_LEVEL"] == "DEBUG"
            assert config["CELERY_BROKER_URL"] == "redis://broker:6379/1"

    def test_get_config_int_conversion(self):
        """Test that integer config values are converted."""
        with patch.dict("os.environ", {"HEAT_DIGITS": "70", "HEAT_RICHARDSON_DEPTH": "6"}):
            config = get_config()
            assert isinstance(config["HEAT_DIGITS"], int)
            assert isinstance(config["HEAT_RICHARDSON_DEPTH"], int)

    def test_get_config_bad_value(self):
        """Test a malformed number is an invalid argument."""
        with patch.dict("os.environ", {"HEAT_DIGITS": "many"}):
            with pytest.raises(InvalidArgumentError):
                get_config()


@pytest.mark.unit
class TestConfigFile:
    """Tests for key=value settings files."""

    def test_load_config_file(self, tmp_path):
        """Test typed values from a file."""
        path = tmp_path / "heat.env"
        path.write_text("HEAT_DIGITS=90\nHEAT_GRID_RATIO=0.25\n# comment\nHEAT_T0=none\n")
        values = load_config_file(path)
        assert values == {"HEAT_DIGITS": 90, "HEAT_GRID_RATIO": 0.25, "HEAT_T0": None}

    def test_unknown_key(self, tmp_path):
        """Test unknown keys are rejected."""
        path = tmp_path / "heat.env"
        path.write_text("HEAT_DIGITZ=90\n")
        with pytest.raises(InvalidArgumentError, match="HEAT_DIGITZ"):
            load_config_file(path)

    def test_missing_file(self, tmp_path):
        """Test a missing file is an invalid argument."""
        with pytest.raises(InvalidArgumentError):
            load_config_file(tmp_path / "absent.env")

    def test_precedence(self, tmp_path):
        """Test defaults < environment < file < overrides."""
        path = tmp_path / "heat.env"
        path.write_text("HEAT_DIGITS=90\nHEAT_RICHARDSON_DEPTH=7\n")
        with patch.dict("os.environ", {"HEAT_DIGITS": "70", "HEAT_GRID_RATIO": "0.4", "HEAT_RICHARDSON_DEPTH": "5"}):
            settings = resolve_settings(path, HEAT_RICHARDSON_DEPTH=8, HEAT_T0=None)
        assert settings["HEAT_GRID_RATIO"] == 0.4
        assert settings["HEAT_DIGITS"] == 90
        assert settings["HEAT_RICHARDSON_DEPTH"] == 8
        assert settings["HEAT_T0"] is None

    def test_quadrature_config_from(self, so2):
        """Test the oracle config derived from settings."""
        with patch.dict("os.environ", {}, clear=True):
            settings = get_config()
        settings.update(HEAT_DIGITS=50, HEAT_RICHARDSON_DEPTH=3)
        config = quadrature_config_from(settings, so2)
        assert config.decimal_digits == 50
        assert config.tail_epsilon == pytest.approx(1e-60)
        assert config.t_grid == pytest.approx((0.04, 0.02, 0.01, 0.005))
        assert config.richardson_depth == 3
