"""Tests for gkm_config.py (environment defaults and logging setup).

Run:
    pytest tests/test_gkm_config.py -v
"""

import logging

import pytest

from gkm_config import configure_logging, get_run_defaults_from_env


class TestRunDefaults:
    """get_run_defaults_from_env with explicit mappings."""

    def test_defaults(self):
        """Test defaults with an empty environment."""
        assert get_run_defaults_from_env({}) == {
            "seed": 0,
            "k_max": 3,
            "output_format": "tsv",
            "strict": False,
            "log_level": "WARNING",
        }

    def test_overrides(self):
        """Test every GKM_* variable is honoured."""
        defaults = get_run_defaults_from_env({
            "GKM_SEED": "11",
            "GKM_KMAX": "5",
            "GKM_FORMAT": "JSON",
            "GKM_STRICT": "yes",
            "GKM_LOG": "debug",
        })
        assert defaults["seed"] == 11
        assert defaults["k_max"] == 5
        assert defaults["output_format"] == "json"
        assert defaults["strict"] is True
        assert defaults["log_level"] == "DEBUG"

    @pytest.mark.parametrize("value", ["0", "false", "no", ""])
    def test_strict_off(self, value):
        """Test falsy GKM_STRICT values."""
        assert get_run_defaults_from_env({"GKM_STRICT": value})["strict"] is False

    def test_bad_values_fall_back(self, caplog):
        """Test unparsable values fall back with a warning."""
        with caplog.at_level(logging.WARNING):
            defaults = get_run_defaults_from_env({"GKM_SEED": "abc", "GKM_KMAX": "", "GKM_FORMAT": "xml"})
        assert defaults["seed"] == 0
        assert defaults["k_max"] == 3
        assert defaults["output_format"] == "tsv"
        assert "GKM_SEED" in caplog.text
        assert "GKM_FORMAT" in caplog.text

    def test_reads_process_environment(self, monkeypatch):
        """Test os.environ is read when no mapping is given."""
        monkeypatch.setenv("GKM_KMAX", "7")
        assert get_run_defaults_from_env()["k_max"] == 7


class TestConfigureLogging:
    """configure_logging sets the root level."""

    def setup_method(self):
        root = logging.getLogger()
        self.saved = (root.handlers[:], root.level)

    def teardown_method(self):
        root = logging.getLogger()
        root.handlers[:], level = self.saved
        root.setLevel(level)

    def test_level(self):
        """Test a named level is applied to the root logger."""
        configure_logging("debug")
        assert logging.getLogger().level == logging.DEBUG

    def test_unknown_level_defaults_to_warning(self):
        """Test an unknown level falls back to WARNING."""
        configure_logging("chatty")
        assert logging.getLogger().level == logging.WARNING
