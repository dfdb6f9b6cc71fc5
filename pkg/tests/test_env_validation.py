"""
Unit tests for environment variable validation.

Tests the HAL_* variables with valid and invalid values to check that bad
values fall back to defaults with a warning.
"""

import os

import pytest
from env_validation import (
    DEFAULT_LOG_LEVEL,
    DEFAULT_OUTPUT_PATH,
    validate_boolean,
    validate_enum,
    validate_environment_variables,
    validate_integer,
)

HAL_VARIABLES = ("HAL_THREADS", "HAL_LOG_LEVEL", "HAL_OUTPUT_PATH", "HAL_LOG_FILE")


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Start every test without HAL_* variables."""
    for name in HAL_VARIABLES:
        monkeypatch.delenv(name, raising=False)


# =============================================================================
# TESTS - Helpers
# =============================================================================


class TestValidateInteger:
    """Tests for validate_integer()."""

    @pytest.mark.parametrize(
        "value,expected_valid,expected",
        [
            ("8", True, 8),
            ("invalid", False, 4),
            ("0", False, 4),
            ("5000", False, 4),
        ],
    )
    def test_values(self, monkeypatch, value, expected_valid, expected):
        monkeypatch.setenv("HAL_THREADS", value)
        is_valid, parsed, warning = validate_integer("HAL_THREADS", "4", min_value=1, max_value=1024)
        assert is_valid is expected_valid
        assert parsed == expected
        assert (warning == "") is expected_valid

    def test_unset_uses_default(self):
        assert validate_integer("HAL_THREADS", "4") == (True, 4, "")


class TestValidateBoolean:
    """Tests for validate_boolean()."""

    @pytest.mark.parametrize(
        "value,expected", [("1", True), ("true", True), ("yes", True), ("0", False), ("off", False)]
    )
    def test_accepted_spellings(self, monkeypatch, value, expected):
        monkeypatch.setenv("HAL_LOG_FILE", value)
        assert validate_boolean("HAL_LOG_FILE", "1")[:2] == (True, expected)

    def test_invalid(self, monkeypatch):
        monkeypatch.setenv("HAL_LOG_FILE", "maybe")
        is_valid, value, warning = validate_boolean("HAL_LOG_FILE", "1")
        assert is_valid is False
        assert value is True
        assert "HAL_LOG_FILE" in warning


class TestValidateEnum:
    """Tests for validate_enum()."""

    def test_case_insensitive(self, monkeypatch):
        monkeypatch.setenv("HAL_LOG_LEVEL", "debug")
        assert validate_enum("HAL_LOG_LEVEL", "INFO", ["DEBUG", "INFO"]) == (True, "debug", "")

    def test_unknown_value(self, monkeypatch):
        monkeypatch.setenv("HAL_LOG_LEVEL", "LOUD")
        is_valid, value, warning = validate_enum("HAL_LOG_LEVEL", "INFO", ["DEBUG", "INFO"])
        assert is_valid is False
        assert value == "INFO"
        assert "must be one of" in warning


# =============================================================================
# TESTS - validate_environment_variables()
# =============================================================================


class TestValidateEnvironmentVariables:
    """Tests for validate_environment_variables()."""

    def test_defaults(self):
        result = validate_environment_variables()
        assert result["valid"] is True
        assert result["warnings"] == []
        variables = result["variables"]
        assert variables["HAL_THREADS"] == (os.cpu_count() or 1)
        assert variables["HAL_LOG_LEVEL"] == DEFAULT_LOG_LEVEL
        assert variables["HAL_OUTPUT_PATH"] == DEFAULT_OUTPUT_PATH
        assert variables["HAL_LOG_FILE"] is True

    def test_custom_values(self, monkeypatch):
        monkeypatch.setenv("HAL_THREADS", "3")
        monkeypatch.setenv("HAL_LOG_LEVEL", "warning")
        monkeypatch.setenv("HAL_OUTPUT_PATH", "/data/out")
        monkeypatch.setenv("HAL_LOG_FILE", "0")
        result = validate_environment_variables()
        assert result["valid"] is True
        assert result["variables"] == {
            "HAL_THREADS": 3,
            "HAL_LOG_LEVEL": "WARNING",
            "HAL_OUTPUT_PATH": "/data/out",
            "HAL_LOG_FILE": False,
        }

    def test_invalid_values_fall_back(self, monkeypatch):
        monkeypatch.setenv("HAL_THREADS", "many")
        monkeypatch.setenv("HAL_LOG_LEVEL", "TRACE")
        monkeypatch.setenv("HAL_OUTPUT_PATH", "   ")
        result = validate_environment_variables()
        assert result["valid"] is False
        assert len(result["warnings"]) == 3
        assert result["variables"]["HAL_LOG_LEVEL"] == DEFAULT_LOG_LEVEL
        assert result["variables"]["HAL_OUTPUT_PATH"] == DEFAULT_OUTPUT_PATH
