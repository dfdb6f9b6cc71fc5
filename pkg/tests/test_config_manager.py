"""
Unit tests for ConfigManager class.

Tests configuration loading from YAML and JSON, environment fallbacks,
command-line overrides and saving the resolved configuration.
"""

import json
import pytest
import yaml
from managers.config_manager import ConfigManager, ConfigValidationError

# =============================================================================
# TESTS - Load
# =============================================================================


class TestConfigManagerLoad:
    """Tests for ConfigManager.load() method."""

    def test_defaults_without_file(self):
        """Test that no file gives the schema defaults."""
        manager = ConfigManager()
        assert manager.config.seed == 0
        assert manager.config.fit.undersmooth.rule == "cv"
        assert manager.config.ate.undersmooth.rule == "targeted_eic"

    def test_load_yaml(self, yaml_config_file):
        """Test loading a YAML run configuration."""
        cfg = ConfigManager(yaml_config_file).config
        assert cfg.seed == 3
        assert cfg.fit.m == 0
        assert cfg.simulation.n_grid == [60, 80]
        assert cfg.simulation.base_seed == 11

    def test_load_json(self, tmp_path, sample_run_config):
        """Test loading a JSON run configuration."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps(sample_run_config))
        assert ConfigManager(str(path)).config.simulation.replicates == 2

    def test_empty_yaml_is_defaults(self, tmp_path):
        """Test that an empty YAML file gives the defaults."""
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert ConfigManager(str(path)).config.seed == 0

    def test_missing_file(self, tmp_path):
        """Test that a missing file is an error, not silent defaults."""
        with pytest.raises(ConfigValidationError, match="does not exist"):
            ConfigManager(str(tmp_path / "nope.yaml"))

    def test_corrupt_yaml(self, corrupt_yaml_file):
        """Test that unparsable YAML raises with the source recorded."""
        with pytest.raises(ConfigValidationError) as exc_info:
            ConfigManager(corrupt_yaml_file)
        assert exc_info.value.source == corrupt_yaml_file
        assert exc_info.value.errors

    def test_invalid_value(self, tmp_path):
        """Test that schema violations carry the field path."""
        path = tmp_path / "bad.yaml"
        with open(path, "w") as f:
            yaml.safe_dump({"ate": {"cv": {"folds": 1}}}, f)
        with pytest.raises(ConfigValidationError) as exc_info:
            ConfigManager(str(path))
        assert "ate -> cv -> folds" in str(exc_info.value)

    def test_non_mapping_file(self, tmp_path):
        """Test that a YAML list is rejected."""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigValidationError, match="Expected dictionary"):
            ConfigManager(str(path))


# =============================================================================
# TESTS - Environment and Overrides
# =============================================================================


class TestConfigManagerOverrides:
    """Tests for apply_environment() and apply_overrides()."""

    def test_environment_fills_unset_values(self):
        """Test that environment values apply when the file leaves them unset."""
        cfg = ConfigManager().apply_environment(threads=4, out="/tmp/hal")
        assert cfg.threads == 4
        assert cfg.out == "/tmp/hal"

    def test_file_beats_environment(self, tmp_path):
        """Test that file values win over the environment."""
        path = tmp_path / "run.yaml"
        path.write_text("threads: 2\nout: results\n")
        cfg = ConfigManager(str(path)).apply_environment(threads=8, out="/tmp/hal")
        assert cfg.threads == 2
        assert cfg.out == "results"

    def test_study_worker_count_from_file_beats_environment(self, tmp_path):
        """Test that simulation.threads in the file is not replaced by the environment."""
        path = tmp_path / "study.yaml"
        path.write_text("simulation:\n  threads: 1\n")
        cfg = ConfigManager(str(path)).apply_environment(threads=64)
        assert cfg.threads is None
        assert (cfg.threads or cfg.simulation.threads) == 1

    def test_environment_threads_without_study_setting(self, tmp_path):
        """Test that the environment still fills threads when the file sets no worker count."""
        path = tmp_path / "study.yaml"
        path.write_text("simulation:\n  replicates: 3\n")
        cfg = ConfigManager(str(path)).apply_environment(threads=64)
        assert cfg.threads == 64

    def test_command_line_beats_file(self, yaml_config_file):
        """Test that overrides win over the file."""
        manager = ConfigManager(yaml_config_file)
        manager.apply_environment(threads=8)
        cfg = manager.apply_overrides(seed=42, threads=3)
        assert cfg.seed == 42
        assert cfg.simulation.base_seed == 42
        assert cfg.ate.cv.seed == 42
        assert cfg.threads == 3
        assert cfg.simulation.threads == 3
        assert cfg.fit.cv.threads == 3
        assert cfg.simulation.ate.cv.threads == 3
        assert cfg.simulation.density.cv.threads == 3

    def test_rule_override(self):
        """Test that the rule reaches every estimand and the study estimators."""
        cfg = ConfigManager().apply_overrides(rule="sparse_support")
        assert cfg.fit.undersmooth.rule == "sparse_support"
        assert cfg.density.undersmooth.rule == "sparse_support"
        assert cfg.simulation.estimators == ["sparse_support"]

    def test_order_and_grid_overrides(self):
        """Test m and grid-size overrides."""
        cfg = ConfigManager().apply_overrides(m=1, grid_size=25)
        assert cfg.fit.m == 1
        assert cfg.ate.m == 1
        assert cfg.ate.cv.n_lambda == 25
        assert cfg.density.cv.n_lambda == 25

    def test_invalid_override(self):
        """Test that an out-of-range override is rejected and leaves the config unchanged."""
        manager = ConfigManager()
        with pytest.raises(ConfigValidationError):
            manager.apply_overrides(m=7)
        assert manager.config.fit.m is None

    def test_no_overrides_is_identity(self, yaml_config_file):
        """Test that applying nothing changes nothing."""
        manager = ConfigManager(yaml_config_file)
        before = manager.config
        assert manager.apply_overrides() == before


# =============================================================================
# TESTS - Save
# =============================================================================


class TestConfigManagerSave:
    """Tests for ConfigManager.save() method."""

    def test_save_writes_resolved_json(self, tmp_path, yaml_config_file):
        """Test save writes the resolved configuration."""
        manager = ConfigManager(yaml_config_file)
        manager.apply_overrides(seed=9)
        path = tmp_path / "nested" / "resolved_config.json"
        assert manager.save(str(path)) is True
        with open(path) as f:
            saved = json.load(f)
        assert saved["seed"] == 9
        assert saved["simulation"]["n_grid"] == [60, 80]

    def test_saved_file_reloads(self, tmp_path, yaml_config_file):
        """Test that a saved configuration loads back to the same values."""
        manager = ConfigManager(yaml_config_file)
        path = tmp_path / "resolved.json"
        manager.save(str(path))
        assert ConfigManager(str(path)).config == manager.config

    def test_save_returns_false_on_error(self, tmp_path, mocker):
        """Test save returns False on file I/O error."""
        manager = ConfigManager()
        mocker.patch("builtins.open", side_effect=OSError("disk full"))
        assert manager.save(str(tmp_path / "resolved.json")) is False


# =============================================================================
# TESTS - ConfigValidationError
# =============================================================================


class TestConfigValidationError:
    """Tests for ConfigValidationError formatting."""

    def test_message_only(self):
        assert str(ConfigValidationError("bad")) == "bad"

    def test_message_with_errors(self):
        error = ConfigValidationError("Invalid run configuration", ["a: x", "b: y"], source="run.yaml")
        assert str(error) == "Invalid run configuration: a: x; b: y"
        assert error.source == "run.yaml"
