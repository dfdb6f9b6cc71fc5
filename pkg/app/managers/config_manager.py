"""
Configuration Manager for run settings.

Handles loading, overriding, validating and persisting run configurations
stored as YAML or JSON. Every change goes through the pydantic schema, so
the configuration held by the manager is always valid.
"""

import copy
import json
import logging
import os
from typing import Any

import yaml
from schemas.run_config import RunConfig, get_default_config, validate_run_config

logger = logging.getLogger(__name__)

# File extensions read as JSON; everything else is read as YAML
JSON_EXTENSIONS = (".json",)

# Sections whose cv and undersmooth blocks follow CLI overrides
ESTIMAND_SECTIONS = ("fit", "ate", "density")

# Estimator sections nested in the simulation block
STUDY_SECTIONS = ("ate", "density")


class ConfigValidationError(Exception):
    """
    Exception raised when run configuration validation fails.

    Attributes:
        message: Human-readable error summary.
        errors: List of individual validation error messages.
        source: File or override the configuration came from (if applicable).
    """

    def __init__(
        self,
        message: str,
        errors: list[str] | None = None,
        source: str | None = None,
    ):
        super().__init__(message)
        self.message = message
        self.errors = errors or []
        self.source = source

    def __str__(self) -> str:
        """Return formatted error message."""
        if not self.errors:
            return self.message
        return f"{self.message}: {'; '.join(self.errors)}"


class ConfigManager:
    """
    Manages the run configuration with schema validation.

    Precedence, lowest first: schema defaults, environment (threads and
    output directory), the configuration file, CLI overrides.

    Attributes:
        config_path: Path to the YAML or JSON file, or None for defaults only.
        raw: The validated configuration as a plain dictionary.
    """

    def __init__(self, config_path: str | None = None) -> None:
        """
        Initialize the ConfigManager and load the file, if any.

        Raises:
            ConfigValidationError: If the file cannot be read or is invalid.
        """
        self.config_path = config_path
        self.raw: dict[str, Any] = get_default_config()
        self.file_raw: dict[str, Any] = {}
        self.load()

    @property
    def config(self) -> RunConfig:
        return RunConfig.model_validate(self.raw)

    def _read(self, path: str) -> Any:
        with open(path) as f:
            if path.lower().endswith(JSON_EXTENSIONS):
                return json.load(f)
            return yaml.safe_load(f) or {}

    def _validate(self, raw: Any, source: str) -> dict[str, Any]:
        is_valid, error, validated = validate_run_config(raw)
        if not is_valid or validated is None:
            raise ConfigValidationError("Invalid run configuration", errors=[error], source=source)
        return validated

    def load(self) -> dict[str, Any]:
        """
        Load and validate the configuration file.

        Returns:
            The validated configuration dictionary.

        Raises:
            ConfigValidationError: If the file is missing, unparsable or invalid.

        Side Effects:
            - Replaces self.raw
        """
        if self.config_path is None:
            self.raw = get_default_config()
            self.file_raw = {}
            return self.raw
        if not os.path.exists(self.config_path):
            raise ConfigValidationError(f"Config file {self.config_path} does not exist", source=self.config_path)
        try:
            raw = self._read(self.config_path)
        except (OSError, ValueError, yaml.YAMLError) as e:
            raise ConfigValidationError(
                f"Cannot parse {self.config_path}", errors=[str(e)], source=self.config_path
            ) from e
        self.raw = self._validate(raw, self.config_path)
        self.file_raw = raw
        logger.info(f"Loaded run configuration from {self.config_path}")
        return self.raw

    def _file_sets_workers(self) -> bool:
        simulation = self.file_raw.get("simulation")
        return self.file_raw.get("threads") is not None or (isinstance(simulation, dict) and "threads" in simulation)

    def apply_environment(self, threads: int | None = None, out: str | None = None) -> RunConfig:
        """
        Fill threads and output directory from the environment where the file left them unset.

        A file that sets simulation.threads but not threads keeps the top-level
        value unset, so the study runs with its own worker count.
        """
        raw = copy.deepcopy(self.raw)
        if threads is not None and raw.get("threads") is None and not self._file_sets_workers():
            raw["threads"] = threads
        if raw.get("out") is None and out is not None:
            raw["out"] = out
        self.raw = self._validate(raw, "environment")
        return self.config

    def apply_overrides(
        self,
        seed: int | None = None,
        threads: int | None = None,
        rule: str | None = None,
        m: int | None = None,
        grid_size: int | None = None,
        out: str | None = None,
    ) -> RunConfig:
        """
        Apply CLI flags on top of the loaded configuration.

        seed sets the run seed, every fold seed and the simulation base seed;
        threads sets every worker count; rule sets every undersmoothing rule
        and the simulation estimators; m fixes the order of the fit and the
        outcome regression; grid_size sets every lambda grid length.

        Raises:
            ConfigValidationError: If an override produces an invalid configuration.
        """
        raw = copy.deepcopy(self.raw)
        applied = []
        if seed is not None:
            raw["seed"] = seed
            raw["simulation"]["base_seed"] = seed
            for section in ESTIMAND_SECTIONS:
                raw[section]["cv"]["seed"] = seed
            applied.append(f"seed={seed}")
        if threads is not None:
            raw["threads"] = threads
            raw["simulation"]["threads"] = threads
            for section in ESTIMAND_SECTIONS:
                raw[section]["cv"]["threads"] = threads
            for section in STUDY_SECTIONS:
                raw["simulation"][section]["cv"]["threads"] = threads
            applied.append(f"threads={threads}")
        if rule is not None:
            for section in ESTIMAND_SECTIONS:
                raw[section]["undersmooth"]["rule"] = rule
            raw["simulation"]["estimators"] = [rule]
            applied.append(f"rule={rule}")
        if m is not None:
            raw["fit"]["m"] = m
            raw["ate"]["m"] = m
            applied.append(f"m={m}")
        if grid_size is not None:
            for section in ESTIMAND_SECTIONS:
                raw[section]["cv"]["n_lambda"] = grid_size
            applied.append(f"grid_size={grid_size}")
        if out is not None:
            raw["out"] = out
            applied.append(f"out={out}")

        self.raw = self._validate(raw, "command line")
        if applied:
            logger.info(f"Applied overrides: {', '.join(applied)}")
        return self.config

    def save(self, path: str) -> bool:
        """
        Write the resolved configuration as JSON for provenance.

        Returns:
            True if save was successful, False otherwise.
        """
        try:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, "w") as f:
                json.dump(self.config.model_dump(mode="json"), f, indent=2, sort_keys=True)
            logger.debug(f"Saved resolved configuration to {path}")
            return True
        except Exception as e:
            logger.error(f"Error saving config to {path}: {e}")
            return False
