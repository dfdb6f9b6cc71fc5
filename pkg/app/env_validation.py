"""
HAL_* environment variable checks run at CLI startup.

A malformed variable never stops a run: the checker logs a warning and the
built-in default is used instead.
"""

import logging
import os
from typing import Any, NamedTuple

logger = logging.getLogger(__name__)

TRUE_WORDS = frozenset({"1", "true", "yes", "on"})
FALSE_WORDS = frozenset({"0", "false", "no", "off"})

# Defaults of the HAL_* variables
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_OUTPUT_PATH = "./hal-output"
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


class EnvCheck(NamedTuple):
    """Outcome of one variable check; unpacks as (is_valid, value, warning)."""

    valid: bool
    value: Any
    warning: str


def _fallback(default_value: Any, problem: str, default: str) -> EnvCheck:
    return EnvCheck(False, default_value, f"{problem}. Using default value: {default}")


# =============================================================================
# VALIDATION HELPERS
# =============================================================================


def validate_integer(
    env_var: str, default: str, min_value: int | None = None, max_value: int | None = None
) -> EnvCheck:
    """
    Read an integer variable, optionally bounded.

    Args:
        env_var: Variable name.
        default: Default as it would appear in the environment.
        min_value: Inclusive lower bound, if any.
        max_value: Inclusive upper bound, if any.

    Returns:
        EnvCheck; on any problem the value is int(default) and warning says why.
    """
    raw = os.environ.get(env_var, default)
    fallback = int(default)
    if raw == default:
        return EnvCheck(True, fallback, "")

    try:
        value = int(raw)
    except ValueError:
        return _fallback(fallback, f"Invalid value for {env_var}='{raw}': must be an integer", default)

    if min_value is not None and value < min_value:
        return _fallback(fallback, f"{env_var}={value} is below the minimum {min_value}", default)
    if max_value is not None and value > max_value:
        return _fallback(fallback, f"{env_var}={value} is above the maximum {max_value}", default)
    return EnvCheck(True, value, "")


def validate_boolean(env_var: str, default: str = "0") -> EnvCheck:
    """Read a 0/1, true/false, yes/no or on/off flag (case-insensitive)."""
    raw = os.environ.get(env_var, default)
    fallback = default in TRUE_WORDS
    word = raw.strip().lower()
    if word in TRUE_WORDS:
        return EnvCheck(True, True, "")
    if word in FALSE_WORDS:
        return EnvCheck(True, False, "")
    problem = f"Invalid boolean value for {env_var}='{raw}': expected 0/1, true/false, yes/no"
    return _fallback(fallback, problem, default)


def validate_enum(env_var: str, default: str, allowed_values: list[str], case_sensitive: bool = False) -> EnvCheck:
    """
    Read a variable restricted to a fixed set of words.

    The raw value is returned as given; callers normalize case if they need to.
    """
    raw = os.environ.get(env_var, default)
    if raw == default:
        return EnvCheck(True, raw, "")

    allowed = set(allowed_values) if case_sensitive else {v.lower() for v in allowed_values}
    if (raw if case_sensitive else raw.lower()) not in allowed:
        problem = f"Invalid value for {env_var}='{raw}': must be one of {', '.join(allowed_values)}"
        return _fallback(default, problem, default)
    return EnvCheck(True, raw, "")


def validate_path(env_var: str, default: str) -> EnvCheck:
    """Read a path variable; blank values fall back to the default."""
    raw = os.environ.get(env_var, default).strip()
    if not raw:
        return _fallback(default, f"{env_var} is empty", default)
    return EnvCheck(True, raw, "")


# =============================================================================
# VALIDATION FUNCTION
# =============================================================================


def validate_environment_variables() -> dict[str, Any]:
    """
    Check every HAL_* variable the CLI reads.

    Returns:
        Dictionary with:
        - 'valid': bool - no variable fell back to its default
        - 'warnings': list[str] - one message per fallback
        - 'variables': dict - usable value of every variable
    """
    checks = {
        # worker count for replicates and fold fits
        "HAL_THREADS": validate_integer("HAL_THREADS", str(os.cpu_count() or 1), min_value=1, max_value=1024),
        "HAL_LOG_LEVEL": validate_enum("HAL_LOG_LEVEL", DEFAULT_LOG_LEVEL, LOG_LEVELS),
        # default --out
        "HAL_OUTPUT_PATH": validate_path("HAL_OUTPUT_PATH", DEFAULT_OUTPUT_PATH),
        # also log to <out>/run.log
        "HAL_LOG_FILE": validate_boolean("HAL_LOG_FILE", "1"),
    }

    warnings = [check.warning for check in checks.values() if check.warning]
    for warning in warnings:
        logger.warning(warning)

    variables = {name: check.value for name, check in checks.items()}
    variables["HAL_LOG_LEVEL"] = variables["HAL_LOG_LEVEL"].upper()

    if warnings:
        logger.warning(
            f"Environment variable validation: COMPLETED with {len(warnings)} warning(s). "
            "Default values will be used where needed."
        )
    else:
        logger.debug("Environment variable validation: PASSED")

    return {"valid": not warnings, "warnings": warnings, "variables": variables}
