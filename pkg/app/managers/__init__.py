"""
Manager classes for run configuration and worker pools.
"""

from .config_manager import ConfigManager, ConfigValidationError
from .process_manager import ProcessManager, TaskOutcome

__all__ = [
    "ConfigManager",
    "ConfigValidationError",
    "ProcessManager",
    "TaskOutcome",
]
