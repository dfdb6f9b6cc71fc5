"""
Rule registry for undersmoothing selectors.

Handles registration and lookup of rule instances by their canonical name.
"""

import logging

from errors import SelectorError

from .base import RuleContext, UndersmoothRule
from .cv_rule import CvRule
from .global_score import GlobalScoreRule
from .reports import SelectorReport
from .sparse_support import SparseSupportRule
from .targeted import TargetedEicRule

logger = logging.getLogger(__name__)


class RuleRegistry:
    """Registry for undersmoothing rule instances, keyed by rule_type."""

    def __init__(self) -> None:
        """Initialize an empty rule registry."""
        self._rules: dict[str, UndersmoothRule] = {}

    def register_class(self, rule_class: type[UndersmoothRule]) -> None:
        """
        Instantiate and register a rule class under its rule_type.

        Args:
            rule_class: The rule class to register.
        """
        self.register_instance(rule_class())

    def register_instance(self, rule: UndersmoothRule) -> None:
        """
        Register an already-instantiated rule.

        Args:
            rule: The rule instance to register.
        """
        self._rules[rule.rule_type] = rule
        logger.debug(f"Registered undersmoothing rule: {rule.rule_type}")

    def get(self, rule_type: str) -> UndersmoothRule | None:
        """
        Get a rule by type.

        Returns:
            The rule instance, or None if not found.
        """
        return self._rules.get(rule_type)

    def list_rules(self) -> list[str]:
        """Registered rule types in registration order."""
        return list(self._rules.keys())


def default_registry() -> RuleRegistry:
    """A registry holding the CV rule and the three undersmoothing rules."""
    registry = RuleRegistry()
    for rule_class in (CvRule, GlobalScoreRule, SparseSupportRule, TargetedEicRule):
        registry.register_class(rule_class)
    return registry


def apply_rule(context: RuleContext, rule_type: str, registry: RuleRegistry | None = None) -> SelectorReport:
    """
    Run the named rule on a path.

    Raises:
        SelectorError: If the rule is not registered or the rule fails.
    """
    registry = registry or default_registry()
    rule = registry.get(rule_type)
    if rule is None:
        registered = ", ".join(registry.list_rules())
        raise SelectorError(f"Unknown undersmoothing rule: {rule_type}", [f"registered: {registered}"])
    return rule.select(context)
