"""Cross-validation as a rule: keeps the CV choice and records the trace."""

import math

from .base import RuleContext, UndersmoothRule
from .reports import CriterionPoint, SelectorReport


class CvRule(UndersmoothRule):
    rule_type = "cv"
    display_name = "Cross-validation"
    needs_active_set = False

    def threshold(self, context: RuleContext) -> float:
        return math.inf

    def is_satisfied(self, point: CriterionPoint, threshold: float, context: RuleContext) -> bool:
        return True

    def select(self, context: RuleContext) -> SelectorReport:
        return super().select(context).replace(threshold=None)
