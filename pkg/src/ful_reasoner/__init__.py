"""Maxim evaluation by the universal-law test over a sorted first-order language."""

from .dsl import FullSyntaxError, KnowledgeBase, parse_formula, parse_kb, parse_maxim, render
from .engine import ResourceLimits
from .evaluator import Basis, DutyKind, Verdict, classify_duty, evaluate, evaluate_perm
from .syntax import DeonticOperator, Maxim, alpha_equivalent, normalize
from .universal import UniversalizationRecord, universalize

__all__ = [
    "Basis", "DeonticOperator", "DutyKind", "FullSyntaxError", "KnowledgeBase", "Maxim",
    "ResourceLimits", "UniversalizationRecord", "Verdict", "alpha_equivalent",
    "classify_duty", "evaluate", "evaluate_perm", "normalize", "parse_formula", "parse_kb",
    "parse_maxim", "render", "universalize",
]
