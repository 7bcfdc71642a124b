"""Threshold automata with coefficient sketches: coverability, synthesis and
the reduction from divisibility formulas."""

from __future__ import annotations

from .core import (
    Cmp,
    Configuration,
    Environment,
    Guard,
    LinearConstraint,
    LinearExpr,
    Rule,
    ThresholdAutomaton,
    apply_run,
    enabled_rules,
    eval_guard,
    initial_configuration,
    is_acyclic,
    is_enabled,
    step,
    validate,
)
from .coverability import (
    Covered,
    NotCoveredWithinBounds,
    SearchBounds,
    covers_from,
    reachable_configs,
    ta_covers,
)
from .errors import TAError
from .models import builtin_model
from .pad import LinearPoly, PadFormula, bounded_validity, lift_general_divisibility, parse_formula
from .reduction import compile_formula, nonneg_to_general
from .sketch import AffineCoeff, SketchAutomaton, SketchGuard, collect_indeterminates, instantiate
from .synthesis import Candidate, Exhausted, Mode, SynthesisQuery, synthesize, verify_candidate
from .textio import format_report, parse_ta, print_ta, read_report

__version__ = "0.1.0"

__all__ = [
    "Cmp",
    "Configuration",
    "Environment",
    "Guard",
    "LinearConstraint",
    "LinearExpr",
    "Rule",
    "ThresholdAutomaton",
    "apply_run",
    "enabled_rules",
    "eval_guard",
    "initial_configuration",
    "is_acyclic",
    "is_enabled",
    "step",
    "validate",
    "Covered",
    "NotCoveredWithinBounds",
    "SearchBounds",
    "covers_from",
    "reachable_configs",
    "ta_covers",
    "TAError",
    "builtin_model",
    "LinearPoly",
    "PadFormula",
    "bounded_validity",
    "lift_general_divisibility",
    "parse_formula",
    "compile_formula",
    "nonneg_to_general",
    "AffineCoeff",
    "SketchAutomaton",
    "SketchGuard",
    "collect_indeterminates",
    "instantiate",
    "Candidate",
    "Exhausted",
    "Mode",
    "SynthesisQuery",
    "synthesize",
    "verify_candidate",
    "format_report",
    "parse_ta",
    "print_ta",
    "read_report",
]
