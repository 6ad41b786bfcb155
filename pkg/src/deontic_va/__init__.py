"""Deontological test propositions for agent action plans, evaluated
three-valued against empirical facts."""

from .empirical import FactBase, Truth, aggregate_survey, query, utility_of
from .evaluator import (
    Evaluator,
    Overall,
    PrincipleResult,
    Verdict,
    check_autonomy,
    check_generalization,
    check_plan,
    check_utility,
    eval_formula,
)
from .logic import canonical_serialize, complementary, parse_formula, substitute
from .rulebase import ActionPlan, Scenario, ScenarioError, alternatives, load_scenario, parse_scenario
from .testgen import gen_autonomy, gen_generalization, gen_utility

__version__ = "0.1.0"

__all__ = [
    "ActionPlan",
    "Evaluator",
    "FactBase",
    "Overall",
    "PrincipleResult",
    "Scenario",
    "ScenarioError",
    "Truth",
    "Verdict",
    "aggregate_survey",
    "alternatives",
    "canonical_serialize",
    "check_autonomy",
    "check_generalization",
    "check_plan",
    "check_utility",
    "complementary",
    "eval_formula",
    "gen_autonomy",
    "gen_generalization",
    "gen_utility",
    "load_scenario",
    "parse_formula",
    "parse_scenario",
    "query",
    "substitute",
    "utility_of",
]
