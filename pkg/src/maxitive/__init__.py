"""Possibility measures, sup-moments and possibilistic laws of large numbers."""

from .core import (
    DistributionError,
    DomainError,
    Event,
    MaxitiveError,
    PossibilityDistribution,
    SampleSpace,
    SpaceMismatchError,
    Variable,
    VariableSequence,
    chebyshev_check,
    expectation_sup,
    induced_measure,
    max_aggregate,
    max_diff_bound,
    max_expectation_identity,
    normalized_deviation,
    variance_sup,
)
from .lln import PsiFunction, check_thm33, check_thm34, check_thm35, run_lln
from .scenario import Scenario, ScenarioError, dump_scenario, load_scenario, parse_scenario

__version__ = "0.1.0"

__all__ = [
    "DistributionError",
    "DomainError",
    "Event",
    "MaxitiveError",
    "PossibilityDistribution",
    "SampleSpace",
    "SpaceMismatchError",
    "Variable",
    "VariableSequence",
    "chebyshev_check",
    "expectation_sup",
    "induced_measure",
    "max_aggregate",
    "max_diff_bound",
    "max_expectation_identity",
    "normalized_deviation",
    "variance_sup",
    "PsiFunction",
    "check_thm33",
    "check_thm34",
    "check_thm35",
    "run_lln",
    "Scenario",
    "ScenarioError",
    "dump_scenario",
    "load_scenario",
    "parse_scenario",
]
