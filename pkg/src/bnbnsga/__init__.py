"""Hybrid branch-and-bound / NSGA-II solver for multi-objective mixed-integer problems."""

from .mcbb import IncumbentList, Node, NodeStatus, TreePolicy, TreeResult, run_tree
from .model import (
    Categorical,
    Continuous,
    ContractError,
    EvaluationError,
    Individual,
    Integer,
    ProblemDef,
    VariableSpec,
    constrained_dominates,
    dominates,
    violation,
)
from .nsga2 import GAParams, Population, evolve, fast_nondominated_sort, seed_population
from .seeder import SeederPolicy, find_feasible, seeded_solve

__version__ = "0.1.0"

__all__ = [
    "Categorical", "Continuous", "ContractError", "EvaluationError", "GAParams", "IncumbentList",
    "Individual", "Integer", "Node", "NodeStatus", "Population", "ProblemDef", "SeederPolicy",
    "TreePolicy", "TreeResult", "VariableSpec", "constrained_dominates", "dominates", "evolve",
    "fast_nondominated_sort", "find_feasible", "run_tree", "seed_population", "seeded_solve",
    "violation",
]
