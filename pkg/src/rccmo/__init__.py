"""Constrained multi-objective optimization with dynamic constraint ranking."""

from .core import (
    ContractError,
    Population,
    SelectionView,
    Solution,
    compute_violations,
    dominates,
    environmental_selection,
    nondominated_sort,
    spea2_fitness,
)
from .engine import Direction, RunConfig, determine_target, run
from .problems import ProblemSpec, get_problem, make_tri, reference_front
from .variation import VariationParams

__version__ = "0.1.0"
