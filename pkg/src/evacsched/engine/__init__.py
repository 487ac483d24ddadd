"""Constraint-propagation search core."""

from .kernel import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .search import (
    FEASIBLE_TIMEOUT,
    INFEASIBLE,
    OPTIMAL,
    UNKNOWN_TIMEOUT,
    Budget,
    SearchResult,
    SearchStats,
    branch_and_bound,
)
from .state import (
    CUMULATIVE,
    DISJUNCTIVE,
    EdgeConstraint,
    Problem,
    ShiftedTask,
    State,
    TimetableResult,
    edge_view,
    propagate,
    timetable_consistent,
    timetable_profile,
)
from .strategies import ALL_STRATEGIES, COMBINED, Decision, make_strategy

__all__ = [
    "ALL_STRATEGIES",
    "COMBINED",
    "CUMULATIVE",
    "DISJUNCTIVE",
    "FEASIBLE_TIMEOUT",
    "INFEASIBLE",
    "KERNEL_IMPLEMENTATION",
    "OPTIMAL",
    "UNKNOWN_TIMEOUT",
    "Budget",
    "Decision",
    "EdgeConstraint",
    "Problem",
    "SearchResult",
    "SearchStats",
    "ShiftedTask",
    "State",
    "TimetableResult",
    "branch_and_bound",
    "edge_view",
    "make_strategy",
    "propagate",
    "timetable_consistent",
    "timetable_profile",
]
