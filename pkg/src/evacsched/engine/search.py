"""Depth-first branch-and-bound with optional geometric restarts."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from random import Random
from typing import Optional

from .state import F, Problem, State, propagate
from .strategies import Strategy, apply, make_strategy

OPTIMAL = "optimal"
FEASIBLE_TIMEOUT = "feasibleTimeout"
INFEASIBLE = "infeasible"
UNKNOWN_TIMEOUT = "unknownTimeout"

RESTART_GROWTH = 1.5


@dataclass
class Budget:
    time_limit: Optional[float] = None  # seconds
    node_limit: Optional[int] = None

    @classmethod
    def exhaustive(cls) -> "Budget":
        return cls()


@dataclass
class SearchStats:
    nodes: int = 0
    backtracks: int = 0
    restarts: int = 0
    elapsed: float = 0.0
    best_time: float = 0.0
    restart_limits: list = field(default_factory=list)
    run_backtracks: list = field(default_factory=list)
    trace: Optional[list] = None

    def to_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "backtracks": self.backtracks,
            "restarts": self.restarts,
            "elapsed": round(self.elapsed, 6),
            "bestTime": round(self.best_time, 6),
        }


@dataclass
class SearchResult:
    """Outcome of a component search; ``best`` holds one (start, dur, end, flow, rate) per task."""

    best: Optional[list]
    objective: Optional[int]
    status: str
    stats: SearchStats
    incumbents: list = field(default_factory=list)


def objective_value(problem: Problem, assignment: list) -> int:
    if problem.objective == "clearance":
        return max((a[2] + problem.transit[i] for i, a in enumerate(assignment) if a[3] > 0), default=0)
    return sum(a[3] for a in assignment)


def _zero_solution(problem: Problem) -> Optional[list]:
    st = problem.root()
    lo, hi = st.lo, st.hi
    for i in range(problem.n):
        b = 5 * i
        if lo[b + F] > 0:
            return None
        hi[b + 1] = 0
    if not propagate(problem, st, None) or not st.all_assigned():
        return None
    return [st.assignment(i) for i in range(problem.n)]


class _Restart(Exception):
    pass


class _OutOfBudget(Exception):
    pass


def branch_and_bound(
    problem: Problem,
    strategy: str | Strategy,
    budget: Budget | None = None,
    seed: int = 0,
    trace: bool = False,
    restarts: Optional[bool] = None,
    incumbent: Optional[list] = None,
) -> SearchResult:
    """Solve one component model.

    ``restarts`` defaults to on for task rule ``1A``. The first restart fires
    after ``2 * num_variables`` backtracks in a run, and the limit grows by
    ``RESTART_GROWTH`` each time; incumbents persist across runs.
    """
    strat = make_strategy(strategy) if isinstance(strategy, str) else strategy
    budget = budget or Budget()
    if restarts is None:
        restarts = strat.name.startswith("1A")
    stats = SearchStats(trace=[] if trace else None)
    rng = Random(seed)
    t0 = time.perf_counter()
    deadline = None if budget.time_limit is None else t0 + budget.time_limit
    kind = problem.objective

    best = None
    best_obj = None
    incumbents = []

    def record(sol):
        nonlocal best, best_obj
        best = sol
        best_obj = objective_value(problem, sol)
        stats.best_time = time.perf_counter() - t0
        incumbents.append(best_obj)

    if incumbent is not None:
        record(incumbent)
    elif kind == "maxflow":
        zero = _zero_solution(problem)
        if zero is not None:
            record(zero)

    def target():
        if best_obj is None:
            return None
        if kind == "maxflow":
            return best_obj + 1
        if kind == "clearance":
            return best_obj - 1
        return None

    def finished():
        if best_obj is None:
            return False
        if kind == "sat":
            return True
        if kind == "maxflow" and problem.upper_bound is not None:
            return best_obj >= problem.upper_bound
        return False

    def run(limit):
        run_bt = 0
        stack = [problem.root()]
        while stack:
            if budget.node_limit is not None and stats.nodes >= budget.node_limit:
                raise _OutOfBudget
            if deadline is not None and (stats.nodes & 63) == 0 and time.perf_counter() > deadline:
                raise _OutOfBudget
            st = stack.pop()
            stats.nodes += 1
            if not propagate(problem, st, target()):
                stats.backtracks += 1
                run_bt += 1
                if limit is not None and run_bt >= limit:
                    stats.run_backtracks.append(run_bt)
                    raise _Restart
                continue
            if st.all_assigned():
                record([st.assignment(i) for i in range(problem.n)])
                if finished():
                    return
                continue
            dec = strat.decide(problem, st, rng)
            if stats.trace is not None:
                stats.trace.append(dec.describe(problem.areas))
            var = 5 * dec.task + dec.var
            right = st
            left = st.copy()
            apply(left, var, *dec.left)
            apply(right, var, *dec.right)
            stack.append(right)
            stack.append(left)
        stats.run_backtracks.append(run_bt)

    status = None
    limit = 2.0 * problem.num_variables if restarts else None
    try:
        if finished():
            status = OPTIMAL
        while status is None:
            try:
                run(limit)
            except _Restart:
                stats.restarts += 1
                stats.restart_limits.append(limit)
                limit *= RESTART_GROWTH
                if finished():
                    status = OPTIMAL
                continue
            status = OPTIMAL if best is not None else INFEASIBLE
    except _OutOfBudget:
        status = FEASIBLE_TIMEOUT if best is not None else UNKNOWN_TIMEOUT
    stats.elapsed = time.perf_counter() - t0
    return SearchResult(best, best_obj, status, stats, incumbents)
