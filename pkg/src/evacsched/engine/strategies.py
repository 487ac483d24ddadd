"""Branching strategies.

Task selection: ``1A`` (random task, used with geometric restarts) and
``1B`` (largest demand on the busiest dominating edge). Value labeling:
``2A`` (rate up, start up, flow down) and ``2B`` (rate down, flow down, start
up). ``phasedMF`` and ``CT`` are the dedicated procedures for the phased
max-flow model and for clearance-time minimization.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random

from .state import D, E, F, R, S, VAR_NAMES, Problem, State

TASK_RULES = ("1A", "1B")
LABEL_RULES = ("2A", "2B")
COMBINED = tuple(a + b for a in TASK_RULES for b in LABEL_RULES)
PHASED_MF = "phasedMF"
CLEARANCE = "CT"
ALL_STRATEGIES = COMBINED + (PHASED_MF, CLEARANCE)

_LABEL_ORDER = {
    "2A": ((R, "min"), (S, "min"), (F, "max")),
    "2B": ((R, "max"), (F, "max"), (S, "min")),
    CLEARANCE: ((S, "min"), (R, "max"), (D, "min")),
}
_FALLBACK = ((S, "min"), (D, "min"), (E, "min"), (F, "max"), (R, "min"))


@dataclass(frozen=True)
class Decision:
    """Binary branch: ``left`` is tried first, ``right`` on backtrack.

    Each side is ``(op, value)`` with op one of ``eq``, ``ne``, ``ge``, ``le``.
    """

    task: int
    var: int
    left: tuple
    right: tuple

    def describe(self, areas=None) -> tuple:
        who = areas[self.task] if areas is not None else self.task
        return (who, VAR_NAMES[self.var], self.left, self.right)


def apply(state: State, var_index: int, op: str, value: int) -> None:
    """Post ``x op value`` on a state (may leave an empty domain)."""
    lo, hi = state.lo, state.hi
    task, var = divmod(var_index, 5)
    rs = state.rsets[task] if var == R else None
    if op == "eq":
        lo[var_index] = max(lo[var_index], value)
        hi[var_index] = min(hi[var_index], value)
        if rs is not None:
            state.rsets[task] = None
            if value not in rs:
                hi[var_index] = lo[var_index] - 1
    elif op == "ge":
        lo[var_index] = max(lo[var_index], value)
    elif op == "le":
        hi[var_index] = min(hi[var_index], value)
    elif op == "ne":
        if rs is not None:
            vals = tuple(x for x in rs if x != value)
            if not vals:
                hi[var_index] = lo[var_index] - 1
            else:
                state.rsets[task] = vals if len(vals) > 1 else None
                lo[var_index], hi[var_index] = vals[0], vals[-1]
        elif value == lo[var_index]:
            lo[var_index] += 1
        elif value == hi[var_index]:
            hi[var_index] -= 1
        # interior values of plain intervals are never refuted by our strategies
    else:
        raise ValueError(op)


def _label(state: State, task: int, var: int, direction: str) -> Decision:
    lo, hi = state.domain(task, var)
    rs = state.rsets[task] if var == R else None
    if direction == "min":
        if rs is not None:
            return Decision(task, var, ("eq", lo), ("ne", lo))
        return Decision(task, var, ("eq", lo), ("ge", lo + 1))
    if rs is not None:
        return Decision(task, var, ("eq", hi), ("ne", hi))
    return Decision(task, var, ("eq", hi), ("le", hi - 1))


def _label_task(state: State, task: int, order) -> Decision:
    for var, direction in tuple(order) + _FALLBACK:
        if not state.fixed(5 * task + var):
            return _label(state, task, var, direction)
    raise RuntimeError("task already assigned")


def _unassigned(problem: Problem, state: State) -> list:
    return [i for i in range(problem.n) if not state.task_assigned(i)]


class Strategy:
    name = ""

    def decide(self, problem: Problem, state: State, rng: Random) -> Decision:
        raise NotImplementedError


class TaskLabelStrategy(Strategy):
    """One of the four ``{1A,1B} x {2A,2B}`` combinations.

    The selected task stays current until all five of its variables are fixed.
    """

    def __init__(self, name: str):
        if name not in COMBINED:
            raise ValueError(f"unknown strategy {name!r}")
        self.name = name
        self.task_rule = name[:2]
        self.order = _LABEL_ORDER[name[2:]]

    def select(self, problem: Problem, state: State, rng: Random) -> int:
        if self.task_rule == "1A":
            return rng.choice(_unassigned(problem, state))
        return select_1b(problem, state)

    def decide(self, problem, state, rng):
        cur = state.current
        if cur < 0 or state.task_assigned(cur):
            cur = self.select(problem, state, rng)
            state.current = cur
        return _label_task(state, cur, self.order)


def select_1b(problem: Problem, state: State) -> int:
    """Largest-demand unassigned task on the dominating edge carrying most tasks."""
    for c in problem.edge_order or problem.edges:
        cands = [i for i in c.tasks if not state.task_assigned(i)]
        if cands:
            return min(cands, key=lambda i: (-problem.demands[i], i))
    return _unassigned(problem, state)[0]


class PhasedMFStrategy(Strategy):
    """Durations first (highest actual rate, top-two split), then starts by earliest start."""

    name = PHASED_MF

    def decide(self, problem, state, rng):
        lo, hi = state.lo, state.hi
        best = None
        best_key = None
        for i in range(problem.n):
            b = 5 * i
            if lo[b + D] == hi[b + D]:
                continue
            rate = hi[b + R]
            remaining = problem.demands[i] - lo[b + D] * rate
            key = (-min(rate, remaining), i)
            if best_key is None or key < best_key:
                best, best_key = i, key
        if best is not None:
            dlo, dhi = state.domain(best, D)
            if dhi - dlo >= 2:
                return Decision(best, D, ("ge", dhi - 1), ("le", dhi - 2))
            return Decision(best, D, ("eq", dhi), ("le", dhi - 1))
        todo = _unassigned(problem, state)
        task = min(todo, key=lambda i: (lo[5 * i + S], i))
        return _label_task(state, task, ((S, "min"),))


class ClearanceStrategy(Strategy):
    """Earliest-start task first (ties: larger rate), starts labeled upward."""

    name = CLEARANCE

    def decide(self, problem, state, rng):
        cur = state.current
        if cur < 0 or state.task_assigned(cur):
            lo, hi = state.lo, state.hi
            cur = min(_unassigned(problem, state), key=lambda i: (lo[5 * i + S], -hi[5 * i + R], i))
            state.current = cur
        return _label_task(state, cur, _LABEL_ORDER[CLEARANCE])


def make_strategy(name: str) -> Strategy:
    if name in COMBINED:
        return TaskLabelStrategy(name)
    if name == PHASED_MF:
        return PhasedMFStrategy()
    if name == CLEARANCE:
        return ClearanceStrategy()
    raise ValueError(f"unknown strategy {name!r}")
