"""Search state, shifted task views and constraint propagation."""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import kernel

S, D, E, F, R = range(5)
VAR_NAMES = ("start", "dur", "end", "flow", "rate")
CUMULATIVE = "cumulative"
DISJUNCTIVE = "disjunctive"


@dataclass
class EdgeConstraint:
    """Cumulative or disjunctive resource over the tasks crossing one arc."""

    edge: str
    tasks: array  # task indices
    offsets: array  # offset of the arc's tail for each task
    capacity: float

    @classmethod
    def build(cls, edge, tasks: Sequence[int], offsets: Sequence[int], capacity: float):
        return cls(edge, array("q", tasks), array("q", offsets), float(capacity))


@dataclass
class Problem:
    """A component-level scheduling model ready for search.

    ``objective`` is ``maxflow`` (maximize total flow), ``sat`` (all demand
    evacuated, any solution) or ``clearance`` (all demand evacuated, minimize
    the latest ``end + transit``).
    """

    areas: list
    demands: list
    transit: list
    lo: array
    hi: array
    rate_sets: list
    edges: list
    disjunctive: bool
    objective: str
    upper_bound: Optional[int] = None
    edge_order: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.areas)

    @property
    def num_variables(self) -> int:
        return 5 * self.n

    def root(self) -> "State":
        return State(array("q", self.lo), array("q", self.hi), list(self.rate_sets), -1)


class State:
    __slots__ = ("lo", "hi", "rsets", "current")

    def __init__(self, lo, hi, rsets, current=-1):
        self.lo = lo
        self.hi = hi
        self.rsets = rsets
        self.current = current

    def copy(self) -> "State":
        return State(self.lo[:], self.hi[:], list(self.rsets), self.current)

    def fixed(self, var: int) -> bool:
        return self.lo[var] == self.hi[var]

    def task_assigned(self, i: int) -> bool:
        b = 5 * i
        lo, hi = self.lo, self.hi
        return all(lo[b + v] == hi[b + v] for v in range(5))

    def all_assigned(self) -> bool:
        return self.lo == self.hi

    def domain(self, i: int, var: int) -> tuple[int, int]:
        return self.lo[5 * i + var], self.hi[5 * i + var]

    def assignment(self, i: int) -> tuple[int, ...]:
        b = 5 * i
        return tuple(self.lo[b : b + 5])


class ShiftedTask:
    """View of a task on one arc: start and end shifted by the arc's offset.

    Reads and writes go straight to the underlying state, so tightening the
    view tightens the base task and vice versa. Duration is shared.
    """

    def __init__(self, state: State, index: int, offset: int, area: str = "", edge: str = ""):
        self.state = state
        self.index = index
        self.offset = offset
        self.area = area
        self.edge = edge

    @property
    def start(self) -> tuple[int, int]:
        lo, hi = self.state.domain(self.index, S)
        return lo + self.offset, hi + self.offset

    @property
    def end(self) -> tuple[int, int]:
        lo, hi = self.state.domain(self.index, E)
        return lo + self.offset, hi + self.offset

    @property
    def dur(self) -> tuple[int, int]:
        return self.state.domain(self.index, D)

    @property
    def height(self) -> tuple[int, int]:
        return self.state.domain(self.index, R)

    def set_start(self, lo: int | None = None, hi: int | None = None) -> None:
        b = 5 * self.index
        if lo is not None:
            self.state.lo[b + S] = max(self.state.lo[b + S], lo - self.offset)
        if hi is not None:
            self.state.hi[b + S] = min(self.state.hi[b + S], hi - self.offset)

    def set_end(self, lo: int | None = None, hi: int | None = None) -> None:
        b = 5 * self.index
        if lo is not None:
            self.state.lo[b + E] = max(self.state.lo[b + E], lo - self.offset)
        if hi is not None:
            self.state.hi[b + E] = min(self.state.hi[b + E], hi - self.offset)

    def compulsory_part(self) -> tuple[int, int] | None:
        a = self.start[1]
        z = self.end[0]
        return (a, z) if a < z else None


def edge_view(state: State, index: int, edge: str, offsets: dict, area: str = "") -> ShiftedTask:
    """Shifted view of task ``index`` on ``edge``; ``offsets`` maps the task's path arcs to offsets."""
    if edge not in offsets:
        raise ValueError(f"arc {edge!r} is not on the path of task {area or index}")
    return ShiftedTask(state, index, offsets[edge], area, edge)


def timetable_profile(tasks: Sequence[ShiftedTask], disjunctive: bool = False) -> list[tuple[int, int]]:
    """Sorted ``(minute, delta)`` events of the mandatory usage built from compulsory parts."""
    deltas: dict = {}
    for t in tasks:
        part = t.compulsory_part()
        if part is None:
            continue
        h = 1 if disjunctive else t.height[0]
        deltas[part[0]] = deltas.get(part[0], 0) + h
        deltas[part[1]] = deltas.get(part[1], 0) - h
    return sorted((m, dlt) for m, dlt in deltas.items() if dlt)


@dataclass
class TimetableResult:
    consistent: bool
    changed: bool


def timetable_consistent(tasks: Sequence[ShiftedTask], capacity: float, mode: str = CUMULATIVE) -> TimetableResult:
    """Run the timetable check/filter on views that share one state.

    Pruned bounds are written through to the state.
    """
    if not tasks:
        return TimetableResult(True, False)
    state = tasks[0].state
    if any(t.state is not state for t in tasks):
        raise ValueError("all views must share the same state")
    idx = array("q", [t.index for t in tasks])
    offs = array("q", [t.offset for t in tasks])
    code = kernel.timetable(state.lo, state.hi, idx, offs, float(capacity), mode == DISJUNCTIVE)
    if code == kernel.FAIL:
        return TimetableResult(False, False)
    return TimetableResult(True, code == kernel.CHANGED)


# ----------------------------------------------------------------------------
# propagation


def _arith(lo, hi, rsets, i: int, d: int) -> int:
    """Bounds reasoning for start+dur=end and flow=min(dur*rate, demand).

    Returns -1 on failure, otherwise the number of bound changes.
    """
    b = 5 * i
    s, du, e, f, r = b, b + 1, b + 2, b + 3, b + 4
    changes = 0
    while True:
        before = changes
        # a longer evacuation than ceil(d/rate) only adds usage
        v = -(-d // lo[r])
        if hi[du] > v:
            hi[du] = v
            changes += 1
        # end = start + dur
        v = lo[s] + lo[du]
        if lo[e] < v:
            lo[e] = v
            changes += 1
        v = hi[s] + hi[du]
        if hi[e] > v:
            hi[e] = v
            changes += 1
        v = lo[e] - hi[du]
        if lo[s] < v:
            lo[s] = v
            changes += 1
        v = hi[e] - lo[du]
        if hi[s] > v:
            hi[s] = v
            changes += 1
        v = lo[e] - hi[s]
        if lo[du] < v:
            lo[du] = v
            changes += 1
        v = hi[e] - lo[s]
        if hi[du] > v:
            hi[du] = v
            changes += 1
        if lo[s] > hi[s] or lo[du] > hi[du] or lo[e] > hi[e]:
            return -1
        # flow = min(dur * rate, d)
        v = min(d, hi[du] * hi[r])
        if hi[f] > v:
            hi[f] = v
            changes += 1
        v = min(d, lo[du] * lo[r])
        if lo[f] < v:
            lo[f] = v
            changes += 1
        if lo[f] > hi[f]:
            return -1
        if lo[f] > 0:
            if hi[du] == 0:
                return -1
            v = -(-lo[f] // hi[r])
            if lo[du] < v:
                lo[du] = v
                changes += 1
            v = -(-lo[f] // hi[du])
            if lo[r] < v:
                lo[r] = v
                changes += 1
        if hi[f] < d:
            v = hi[f] // lo[r]
            if hi[du] > v:
                hi[du] = v
                changes += 1
            if lo[du] > 0:
                v = hi[f] // lo[du]
                if hi[r] > v:
                    hi[r] = v
                    changes += 1
        if lo[r] > hi[r] or lo[du] > hi[du]:
            return -1
        if lo[r] == hi[r]:
            # flow is a multiple of the rate unless it is the whole demand
            rr = lo[r]
            if hi[f] < d and hi[f] % rr:
                hi[f] -= hi[f] % rr
                changes += 1
            if lo[f] < d and lo[f] % rr:
                lo[f] = min(d, lo[f] + rr - lo[f] % rr)
                changes += 1
            if lo[f] > hi[f]:
                return -1
        rs = rsets[i]
        if rs is not None:
            vals = tuple(x for x in rs if lo[r] <= x <= hi[r])
            if not vals:
                return -1
            if vals != rs:
                rsets[i] = vals if len(vals) > 1 else None
                rs = vals
            if lo[r] != vals[0]:
                lo[r] = vals[0]
                changes += 1
            if hi[r] != vals[-1]:
                hi[r] = vals[-1]
                changes += 1
        if hi[du] == 0:
            # not evacuated: start, end and rate are irrelevant, fix them
            v = max(lo[s], lo[e])
            if v > min(hi[s], hi[e]):
                return -1
            if lo[s] != v or hi[s] != v or lo[e] != v or hi[e] != v:
                lo[s] = hi[s] = lo[e] = hi[e] = v
                changes += 1
            if hi[r] != lo[r]:
                hi[r] = lo[r]
                rsets[i] = None
                changes += 1
        if changes == before:
            return changes


def propagate(problem: Problem, state: State, target: Optional[int] = None) -> bool:
    """Fixpoint of the task arithmetic, the objective bound and the edge timetables.

    ``target`` is the least acceptable total flow for ``maxflow`` and the
    largest acceptable clearance time for ``clearance``.
    """
    lo, hi, rsets = state.lo, state.hi, state.rsets
    n = problem.n
    demands = problem.demands
    if target is not None and problem.objective == "clearance":
        for i in range(n):
            v = target - problem.transit[i]
            if hi[5 * i + E] > v:
                hi[5 * i + E] = v
    timetable = kernel.timetable
    fail = kernel.FAIL
    disj = problem.disjunctive
    while True:
        changed = False
        for i in range(n):
            c = _arith(lo, hi, rsets, i, demands[i])
            if c < 0:
                return False
            if c:
                changed = True
        if target is not None and problem.objective == "maxflow":
            total = 0
            for i in range(n):
                total += hi[5 * i + F]
            if total < target:
                return False
            for i in range(n):
                v = target - (total - hi[5 * i + F])
                if lo[5 * i + F] < v:
                    lo[5 * i + F] = v
                    changed = True
        for c in problem.edges:
            code = timetable(lo, hi, c.tasks, c.offsets, c.capacity, disj)
            if code == fail:
                return False
            if code:
                changed = True
        if not changed:
            return True
