"""Model variants: simultaneous (cumulative) and phased (disjunctive) evacuation.

Each variant decomposes the instance into independent components, keeps
resource constraints on dominating arcs only, searches each component and
concatenates the partial schedules.
"""

from __future__ import annotations

import logging
from array import array
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import bounds
from .decompose import Component, areas_per_edge, dominating_edges, partition_components
from .engine import (
    COMBINED,
    FEASIBLE_TIMEOUT,
    INFEASIBLE,
    OPTIMAL,
    UNKNOWN_TIMEOUT,
    Budget,
    EdgeConstraint,
    Problem,
    SearchResult,
    SearchStats,
    branch_and_bound,
)
from .engine.strategies import CLEARANCE, PHASED_MF
from .model import PHASED, SIMULTANEOUS, Instance, clearance_horizon_ub, init_task_domains, start_upper_bound

log = logging.getLogger(__name__)

MAXFLOW = "maxflow"
SAT = "sat"
CLEARANCE_OBJ = "clearance"
OBJECTIVES = (MAXFLOW, SAT, CLEARANCE_OBJ)

_STATUS_RANK = {OPTIMAL: 0, FEASIBLE_TIMEOUT: 1, UNKNOWN_TIMEOUT: 2, INFEASIBLE: 3}


class PreconditionError(ValueError):
    """The phased greedy was called on a component it cannot solve exactly."""


@dataclass
class AreaSchedule:
    start: int
    dur: int
    end: int
    rate: int
    flow: int

    def to_dict(self) -> dict:
        return {"start": self.start, "dur": self.dur, "end": self.end, "rate": self.rate, "flow": self.flow}


@dataclass
class ComponentResult:
    areas: list
    status: str
    objective: Optional[int]
    schedule: dict
    stats: SearchStats
    strategy: str
    bound: Optional[int] = None


@dataclass
class Solution:
    per_area: dict
    objective_kind: str
    objective_value: Optional[int]
    mode: str
    status: str
    horizon: Optional[int] = None
    bound: Optional[int] = None
    components: list = field(default_factory=list)

    @property
    def evacuated(self) -> int:
        return sum(a.flow for a in self.per_area.values())

    def stats_dict(self) -> dict:
        nodes = sum(c.stats.nodes for c in self.components)
        backtracks = sum(c.stats.backtracks for c in self.components)
        restarts = sum(c.stats.restarts for c in self.components)
        return {
            "nodes": nodes,
            "backtracks": backtracks,
            "restarts": restarts,
            "elapsed": round(max((c.stats.elapsed for c in self.components), default=0.0), 6),
            # latest best-solution time across components
            "cpu": round(max((c.stats.best_time for c in self.components), default=0.0), 6),
        }


def _canonical(a) -> AreaSchedule:
    s, du, e, f, r = a
    if f == 0:
        return AreaSchedule(0, 0, 0, r, 0)
    return AreaSchedule(s, du, e, r, f)


# ----------------------------------------------------------------------------
# model construction


def build_problem(
    instance: Instance,
    area_ids: Iterable[str],
    objective: str,
    horizon: Optional[int],
    mode: str = SIMULTANEOUS,
    rate_set: Optional[Iterable[int]] = None,
    edges: str = "dominating",
    upper_bound: Optional[int] = None,
) -> Problem:
    """Domains and resource constraints of one group of areas.

    ``edges`` selects ``dominating`` arcs only or ``all`` path arcs.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    ids = sorted(area_ids)
    if objective == CLEARANCE_OBJ:
        horizon = clearance_horizon_ub(instance.subinstance(ids))
    if horizon is None or horizon < 1:
        raise ValueError("horizon must be at least 1")
    rs = None if rate_set is None else sorted(set(rate_set))
    lo = array("q")
    hi = array("q")
    rsets = []
    demands = []
    transit = []
    for k in ids:
        area = instance.area(k)
        met = instance.metrics(k)
        ts = init_task_domains(area, met, horizon, mode, rs)
        doms = [ts.start, ts.dur, ts.end, ts.flow, ts.rate]
        if objective != MAXFLOW:
            doms[3] = (area.demand, ts.flow[1])
        for a, b in doms:
            lo.append(a)
            hi.append(b)
        rsets.append(ts.rate_set)
        demands.append(area.demand)
        transit.append(met.transit_ceil)
    ape = areas_per_edge(instance, ids)
    if edges == "all":
        chosen = set(ape)
    elif edges == "dominating":
        comp = Component(frozenset(ids), frozenset(ape), ape)
        chosen = dominating_edges(comp, instance, mode)
    else:
        raise ValueError(f"unknown edge selection {edges!r}")
    pos = {k: i for i, k in enumerate(ids)}
    constraints = []
    for e in sorted(chosen):
        users = sorted(ape[e])
        constraints.append(
            EdgeConstraint.build(
                e,
                [pos[k] for k in users],
                [instance.metrics(k).offsets[e] for k in users],
                instance.arc(e).capacity,
            )
        )
    order = sorted(constraints, key=lambda c: (-len(c.tasks), c.edge))
    return Problem(
        areas=ids,
        demands=demands,
        transit=transit,
        lo=lo,
        hi=hi,
        rate_sets=rsets,
        edges=constraints,
        disjunctive=(mode == PHASED),
        objective=objective,
        upper_bound=upper_bound,
        edge_order=order,
    )


# ----------------------------------------------------------------------------
# phased greedy for convergent paths


def _node_sequence(instance: Instance, area_id: str) -> list:
    area = instance.area(area_id)
    seq = [area.node]
    for e in area.path:
        seq.append(instance.arc(e).head)
    return seq


def convergent_paths(instance: Instance, area_ids: Iterable[str]) -> bool:
    """Whether every pair of paths coincides from their first common node on."""
    seqs = {k: _node_sequence(instance, k) for k in area_ids}
    paths = {k: instance.area(k).path for k in area_ids}
    ids = sorted(seqs)
    for i, a in enumerate(ids):
        pos_a = {v: j for j, v in enumerate(seqs[a])}
        for b in ids[i + 1 :]:
            sb = seqs[b]
            for jb, v in enumerate(sb):
                if v in pos_a:
                    ja = pos_a[v]
                    if seqs[a][ja:] != sb[jb:] or paths[a][ja:] != paths[b][jb:]:
                        return False
                    break
    return True


def latest_completion(instance: Instance, area_id: str, horizon: int):
    met = instance.metrics(area_id)
    return start_upper_bound(instance.area(area_id), met, horizon) + met.transit_ceil


def phased_greedy_applicable(instance: Instance, area_ids: Iterable[str], horizon: int) -> bool:
    ids = sorted(area_ids)
    if not ids:
        return False
    # the sweep runs on one arc carried by every path
    common = set(instance.area(ids[0]).path)
    for k in ids[1:]:
        common &= set(instance.area(k).path)
    if not common or not convergent_paths(instance, ids):
        return False
    return len({latest_completion(instance, k, horizon) for k in ids}) <= 1


def phased_greedy_convergent(
    instance: Instance,
    component: Component | Iterable[str],
    horizon: int,
    rate_set: Optional[Iterable[int]] = None,
    check: bool = True,
) -> dict:
    """Optimal phased max-flow schedule of a convergent component in polynomial time.

    A minute-by-minute sweep over the shared dominating arc gives each minute
    to the released, unfinished area with the largest actual rate (the final
    batch counts only its remaining vehicles). The resulting preemptive plan
    is made non-preemptive by running areas back to back in order of first
    appearance, which keeps every area's minute count and hence the flows.

    Returns ``{area_id: AreaSchedule}``.
    """
    ids = sorted(component.areas if isinstance(component, Component) else component)
    if check and not phased_greedy_applicable(instance, ids, horizon):
        raise PreconditionError("paths must be convergent with a shared latest completion time")
    rs = None if rate_set is None else sorted(set(rate_set))
    ape = areas_per_edge(instance, ids)
    comp = Component(frozenset(ids), frozenset(ape), ape)
    dom = dominating_edges(comp, instance, PHASED)
    shared = [e for e in dom if len(ape[e]) == len(ids)]
    if len(shared) != 1:
        raise PreconditionError("component has no single dominating arc shared by every path")
    edge = shared[0]

    tasks = []
    out = {}
    for k in ids:
        area = instance.area(k)
        met = instance.metrics(k)
        ts = init_task_domains(area, met, horizon, PHASED, rs)
        if ts.infeasible:
            out[k] = AreaSchedule(0, 0, 0, ts.rate[0], 0)
            continue
        o = met.offsets[edge]
        tasks.append([k, ts.start[0] + o, ts.end[1] + o, ts.rate[1], area.demand, o])
    if not tasks:
        return out

    remaining = {t[0]: t[4] for t in tasks}
    minutes = {t[0]: 0 for t in tasks}
    first = {}
    m = min(t[1] for t in tasks)
    stop = max(t[2] for t in tasks)
    while m < stop:
        pick = None
        pick_key = None
        for k, rel, dl, rate, _, _ in tasks:
            if rel <= m < dl and remaining[k] > 0:
                key = (-min(rate, remaining[k]), k)
                if pick_key is None or key < pick_key:
                    pick, pick_key = k, key
        if pick is not None:
            remaining[pick] -= -pick_key[0]
            minutes[pick] += 1
            first.setdefault(pick, m)
        m += 1

    info = {t[0]: t for t in tasks}
    cur = None
    for k in sorted(first, key=lambda x: (first[x], x)):
        _, rel, dl, rate, d, o = info[k]
        s = first[k] if cur is None else max(cur, first[k])
        c = minutes[k]
        if s + c > dl or s < rel:
            raise AssertionError(f"non-preemptive conversion broke the window of {k}")
        cur = s + c
        start = s - o
        out[k] = AreaSchedule(start, c, start + c, rate, min(c * rate, d))
    for k, _, _, rate, _, _ in tasks:
        if k not in out:
            out[k] = AreaSchedule(0, 0, 0, rate, 0)
    return out


# ----------------------------------------------------------------------------
# component search


def _split_budget(budget: Budget, parts: int) -> Budget:
    return Budget(
        None if budget.time_limit is None else budget.time_limit / parts,
        None if budget.node_limit is None else max(1, budget.node_limit // parts),
    )


def _better(kind: str, a: SearchResult, b: Optional[SearchResult]) -> bool:
    if b is None:
        return True
    if a.objective is None:
        return False
    if b.objective is None:
        return True
    if kind == MAXFLOW and a.objective != b.objective:
        return a.objective > b.objective
    if kind == CLEARANCE_OBJ and a.objective != b.objective:
        return a.objective < b.objective
    return _STATUS_RANK[a.status] < _STATUS_RANK[b.status]


def _strategies_for(mode: str, objective: str, strategy: str) -> list:
    if strategy == "auto":
        if objective == CLEARANCE_OBJ:
            return [CLEARANCE]
        if mode == PHASED:
            return [PHASED_MF]
        return list(COMBINED)
    return [strategy]


def _search(problem: Problem, strategies: list, budget: Budget, seed: int) -> tuple:
    if len(strategies) == 1:
        return branch_and_bound(problem, strategies[0], budget, seed), strategies[0]
    per = _split_budget(budget, len(strategies))
    best = None
    name = None
    for s in strategies:
        res = branch_and_bound(problem, s, per, seed)
        if _better(problem.objective, res, best):
            best, name = res, s
        if res.status in (OPTIMAL, INFEASIBLE):
            break
    return best, name


def solve_component(
    instance: Instance,
    area_ids: Iterable[str],
    mode: str,
    objective: str,
    horizon: Optional[int],
    strategy: str = "auto",
    budget: Optional[Budget] = None,
    rate_set: Optional[Iterable[int]] = None,
    seed: int = 0,
    edges: str = "dominating",
    use_bound: bool = True,
    sat_first: bool = True,
    fast_path: bool = True,
) -> ComponentResult:
    ids = sorted(area_ids)
    budget = budget or Budget()
    strategies = _strategies_for(mode, objective, strategy)
    demand = sum(instance.area(k).demand for k in ids)

    if (
        fast_path
        and mode == PHASED
        and objective == MAXFLOW
        and strategy in ("auto", PHASED_MF)
        and phased_greedy_applicable(instance, ids, horizon)
    ):
        sched = phased_greedy_convergent(instance, ids, horizon, rate_set, check=False)
        value = sum(a.flow for a in sched.values())
        return ComponentResult(ids, OPTIMAL, value, sched, SearchStats(), "phasedGreedy")

    bound = None
    if objective == MAXFLOW:
        ub = demand
        if use_bound:
            bound = bounds.build_time_expanded_net(instance, horizon, ids).max_flow()
            ub = min(ub, bound)
        if sat_first and ub == demand:
            pre = Budget(
                None if budget.time_limit is None else budget.time_limit / 30,
                None if budget.node_limit is None else max(1, budget.node_limit // 30),
            )
            sat_problem = build_problem(instance, ids, SAT, horizon, mode, rate_set, edges)
            res, name = _search(sat_problem, _strategies_for(mode, SAT, strategy), pre, seed)
            if res.best is not None:
                sched = {k: _canonical(a) for k, a in zip(ids, res.best)}
                return ComponentResult(ids, OPTIMAL, demand, sched, res.stats, name, bound)
        problem = build_problem(instance, ids, MAXFLOW, horizon, mode, rate_set, edges, upper_bound=ub)
    else:
        problem = build_problem(instance, ids, objective, horizon, mode, rate_set, edges)
    res, name = _search(problem, strategies, budget, seed)
    sched = {} if res.best is None else {k: _canonical(a) for k, a in zip(ids, res.best)}
    return ComponentResult(ids, res.status, res.objective, sched, res.stats, name, bound)


def _solve_component_job(args):
    instance, ids, kwargs = args
    return solve_component(instance, ids, **kwargs)


def solve(
    instance: Instance,
    mode: str = SIMULTANEOUS,
    objective: str = MAXFLOW,
    horizon: Optional[int] = None,
    strategy: str = "auto",
    budget: Optional[Budget] = None,
    rate_set: Optional[Iterable[int]] = None,
    seed: int = 0,
    decompose: bool = True,
    dominance: bool = True,
    use_bound: bool = True,
    sat_first: bool = True,
    fast_path: bool = True,
    workers: int = 1,
    compute_bound: bool = True,
) -> Solution:
    """Solve a model variant; ``budget`` applies to each component separately."""
    if mode not in (SIMULTANEOUS, PHASED):
        raise ValueError(f"unknown mode {mode!r}")
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    if objective != CLEARANCE_OBJ and (horizon is None or horizon < 1):
        raise ValueError("horizon must be at least 1 for maxflow and sat")
    if decompose:
        groups = [c.sorted_areas for c in partition_components(instance, mode)]
    else:
        groups = [sorted(instance.area_ids)] if instance.areas else []
    kwargs = dict(
        mode=mode,
        objective=objective,
        horizon=horizon,
        strategy=strategy,
        budget=budget,
        rate_set=rate_set,
        seed=seed,
        edges="dominating" if dominance else "all",
        use_bound=use_bound,
        sat_first=sat_first,
        fast_path=fast_path,
    )
    if workers > 1 and len(groups) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_component_job, [(instance, g, kwargs) for g in groups]))
    else:
        results = [solve_component(instance, g, **kwargs) for g in groups]

    per_area = {}
    for r in results:
        per_area.update(r.schedule)
    status = max((r.status for r in results), key=_STATUS_RANK.__getitem__, default=OPTIMAL)
    if objective == MAXFLOW:
        value = sum(r.objective or 0 for r in results)
    elif any(r.objective is None for r in results):
        value = None
    elif objective == CLEARANCE_OBJ:
        value = max((r.objective for r in results), default=0)
    else:
        value = instance.total_demand
    if status in (INFEASIBLE, UNKNOWN_TIMEOUT):
        per_area = {}
        value = None if objective != MAXFLOW else value
    per_area = {k: per_area[k] for k in sorted(per_area)}

    bound = None
    if compute_bound:
        if objective == MAXFLOW:
            bound = bounds.preemptive_max_flow(instance, horizon)
        elif objective == CLEARANCE_OBJ:
            bound = bounds.preemptive_clearance_lb(instance)
    return Solution(per_area, objective, value, mode, status, horizon, bound, results)


def solve_nepp(instance: Instance, objective: str = MAXFLOW, horizon: Optional[int] = None, **kwargs) -> Solution:
    """Simultaneous evacuation: cumulative constraints on shared arcs."""
    return solve(instance, SIMULTANEOUS, objective, horizon, **kwargs)


def solve_npepp(instance: Instance, objective: str = MAXFLOW, horizon: Optional[int] = None, **kwargs) -> Solution:
    """Phased evacuation: at most one area on any arc at any minute, rates at their maximum."""
    return solve(instance, PHASED, objective, horizon, **kwargs)
