"""Schedule auditing, exhaustive test oracle and seeded instance generation.

The simulator re-derives path offsets from raw arc data and replays every
batch minute by minute; it shares no code with the search engine.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .model import INF, PHASED, SIMULTANEOUS, Arc, EvacArea, Instance, Node

EDGE_CAPACITY = "edgeCapacity"
DISJOINTNESS = "disjointness"
CUTOFF = "cutoff"
HORIZON = "horizon"
DEMAND_EXCEEDED = "demandExceeded"
PREEMPTION = "preemption"


class SearchSpaceTooLarge(ValueError):
    pass


@dataclass
class Violation:
    kind: str
    where: str
    minute: Optional[int]
    detail: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "where": self.where, "minute": self.minute, "detail": self.detail}


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    occupancy: dict = field(default_factory=dict)
    evacuees_by_safe_node: dict = field(default_factory=dict)
    clearance_time: int = 0
    evacuated: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [v.to_dict() for v in self.violations],
            "evacuated": self.evacuated,
            "clearanceTime": self.clearance_time,
            "evacueesBySafeNode": dict(sorted(self.evacuees_by_safe_node.items())),
        }


def _walk(instance: Instance, area: EvacArea):
    """Yield ``(arc, minute offset of tail, minute offset of head)`` along the path."""
    t = 0
    for e in area.path:
        arc = instance.arc(e)
        step = math.ceil(arc.travel_time)
        yield arc, t, t + step
        t += step


def _fields(entry) -> tuple:
    if isinstance(entry, Mapping):
        return entry["start"], entry["dur"], entry["end"], entry["rate"], entry["flow"]
    if isinstance(entry, (tuple, list)):
        return tuple(entry)
    return entry.start, entry.dur, entry.end, entry.rate, entry.flow


def schedule_of(solution) -> dict:
    """``{area: (start, dur, end, rate, flow)}`` from a Solution, a solution document or a plain mapping."""
    if hasattr(solution, "per_area"):
        solution = solution.per_area
    elif isinstance(solution, Mapping) and "perArea" in solution:
        solution = solution["perArea"]
    return {k: _fields(v) for k, v in solution.items()}


def simulate(solution, instance: Instance, mode: str = SIMULTANEOUS, horizon: Optional[int] = None) -> ValidationReport:
    """Replay a schedule and report every violated rule.

    Area ``k`` releases ``rate`` vehicles at minutes ``start .. end-1`` and
    occupies arc ``e`` during ``[start + t_e, end + t_e)`` where ``t_e`` is the
    rounded travel time to the arc's tail. ``horizon=None`` skips the horizon
    check (clearance schedules).
    """
    sched = schedule_of(solution)
    rep = ValidationReport()
    occ = defaultdict(int)
    owners = defaultdict(list)
    unknown = set(sched) - set(instance.area_ids)
    for k in sorted(unknown):
        rep.violations.append(Violation(PREEMPTION, f"area {k}", None, "schedule references an unknown area"))
    for area in instance.areas:
        k = area.node
        if k not in sched:
            continue
        start, dur, end, rate, flow = sched[k]
        where = f"area {k}"
        if flow > area.demand:
            rep.violations.append(Violation(DEMAND_EXCEEDED, where, None, f"flow {flow} > demand {area.demand}"))
        if flow < 0 or dur < 0:
            rep.violations.append(Violation(PREEMPTION, where, None, "negative flow or duration"))
            continue
        if flow == 0 and dur == 0:
            continue
        if rate < 1:
            rep.violations.append(Violation(PREEMPTION, where, None, f"rate {rate} must be at least 1"))
            continue
        if start + dur != end:
            rep.violations.append(
                Violation(PREEMPTION, where, None, f"start {start} + dur {dur} != end {end}: not one contiguous block")
            )
            continue
        if flow != min(dur * rate, area.demand):
            rep.violations.append(
                Violation(PREEMPTION, where, None, f"flow {flow} != min(dur*rate, demand) = {min(dur * rate, area.demand)}")
            )
        lb = area.min_start or 0
        if start < lb:
            rep.violations.append(Violation(HORIZON, where, start, f"start before minStart {lb}"))
        if area.max_end is not None and end > area.max_end:
            rep.violations.append(Violation(HORIZON, where, end, f"end after maxEnd {area.max_end}"))
        transit = 0
        for arc, t_tail, t_head in _walk(instance, area):
            transit = t_head
            if end + t_head > arc.cutoff:
                rep.violations.append(
                    Violation(CUTOFF, f"arc {arc.id}", end - 1 + t_head, f"area {k} still departing when the arc is cut at {arc.cutoff}")
                )
            for m in range(start + t_tail, end + t_tail):
                occ[(arc.id, m)] += rate
                owners[(arc.id, m)].append(k)
        arrival = end + transit
        if horizon is not None and arrival > horizon:
            rep.violations.append(Violation(HORIZON, where, end - 1 + transit, f"last batch arrives after horizon {horizon}"))
        rep.clearance_time = max(rep.clearance_time, arrival)
        rep.evacuated += flow
        safe = instance.arc(area.path[-1]).head
        rep.evacuees_by_safe_node[safe] = rep.evacuees_by_safe_node.get(safe, 0) + flow
    for (e, m), used in sorted(occ.items()):
        arc = instance.arc(e)
        if used > arc.capacity:
            rep.violations.append(Violation(EDGE_CAPACITY, f"arc {e}", m, f"usage {used} > capacity {arc.capacity}"))
        if mode == PHASED and len(owners[(e, m)]) > 1:
            rep.violations.append(
                Violation(DISJOINTNESS, f"arc {e}", m, f"areas {sorted(owners[(e, m)])} share the arc")
            )
    rep.occupancy = dict(occ)
    return rep


# ----------------------------------------------------------------------------
# exhaustive oracle


def _area_window(instance: Instance, area: EvacArea, horizon: int):
    transit = 0
    last_dep = INF
    cap = INF
    for arc, _, t_head in _walk(instance, area):
        transit = t_head
        cap = min(cap, arc.capacity)
        last_dep = min(last_dep, arc.cutoff - t_head)
    ub = min(horizon - transit, last_dep)
    if area.max_end is not None:
        ub = min(ub, area.max_end)
    ub = math.floor(ub) if ub != INF else ub
    return (area.min_start or 0), ub, transit, math.floor(cap)


def _options(instance, area, horizon, mode, objective, rate_set):
    lb, ub, transit, capf = _area_window(instance, area, horizon)
    d = area.demand
    rates = list(range(1, min(d, capf) + 1))
    if rate_set is not None:
        rates = [r for r in rates if r in rate_set]
    if mode == PHASED and rates:
        rates = rates[-1:]
    opts = []
    for r in rates:
        need = -(-d // r)
        durs = [need] if objective != "maxflow" else range(1, need + 1)
        for du in durs:
            for s in range(lb, ub - du + 1):
                opts.append((s, du, s + du, r, min(du * r, d)))
    if objective == "maxflow":
        opts.append((0, 0, 0, rates[0] if rates else 1, 0))
    return opts, transit


def brute_force_optimum(
    instance: Instance,
    mode: str = SIMULTANEOUS,
    objective: str = "maxflow",
    horizon: Optional[int] = None,
    rate_set: Optional[Iterable[int]] = None,
    cap: int = 10**7,
    return_schedule: bool = False,
):
    """Optimal objective by enumerating every non-wasteful schedule.

    Durations longer than ``ceil(demand / rate)`` are skipped because they
    carry no extra vehicles. ``sat`` returns the total demand or ``None``;
    ``clearance`` returns the minimum clearance time or ``None``.
    """
    rs = None if rate_set is None else set(rate_set)
    if objective == "clearance":
        transit = max((sum(math.ceil(instance.arc(e).travel_time) for e in a.path) for a in instance.areas), default=0)
        release = max(((a.min_start or 0) for a in instance.areas), default=0)
        horizon = transit + release + sum(a.demand for a in instance.areas)
    if horizon is None:
        raise ValueError("horizon required")
    areas = sorted(instance.areas, key=lambda a: a.node)
    per = []
    size = 1
    for a in areas:
        opts, transit = _options(instance, a, horizon, mode, objective, rs)
        if objective == "maxflow":
            opts.sort(key=lambda o: (-o[4], o[0], o[1], o[3]))
        else:
            opts.sort(key=lambda o: (o[2] + transit, o[0], -o[3]))
        per.append((a, opts, transit, [(arc.id, t) for arc, t, _ in _walk(instance, a)]))
        size *= max(1, len(opts))
    if size > cap:
        raise SearchSpaceTooLarge(f"{size} assignments exceed the cap {cap}")
    capacity = {arc.id: arc.capacity for arc in instance.arcs}
    n = len(per)
    suffix_demand = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_demand[i] = suffix_demand[i + 1] + per[i][0].demand
    occ = defaultdict(int)
    cnt = defaultdict(int)
    best = [None, None]
    chosen = [None] * n

    def place(i, o, sign):
        s, _, e, r, f = o
        if f == 0:
            return True
        ok = True
        for aid, t in per[i][3]:
            for m in range(s + t, e + t):
                occ[(aid, m)] += sign * r
                cnt[(aid, m)] += sign
                if sign > 0 and (occ[(aid, m)] > capacity[aid] or (mode == PHASED and cnt[(aid, m)] > 1)):
                    ok = False
        return ok

    def rec(i, value):
        if i == n:
            if objective == "maxflow":
                if best[0] is None or value > best[0]:
                    best[0], best[1] = value, list(chosen)
            elif best[0] is None or value < best[0]:
                best[0], best[1] = value, list(chosen)
            return objective == "sat"
        for o in per[i][1]:
            if objective == "maxflow":
                if best[0] is not None and value + o[4] + suffix_demand[i + 1] <= best[0]:
                    continue
                nv = value + o[4]
            elif objective == "clearance":
                nv = max(value, o[2] + per[i][2])
                if best[0] is not None and nv >= best[0]:
                    continue
            else:
                nv = value
            ok = place(i, o, 1)
            if ok:
                chosen[i] = o
                if rec(i + 1, nv):
                    place(i, o, -1)
                    return True
            place(i, o, -1)
        return False

    rec(0, 0)
    value, sched = best
    if sched is not None:
        plan = {a.node: (o[0], o[1], o[2], o[3], o[4]) for (a, *_), o in zip(per, sched)}
        rep = simulate(plan, instance, mode, None if objective == "clearance" else horizon)
        if not rep.ok:
            raise AssertionError(f"oracle produced an invalid schedule: {rep.violations[0]}")
        if objective == "sat":
            value = sum(a.demand for a in instance.areas)
    if return_schedule:
        return value, (None if sched is None else plan)
    return value


# ----------------------------------------------------------------------------
# generator

CONVERGENT_FOREST = "convergentForest"
RANDOM_PATHS = "randomPaths"


@dataclass
class GeneratorParams:
    areas: int = 3
    max_demand: int = 6
    max_capacity: float = 3
    max_travel: float = 3.0
    tree_shape: str = CONVERGENT_FOREST
    cutoff_probability: float = 0.0
    safe_nodes: int = 1
    transit_nodes: Optional[int] = None
    arcs: Optional[int] = None
    fractional: bool = True
    min_demand: int = 1
    min_capacity: float = 1

    @classmethod
    def from_dict(cls, d: Mapping) -> "GeneratorParams":
        keymap = {
            "areas": "areas",
            "maxDemand": "max_demand",
            "maxCapacity": "max_capacity",
            "maxTravel": "max_travel",
            "treeShape": "tree_shape",
            "cutoffProbability": "cutoff_probability",
            "safeNodes": "safe_nodes",
            "transitNodes": "transit_nodes",
            "arcs": "arcs",
            "fractional": "fractional",
            "minDemand": "min_demand",
            "minCapacity": "min_capacity",
        }
        kw = {}
        for k, v in d.items():
            if k not in keymap:
                raise ValueError(f"unknown generator parameter {k!r}")
            kw[keymap[k]] = v
        return cls(**kw)


class _Builder:
    def __init__(self, rng: random.Random, p: GeneratorParams):
        self.rng = rng
        self.p = p
        self.nodes: dict = {}
        self.arcs: dict = {}
        self.pair: dict = {}

    def node(self, nid, kind):
        self.nodes[nid] = kind
        return nid

    def travel(self):
        p, rng = self.p, self.rng
        if p.fractional and rng.random() < 0.4:
            return round(rng.uniform(0.3, p.max_travel), 2)
        return float(rng.randint(1, max(1, int(p.max_travel))))

    def capacity(self):
        p, rng = self.p, self.rng
        lo = max(1, int(math.ceil(p.min_capacity)))
        hi = max(lo, int(p.max_capacity))
        c = float(rng.randint(lo, hi))
        if p.fractional and rng.random() < 0.25:
            c += 0.5
            c = min(c, float(p.max_capacity)) if c > p.max_capacity else c
        return c

    def arc(self, tail, head, horizon_scale):
        key = (tail, head)
        if key in self.pair:
            return self.pair[key]
        aid = f"e{len(self.arcs)}"
        cutoff = None
        if self.rng.random() < self.p.cutoff_probability:
            cutoff = float(self.rng.randint(2, max(3, horizon_scale)))
        self.arcs[aid] = (tail, head, self.travel(), self.capacity(), cutoff)
        self.pair[key] = aid
        return aid

    def build(self, paths: dict, name: str, seed: int) -> Instance:
        nodes = tuple(Node(i, k) for i, k in self.nodes.items())
        arcs = tuple(
            Arc(aid, t, h, tt, c, INF if cut is None else cut) for aid, (t, h, tt, c, cut) in self.arcs.items()
        )
        areas = tuple(
            EvacArea(k, self.rng.randint(self.p.min_demand, max(self.p.min_demand, self.p.max_demand)), tuple(path))
            for k, path in paths.items()
        )
        return Instance(nodes, arcs, areas, name=name, seed=seed)


def generate_instance(params: GeneratorParams | Mapping, seed: int) -> Instance:
    """Random instance, deterministic per ``seed``.

    ``convergentForest`` grows trees rooted at safe nodes with areas at the
    leaves, so paths that meet stay merged. ``randomPaths`` lets paths merge
    and split again. ``arcs`` pads the network with unused arcs.
    """
    p = params if isinstance(params, GeneratorParams) else GeneratorParams.from_dict(params)
    if p.areas < 1 or p.max_demand < 1 or p.max_capacity < 1 or p.max_travel <= 0 or p.safe_nodes < 1:
        raise ValueError("generator parameters must be positive")
    rng = random.Random(seed)
    b = _Builder(rng, p)
    scale = int(4 * p.max_travel + 2 * p.max_demand)
    safes = [b.node(f"s{i}", "safe") for i in range(p.safe_nodes)]
    n_transit = p.transit_nodes if p.transit_nodes is not None else max(1, p.areas)
    paths = {}
    if p.tree_shape == CONVERGENT_FOREST:
        parent = {}
        arc_to_parent = {}
        transit = []
        for i in range(n_transit):
            t = b.node(f"t{i}", "transit")
            pool = safes + transit
            par = safes[i % len(safes)] if i < len(safes) else rng.choice(pool)
            parent[t] = par
            transit.append(t)
            arc_to_parent[t] = b.arc(t, par, scale)
        for j in range(p.areas):
            k = b.node(f"a{j}", "evacuation")
            par = rng.choice(transit + safes) if rng.random() < 0.15 else rng.choice(transit)
            parent[k] = par
            arc_to_parent[k] = b.arc(k, par, scale)
            path = []
            at = k
            while at in parent:
                path.append(arc_to_parent[at])
                at = parent[at]
            paths[k] = path
    elif p.tree_shape == RANDOM_PATHS:
        transit = [b.node(f"t{i}", "transit") for i in range(n_transit)]
        for j in range(p.areas):
            k = b.node(f"a{j}", "evacuation")
            hops = rng.randint(0, min(3, len(transit)))
            mids = rng.sample(transit, hops)
            seq = [k] + mids + [rng.choice(safes)]
            paths[k] = [b.arc(seq[i], seq[i + 1], scale) for i in range(len(seq) - 1)]
    else:
        raise ValueError(f"unknown tree shape {p.tree_shape!r}")
    if p.arcs is not None:
        ids = list(b.nodes)
        tries = 0
        while len(b.arcs) < p.arcs and tries < 100 * p.arcs:
            tries += 1
            u, v = rng.sample(ids, 2)
            if b.nodes[u] == "safe" or b.nodes[v] == "evacuation":
                continue
            b.arc(u, v, scale)
    # drop transit nodes nothing touches
    used = {x for (t, h, *_r) in b.arcs.values() for x in (t, h)}
    b.nodes = {i: k for i, k in b.nodes.items() if k == "safe" or i in used}
    return b.build(paths, name=f"gen-{p.tree_shape}-{p.areas}-{seed}", seed=seed)
