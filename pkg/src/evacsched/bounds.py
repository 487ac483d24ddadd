"""Preemptive relaxation bounds via time-expanded maximum flow.

Departures may stop, restart and change rate every minute; vehicles still
follow their area's fixed path. Each (arc, minute) pair becomes an
``in -> out`` node pair of capacity ``floor(capacity)``, and a vehicle
leaving area ``k`` at minute ``t`` crosses arc ``e`` at minute
``t + offset_k(e)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import maximum_flow

from .decompose import partition_components
from .model import SIMULTANEOUS, Instance, clearance_horizon_ub, start_upper_bound


@dataclass
class TimeExpandedNet:
    """Integer-capacitated arc list of the time-expanded network."""

    num_nodes: int
    source: int
    sink: int
    tails: list
    heads: list
    caps: list
    total_demand: int

    def max_flow(self) -> int:
        if not self.tails or self.total_demand == 0:
            return 0
        m = coo_matrix(
            (np.asarray(self.caps, dtype=np.int64), (np.asarray(self.tails), np.asarray(self.heads))),
            shape=(self.num_nodes, self.num_nodes),
        ).tocsr()
        m.sum_duplicates()
        m = m.astype(np.int32)
        return int(maximum_flow(m, self.source, self.sink).flow_value)

    def to_networkx(self):
        """The same network as a ``networkx.DiGraph`` (parallel arcs merged)."""
        import networkx as nx

        g = nx.DiGraph()
        for u, v, c in zip(self.tails, self.heads, self.caps):
            if g.has_edge(u, v):
                g[u][v]["capacity"] += c
            else:
                g.add_edge(u, v, capacity=c)
        return g


def departure_window(instance: Instance, area_id: str, horizon: int) -> range:
    """Minutes at which area ``area_id`` may release vehicles within ``horizon``."""
    area = instance.area(area_id)
    met = instance.metrics(area_id)
    ub = start_upper_bound(area, met, horizon)
    lb = area.min_start or 0
    if met.path_capacity_floor < 1 or ub <= lb:
        return range(0)
    return range(lb, int(ub))


def build_time_expanded_net(
    instance: Instance,
    horizon: int,
    area_ids: Optional[Iterable[str]] = None,
    edges: Optional[Iterable[str]] = None,
) -> TimeExpandedNet:
    """Build the network for ``area_ids`` with capacity nodes on ``edges`` (default: all path arcs)."""
    ids = sorted(instance.area_ids if area_ids is None else area_ids)
    keep = None if edges is None else set(edges)
    source, sink = 0, 1
    index = {}
    tails, heads, caps = [], [], []

    def node(key):
        v = index.get(key)
        if v is None:
            v = index[key] = len(index) + 2
        return v

    big = sum(instance.area(k).demand for k in ids) + 1
    for k in ids:
        area = instance.area(k)
        met = instance.metrics(k)
        window = departure_window(instance, k, horizon)
        if not window:
            continue
        a = node(("area", k))
        tails.append(source)
        heads.append(a)
        caps.append(area.demand)
        chain = [e for e in area.path if keep is None or e in keep]
        rate_cap = met.path_capacity_floor
        for t in window:
            prev = a
            prev_cap = rate_cap
            for e in chain:
                m = t + met.offsets[e]
                vin = node(("in", e, m))
                tails.append(prev)
                heads.append(vin)
                caps.append(prev_cap)
                prev = node(("out", e, m))
                prev_cap = big
            tails.append(prev)
            heads.append(sink)
            caps.append(prev_cap)
    for key, vin in list(index.items()):
        if key[0] == "in":
            _, e, m = key
            tails.append(vin)
            heads.append(index[("out", e, m)])
            caps.append(math.floor(instance.arc(e).capacity))
    return TimeExpandedNet(len(index) + 2, source, sink, tails, heads, caps, big - 1)


def _component_bounds(instance: Instance, horizon: int, dominating_only: bool):
    out = []
    for comp in partition_components(instance, SIMULTANEOUS):
        edges = comp.dominating_edges if dominating_only else None
        net = build_time_expanded_net(instance, horizon, comp.areas, edges)
        out.append((comp, net.max_flow()))
    return out


def preemptive_max_flow(instance: Instance, horizon: int, dominating_only: bool = True) -> int:
    """Most vehicles that can reach safety by ``horizon`` when departures may be interrupted."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    return sum(v for _, v in _component_bounds(instance, horizon, dominating_only))


def bound_report(instance: Instance, horizon: int) -> dict:
    per = []
    total = 0
    for comp, v in _component_bounds(instance, horizon, True):
        demand = sum(instance.area(k).demand for k in comp.areas)
        per.append({"areas": comp.sorted_areas, "demand": demand, "bound": v})
        total += v
    return {"horizon": horizon, "bound": total, "demand": instance.total_demand, "perComponent": per}


def preemptive_clearance_lb(instance: Instance) -> Optional[int]:
    """Smallest horizon at which the preemptive relaxation evacuates everyone.

    Returns ``None`` when even the serial horizon bound cannot evacuate all
    demand (cut arcs or sub-unit capacities).
    """
    if not instance.areas:
        return 0
    best = 0
    for comp in partition_components(instance, SIMULTANEOUS):
        sub = instance.subinstance(comp.areas)
        demand = sub.total_demand
        hub = clearance_horizon_ub(sub)

        def ok(h):
            net = build_time_expanded_net(sub, h, None, comp.dominating_edges)
            return net.max_flow() >= demand

        if not ok(hub):
            return None
        lo = max(sub.metrics(k).transit_ceil for k in sub.area_ids) + 1
        hi = hub
        while lo < hi:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid + 1
        best = max(best, lo)
    return best
