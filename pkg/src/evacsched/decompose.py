"""Independent-component partition and dominating-edge reduction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .model import PHASED, SIMULTANEOUS, Instance


@dataclass(frozen=True)
class Component:
    areas: frozenset
    edges: frozenset
    areas_per_edge: dict
    dominating_edges: frozenset = frozenset()

    @property
    def sorted_areas(self) -> list[str]:
        return sorted(self.areas)


@dataclass(frozen=True)
class ComponentPartition:
    components: tuple[Component, ...]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def to_dict(self) -> dict:
        return {
            "components": [
                {
                    "areas": c.sorted_areas,
                    "edges": sorted(c.edges),
                    "dominatingEdges": sorted(c.dominating_edges),
                }
                for c in self.components
            ]
        }


def direct_dependency(p: Iterable[str], q: Iterable[str]) -> bool:
    """True iff the two paths (arc-id sequences) share an arc."""
    return not set(p).isdisjoint(q)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def areas_per_edge(instance: Instance, area_ids: Iterable[str] | None = None) -> dict:
    ids = instance.area_ids if area_ids is None else area_ids
    out: dict = {}
    for k in ids:
        for e in instance.area(k).path:
            out.setdefault(e, set()).add(k)
    return {e: frozenset(v) for e, v in out.items()}


def partition_components(instance: Instance, mode: str = SIMULTANEOUS) -> ComponentPartition:
    """Group areas whose paths are (directly or transitively) arc-dependent.

    Paths touching only at a node are independent: nodes carry no capacity.
    Each component also carries its dominating edges for ``mode``.
    """
    uf = _UnionFind(instance.area_ids)
    owner = {}
    for area in instance.areas:
        for e in area.path:
            if e in owner:
                uf.union(owner[e], area.node)
            else:
                owner[e] = area.node
    groups: dict = {}
    for k in instance.area_ids:
        groups.setdefault(uf.find(k), set()).add(k)
    comps = []
    for members in sorted(groups.values(), key=min):
        ape = areas_per_edge(instance, sorted(members))
        comp = Component(frozenset(members), frozenset(ape), ape)
        dom = dominating_edges(comp, instance, mode)
        comps.append(Component(comp.areas, comp.edges, ape, frozenset(dom)))
    return ComponentPartition(tuple(comps))


def dominates(e: str, e2: str, ape: dict, instance: Instance, mode: str) -> bool:
    """Whether the capacity constraint of ``e`` implies the one of ``e2``."""
    if e == e2:
        return False
    users = ape[e2]
    if not users <= ape[e]:
        return False
    if mode == SIMULTANEOUS and instance.arc(e).capacity > instance.arc(e2).capacity:
        return False
    # the time lag between the two arcs must be the same for every area using e2
    lags = {instance.metrics(k).offsets[e2] - instance.metrics(k).offsets[e] for k in users}
    return len(lags) == 1


def _preference(e: str, ape: dict, instance: Instance):
    # larger offset = closer to the safe node; used to break mutual domination
    off = min(instance.metrics(k).offsets[e] for k in ape[e])
    return (off, _neg_str(e))


def _neg_str(s: str):
    # orders ids so that the lexicographically smallest compares greatest
    return tuple(-ord(c) for c in s) + (1,)


def dominating_edges(component: Component, instance: Instance, mode: str = SIMULTANEOUS) -> set:
    if mode not in (SIMULTANEOUS, PHASED):
        raise ValueError(f"unknown mode {mode!r}")
    ape = component.areas_per_edge
    # least preferred first, so that of two mutually dominating edges the
    # preferred one survives
    order = sorted(component.edges, key=lambda e: _preference(e, ape, instance))
    kept = set(component.edges)
    for e2 in order:
        if any(dominates(e, e2, ape, instance, mode) for e in kept if e != e2):
            kept.discard(e2)
    return kept
