"""Instance data model, JSON (de)serialization, path metrics and task domains.

Time is measured in integer minutes. Real arc travel times are rounded up
arc by arc before being accumulated into path offsets, so every quantity the
scheduler manipulates is integral.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

INF = math.inf

NODE_KINDS = ("evacuation", "transit", "safe")
SIMULTANEOUS = "simultaneous"
PHASED = "phased"
MODES = (SIMULTANEOUS, PHASED)


class InstanceError(ValueError):
    """Raised when an instance document is malformed or violates an invariant."""


class InstanceSyntaxError(InstanceError):
    pass


class InstanceSemanticError(InstanceError):
    def __init__(self, entity: str, message: str):
        super().__init__(f"{entity}: {message}")
        self.entity = entity


@dataclass(frozen=True)
class Node:
    id: str
    kind: str


@dataclass(frozen=True)
class Arc:
    id: str
    tail: str
    head: str
    travel_time: float
    capacity: float
    cutoff: float = INF

    @property
    def travel_ceil(self) -> int:
        return math.ceil(self.travel_time)


@dataclass(frozen=True)
class EvacArea:
    node: str
    demand: int
    path: tuple[str, ...]
    min_start: Optional[int] = None
    max_end: Optional[int] = None

    @property
    def id(self) -> str:
        return self.node


@dataclass(frozen=True)
class PathMetrics:
    """Constants derived from an area's evacuation path.

    ``offsets[e]`` is the integer travel time from the area to the tail of
    arc ``e``; ``head_offsets[e]`` the one to its head.
    """

    offsets: dict
    head_offsets: dict
    transit_ceil: int
    path_capacity: float
    last_dep: float  # integer or INF

    @property
    def path_capacity_floor(self) -> int:
        return math.floor(self.path_capacity)


@dataclass(frozen=True)
class Instance:
    nodes: tuple[Node, ...]
    arcs: tuple[Arc, ...]
    areas: tuple[EvacArea, ...]
    name: Optional[str] = None
    seed: Optional[int] = None
    _node_index: dict = field(default_factory=dict, repr=False, compare=False)
    _arc_index: dict = field(default_factory=dict, repr=False, compare=False)
    _area_index: dict = field(default_factory=dict, repr=False, compare=False)
    _metrics: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._node_index.update({n.id: n for n in self.nodes})
        self._arc_index.update({a.id: a for a in self.arcs})
        self._area_index.update({a.node: a for a in self.areas})

    def node(self, node_id: str) -> Node:
        return self._node_index[node_id]

    def arc(self, arc_id: str) -> Arc:
        return self._arc_index[arc_id]

    def area(self, area_id: str) -> EvacArea:
        return self._area_index[area_id]

    @property
    def area_ids(self) -> list[str]:
        return [a.node for a in self.areas]

    @property
    def total_demand(self) -> int:
        return sum(a.demand for a in self.areas)

    def metrics(self, area_id: str) -> PathMetrics:
        """Cached :func:`path_metrics` of an area."""
        m = self._metrics.get(area_id)
        if m is None:
            m = path_metrics(self.area(area_id), self)
            self._metrics[area_id] = m
        return m

    def subinstance(self, area_ids: Iterable[str]) -> "Instance":
        """Instance restricted to the given areas and the arcs/nodes of their paths."""
        keep = set(area_ids)
        areas = tuple(a for a in self.areas if a.node in keep)
        arc_ids = {e for a in areas for e in a.path}
        arcs = tuple(a for a in self.arcs if a.id in arc_ids)
        node_ids = {a.node for a in areas} | {x for a in arcs for x in (a.tail, a.head)}
        nodes = tuple(n for n in self.nodes if n.id in node_ids)
        return Instance(nodes, arcs, areas, name=self.name, seed=self.seed)


# ----------------------------------------------------------------------------
# parsing / serialization

_TOP_KEYS = {"nodes", "arcs", "areas", "name", "seed"}
_NODE_KEYS = {"id", "kind"}
_ARC_KEYS = {"id", "tail", "head", "travelTime", "capacity", "cutoff"}
_AREA_KEYS = {"node", "demand", "path", "minStart", "maxEnd"}


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise InstanceSyntaxError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise InstanceSyntaxError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise InstanceSyntaxError(f"{where}: missing field(s) {sorted(missing)}")


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceSyntaxError(f"{where}: expected a number, got {value!r}")
    return value


def _integer(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise InstanceSyntaxError(f"{where}: expected an integer, got {value!r}")
    return value


def instance_from_dict(doc: dict) -> Instance:
    _check_keys(doc, _TOP_KEYS, ("nodes", "arcs", "areas"), "instance")
    nodes = []
    for i, n in enumerate(doc["nodes"]):
        _check_keys(n, _NODE_KEYS, _NODE_KEYS, f"nodes[{i}]")
        nodes.append(Node(str(n["id"]), n["kind"]))
    arcs = []
    for i, a in enumerate(doc["arcs"]):
        _check_keys(a, _ARC_KEYS, ("id", "tail", "head", "travelTime", "capacity"), f"arcs[{i}]")
        cutoff = a.get("cutoff")
        arcs.append(
            Arc(
                id=str(a["id"]),
                tail=str(a["tail"]),
                head=str(a["head"]),
                travel_time=float(_number(a["travelTime"], f"arc {a['id']}.travelTime")),
                capacity=float(_number(a["capacity"], f"arc {a['id']}.capacity")),
                cutoff=INF if cutoff is None else float(_number(cutoff, f"arc {a['id']}.cutoff")),
            )
        )
    areas = []
    for i, a in enumerate(doc["areas"]):
        _check_keys(a, _AREA_KEYS, ("node", "demand", "path"), f"areas[{i}]")
        if not isinstance(a["path"], list):
            raise InstanceSyntaxError(f"areas[{i}].path: expected a list of arc ids")
        areas.append(
            EvacArea(
                node=str(a["node"]),
                demand=_integer(a["demand"], f"area {a['node']}.demand"),
                path=tuple(str(e) for e in a["path"]),
                min_start=None if a.get("minStart") is None else _integer(a["minStart"], "minStart"),
                max_end=None if a.get("maxEnd") is None else _integer(a["maxEnd"], "maxEnd"),
            )
        )
    inst = Instance(tuple(nodes), tuple(arcs), tuple(areas), name=doc.get("name"), seed=doc.get("seed"))
    validate_instance(inst)
    return inst


def parse_instance(text: str) -> Instance:
    """Parse and validate a JSON instance document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceSyntaxError(f"malformed document: {exc}") from None
    return instance_from_dict(doc)


def instance_to_dict(inst: Instance) -> dict:
    doc = {}
    if inst.name is not None:
        doc["name"] = inst.name
    if inst.seed is not None:
        doc["seed"] = inst.seed
    doc["nodes"] = [{"id": n.id, "kind": n.kind} for n in inst.nodes]
    doc["arcs"] = [
        {
            "id": a.id,
            "tail": a.tail,
            "head": a.head,
            "travelTime": a.travel_time,
            "capacity": a.capacity,
            "cutoff": None if math.isinf(a.cutoff) else a.cutoff,
        }
        for a in inst.arcs
    ]
    areas = []
    for a in inst.areas:
        d = {"node": a.node, "demand": a.demand, "path": list(a.path)}
        if a.min_start is not None:
            d["minStart"] = a.min_start
        if a.max_end is not None:
            d["maxEnd"] = a.max_end
        areas.append(d)
    doc["areas"] = areas
    return doc


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2)


def validate_instance(inst: Instance) -> None:
    """Check every structural invariant, raising :class:`InstanceSemanticError`."""
    seen = set()
    for n in inst.nodes:
        if n.id in seen:
            raise InstanceSemanticError(f"node {n.id}", "duplicate node id")
        if n.kind not in NODE_KINDS:
            raise InstanceSemanticError(f"node {n.id}", f"unknown kind {n.kind!r}")
        seen.add(n.id)
    arc_ids = set()
    for a in inst.arcs:
        where = f"arc {a.id}"
        if a.id in arc_ids:
            raise InstanceSemanticError(where, "duplicate arc id")
        arc_ids.add(a.id)
        for end in (a.tail, a.head):
            if end not in seen:
                raise InstanceSemanticError(where, f"dangling node reference {end!r}")
        if not a.travel_time >= 0:
            raise InstanceSemanticError(where, "travelTime must be non-negative")
        if not a.capacity > 0:
            raise InstanceSemanticError(where, "capacity must be positive")
        if not a.cutoff > 0:
            raise InstanceSemanticError(where, "cutoff must be positive or null")
    area_nodes = set()
    for area in inst.areas:
        where = f"area {area.node}"
        if area.node not in seen:
            raise InstanceSemanticError(where, "dangling node reference")
        if inst.node(area.node).kind != "evacuation":
            raise InstanceSemanticError(where, "area node must be an evacuation node")
        if area.node in area_nodes:
            raise InstanceSemanticError(where, "duplicate area")
        area_nodes.add(area.node)
        if area.demand < 1:
            raise InstanceSemanticError(where, "demand must be a positive integer")
        if not area.path:
            raise InstanceSemanticError(where, "path must not be empty")
        if area.min_start is not None and area.min_start < 0:
            raise InstanceSemanticError(where, "minStart must be non-negative")
        if area.max_end is not None and area.max_end < 0:
            raise InstanceSemanticError(where, "maxEnd must be non-negative")
        at = area.node
        visited = {at}
        for e in area.path:
            if e not in arc_ids:
                raise InstanceSemanticError(where, f"dangling arc reference {e!r}")
            arc = inst.arc(e)
            if arc.tail != at:
                raise InstanceSemanticError(where, f"path is disconnected at arc {e}")
            at = arc.head
            if at in visited:
                raise InstanceSemanticError(where, f"path revisits node {at}")
            visited.add(at)
        if inst.node(at).kind != "safe":
            raise InstanceSemanticError(where, "path must end at safe node")
    for n in inst.nodes:
        if n.kind == "evacuation" and n.id not in area_nodes:
            raise InstanceSemanticError(f"node {n.id}", "evacuation node without demand entry")


# ----------------------------------------------------------------------------
# derived quantities


def path_metrics(area: EvacArea, instance: Instance) -> PathMetrics:
    offsets = {}
    head_offsets = {}
    t = 0
    capacity = INF
    last_dep = INF
    for e in area.path:
        arc = instance.arc(e)
        offsets[e] = t
        t += arc.travel_ceil
        head_offsets[e] = t
        capacity = min(capacity, arc.capacity)
        if not math.isinf(arc.cutoff):
            last_dep = min(last_dep, arc.cutoff - t)
    if not math.isinf(last_dep):
        last_dep = math.floor(last_dep)
    return PathMetrics(offsets, head_offsets, t, capacity, last_dep)


def clearance_horizon_ub(instance: Instance) -> int:
    """Horizon sufficient to evacuate every area one after the other at rate 1."""
    if not instance.areas:
        return 1
    transit = max(instance.metrics(a.node).transit_ceil for a in instance.areas)
    # departure windows only delay the serial plan by the largest release
    release = max((a.min_start or 0) for a in instance.areas)
    return transit + release + sum(a.demand for a in instance.areas)


@dataclass
class TaskState:
    """Integer domains of one area's decision variables.

    ``rate_set`` holds the explicit rate values when a restricted set is
    configured; ``rate`` then spans its min and max.
    """

    area: str
    demand: int
    start: tuple[int, int]
    dur: tuple[int, int]
    end: tuple[int, int]
    flow: tuple[int, int]
    rate: tuple[int, int]
    rate_set: Optional[tuple[int, ...]] = None
    infeasible: bool = False

    @property
    def fixed_unevacuated(self) -> bool:
        return self.dur == (0, 0)


def start_upper_bound(area: EvacArea, metrics: PathMetrics, horizon: int) -> float:
    ub = min(horizon - metrics.transit_ceil, metrics.last_dep)
    if area.max_end is not None:
        ub = min(ub, area.max_end)
    return ub


def init_task_domains(
    area: EvacArea,
    metrics: PathMetrics,
    horizon: int,
    mode: str = SIMULTANEOUS,
    rate_set: Optional[Iterable[int]] = None,
) -> TaskState:
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    d = area.demand
    rmax = min(d, metrics.path_capacity_floor)
    values = list(range(1, rmax + 1))
    if rate_set is not None:
        allowed = set(rate_set)
        values = [v for v in values if v in allowed]
    if values and mode == PHASED:
        values = [values[-1]]
    ub = start_upper_bound(area, metrics, horizon)
    lb = area.min_start or 0
    if ub < lb or not values:
        # nothing can depart: the area stays unevacuated
        lo_r = values[0] if values else 1
        return TaskState(
            area=area.node,
            demand=d,
            start=(0, 0),
            dur=(0, 0),
            end=(0, 0),
            flow=(0, 0),
            rate=(lo_r, lo_r),
            rate_set=None,
            infeasible=True,
        )
    ub = int(ub)
    rs = tuple(values) if (rate_set is not None and len(values) > 1) else None
    return TaskState(
        area=area.node,
        demand=d,
        start=(lb, ub),
        dur=(0, d),
        end=(lb, ub),
        flow=(0, d),
        rate=(values[0], values[-1]),
        rate_set=rs,
    )
