"""Non-preemptive evacuation scheduling over fixed evacuation paths."""

from .bounds import bound_report, preemptive_clearance_lb, preemptive_max_flow
from .decompose import ComponentPartition, direct_dependency, dominating_edges, partition_components
from .engine import Budget
from .model import (
    PHASED,
    SIMULTANEOUS,
    Arc,
    EvacArea,
    Instance,
    InstanceError,
    Node,
    PathMetrics,
    TaskState,
    clearance_horizon_ub,
    init_task_domains,
    parse_instance,
    path_metrics,
    serialize_instance,
)
from .solvers import Solution, phased_greedy_convergent, solve, solve_nepp, solve_npepp
from .validate import brute_force_optimum, generate_instance, simulate

__version__ = "0.1.0"
