from array import array

import pytest
from conftest import F1_DOC, f2_doc, load
from hypothesis import given, settings
from hypothesis import strategies as st

from evacsched.engine import (
    CUMULATIVE,
    DISJUNCTIVE,
    INFEASIBLE,
    OPTIMAL,
    Budget,
    State,
    branch_and_bound,
    edge_view,
    make_strategy,
    propagate,
    timetable_consistent,
    timetable_profile,
)
from evacsched.engine import _kernel_py
from evacsched.engine.kernel import IMPLEMENTATION
from evacsched.engine.state import D, E, F, R, S
from evacsched.engine.strategies import COMBINED, apply
from evacsched.solvers import build_problem
from evacsched.validate import GeneratorParams, brute_force_optimum, generate_instance, simulate

try:
    from evacsched.engine import _kernel as _kernel_c
except ImportError:  # pragma: no cover - depends on the build
    _kernel_c = None


def fixed_state(tasks):
    """State with every task fixed to ``(start, dur, rate)``; flow is dur*rate."""
    lo, hi = array("q"), array("q")
    for s, d, r in tasks:
        vals = [s, d, s + d, d * r, r]
        lo.extend(vals)
        hi.extend(vals)
    return State(lo, hi, [None] * len(tasks))


def open_state(n, start=(0, 5), dur=(0, 4), rate=(1, 2), flow=(0, 8)):
    lo, hi = array("q"), array("q")
    for _ in range(n):
        lo.extend([start[0], dur[0], start[0] + dur[0], flow[0], rate[0]])
        hi.extend([start[1], dur[1], start[1] + dur[1], flow[1], rate[1]])
    return State(lo, hi, [None] * n)


# ---------------------------------------------------------------- views


def test_edge_view_shift(f2):
    st_ = open_state(1)
    v = edge_view(st_, 0, "s", f2.metrics("a").offsets, "a")
    assert v.start == (1, 6)


def test_edge_view_identity(f2):
    st_ = open_state(1)
    v = edge_view(st_, 0, "ea", f2.metrics("a").offsets)
    assert v.start == st_.domain(0, S)
    assert v.end == st_.domain(0, E)


def test_edge_view_fixed_start():
    st_ = fixed_state([(3, 2, 1)])
    v = edge_view(st_, 0, "e", {"e": 2})
    assert v.compulsory_part() == (5, 7)


def test_edge_view_writes_through():
    st_ = open_state(1)
    v = edge_view(st_, 0, "e", {"e": 2})
    v.set_start(lo=4)
    assert st_.domain(0, S)[0] == 2
    st_.hi[E] = 6
    assert v.end[1] == 8


def test_edge_view_off_path(f2):
    with pytest.raises(ValueError):
        edge_view(open_state(1), 0, "eb", f2.metrics("a").offsets, "a")


# ---------------------------------------------------------------- timetable


def test_timetable_disjoint_fixed():
    st_ = fixed_state([(1, 2, 2), (3, 1, 2)])
    views = [edge_view(st_, i, "s", {"s": 0}) for i in range(2)]
    assert timetable_consistent(views, 2.0).consistent
    assert timetable_profile(views) == [(1, 2), (4, -2)]


def test_timetable_overlap_fails():
    st_ = fixed_state([(1, 2, 2), (2, 2, 2)])
    views = [edge_view(st_, i, "s", {"s": 0}) for i in range(2)]
    assert not timetable_consistent(views, 2.0).consistent


def test_disjunctive_overlap_fails():
    st_ = fixed_state([(1, 2, 1), (2, 2, 1)])
    views = [edge_view(st_, i, "s", {"s": 0}) for i in range(2)]
    assert timetable_consistent(views, 5.0, CUMULATIVE).consistent
    assert not timetable_consistent(views, 5.0, DISJUNCTIVE).consistent


def test_fractional_capacity_compared_directly():
    st_ = fixed_state([(0, 1, 1), (0, 1, 1)])
    views = [edge_view(st_, i, "s", {"s": 0}) for i in range(2)]
    assert not timetable_consistent(views, 1.5).consistent
    assert timetable_consistent(views, 2.5).consistent


def test_timetable_pushes_start():
    # task 0 fixed on [0,3) at height 2; task 1 (height 1, dur 2) must move past it
    lo = array("q", [0, 3, 3, 6, 2, 0, 2, 2, 2, 1])
    hi = array("q", [0, 3, 3, 6, 2, 6, 2, 8, 2, 1])
    st_ = State(lo, hi, [None, None])
    views = [edge_view(st_, i, "s", {"s": 0}) for i in range(2)]
    res = timetable_consistent(views, 2.0)
    assert res.consistent and res.changed
    assert st_.domain(1, S)[0] == 3


def test_timetable_rate_cap():
    # residual capacity 1 over task 1's compulsory part caps its rate at 1
    lo = array("q", [0, 4, 4, 4, 1, 1, 2, 3, 0, 1])
    hi = array("q", [0, 4, 4, 4, 1, 1, 2, 3, 6, 3])
    st_ = State(lo, hi, [None, None])
    views = [edge_view(st_, i, "s", {"s": 0}) for i in range(2)]
    assert timetable_consistent(views, 2.0).consistent
    assert st_.domain(1, R) == (1, 1)


def test_kernel_implementation_reported():
    assert IMPLEMENTATION in ("cython", "python")


@st.composite
def kernel_case(draw):
    n = draw(st.integers(1, 6))
    lo, hi = array("q"), array("q")
    for _ in range(n):
        s0 = draw(st.integers(0, 8))
        s1 = s0 + draw(st.integers(0, 4))
        d0 = draw(st.integers(0, 4))
        d1 = d0 + draw(st.integers(0, 3))
        e0 = s0 + d0 + draw(st.integers(0, 2))
        e1 = max(e0, s1 + d1 - draw(st.integers(0, 2)))
        r0 = draw(st.integers(1, 3))
        r1 = r0 + draw(st.integers(0, 2))
        f1 = draw(st.integers(0, 12))
        lo.extend([s0, d0, e0, 0, r0])
        hi.extend([s1, d1, e1, f1, r1])
    tasks = array("q", range(n))
    offs = array("q", [draw(st.integers(0, 4)) for _ in range(n)])
    cap = draw(st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.5]))
    disj = draw(st.booleans())
    return lo, hi, tasks, offs, cap, disj


@pytest.mark.skipif(_kernel_c is None, reason="compiled kernel not built")
@settings(max_examples=400, deadline=None)
@given(kernel_case())
def test_compiled_kernel_matches_python(case):
    lo, hi, tasks, offs, cap, disj = case
    lo1, hi1, lo2, hi2 = array("q", lo), array("q", hi), array("q", lo), array("q", hi)
    r1 = _kernel_py.timetable(lo1, hi1, tasks, offs, cap, disj)
    r2 = _kernel_c.timetable(lo2, hi2, tasks, offs, cap, disj)
    assert r1 == r2
    if r1 != _kernel_py.FAIL:
        assert lo1 == lo2 and hi1 == hi2


def test_profile_matches_simulator_occupancy(f2):
    # fully assigned state: profile on s equals the simulator's usage
    sched = {"a": (0, 2, 2, 2, 4), "b": (1, 2, 3, 2, 4)}
    st_ = fixed_state([(0, 2, 2), (1, 2, 2)])
    views = [edge_view(st_, i, "s", f2.metrics(k).offsets) for i, k in enumerate("ab")]
    usage = {}
    level = 0
    events = timetable_profile(views)
    for (m, dlt), nxt in zip(events, events[1:] + [(None, 0)]):
        level += dlt
        if nxt[0] is not None:
            for t in range(m, nxt[0]):
                usage[t] = level
    rep = simulate(sched, f2, "simultaneous", 8)
    occ = {t: u for (e, t), u in rep.occupancy.items() if e == "s" and u}
    assert {t: u for t, u in usage.items() if u} == occ


# ---------------------------------------------------------------- strategies


def test_1b_tie_breaks_on_area_id(f2):
    prob = build_problem(f2, ["a", "b"], "maxflow", 8)
    dec = make_strategy("1B2A").decide(prob, prob.root(), None)
    assert prob.areas[dec.task] == "a"


def test_2b_labels_rate_max_first(f2):
    prob = build_problem(f2, ["a", "b"], "maxflow", 8)
    dec = make_strategy("1B2B").decide(prob, prob.root(), None)
    assert dec.var == R
    assert dec.left == ("eq", 2) and dec.right == ("le", 1)


def test_2a_labels_rate_min_first(f2):
    prob = build_problem(f2, ["a", "b"], "maxflow", 8)
    dec = make_strategy("1B2A").decide(prob, prob.root(), None)
    assert dec.var == R and dec.left == ("eq", 1)


def test_phased_split_top_two_durations():
    inst = load(F1_DOC)
    prob = build_problem(inst, ["a"], "maxflow", 10, mode="phased")
    st_ = prob.root()
    st_.hi[D] = 6
    dec = make_strategy("phasedMF").decide(prob, st_, None)
    assert dec.var == D
    assert dec.left == ("ge", 5) and dec.right == ("le", 4)


def test_apply_rate_set_refutation():
    st_ = open_state(1, rate=(2, 6))
    st_.rsets[0] = (2, 6)
    apply(st_, R, "ne", 6)
    assert st_.domain(0, R) == (2, 2)


# ---------------------------------------------------------------- search


@pytest.mark.parametrize("strategy", COMBINED)
def test_f1_any_strategy(f1, strategy):
    prob = build_problem(f1, ["a"], "maxflow", 10)
    res = branch_and_bound(prob, strategy)
    assert res.objective == 6 and res.status == OPTIMAL


@pytest.mark.parametrize("strategy", COMBINED)
def test_f2_maxflow_h6(f2, strategy):
    prob = build_problem(f2, ["a", "b"], "maxflow", 6)
    res = branch_and_bound(prob, strategy, seed=3)
    assert res.objective == 6 and res.status == OPTIMAL


def test_f2_sat_infeasible(f2):
    prob = build_problem(f2, ["a", "b"], "sat", 6)
    res = branch_and_bound(prob, "1B2B")
    assert res.status == INFEASIBLE and res.best is None


def test_incumbents_strictly_improve(f2):
    prob = build_problem(f2, ["a", "b"], "maxflow", 8)
    res = branch_and_bound(prob, "1B2A")
    assert all(a < b for a, b in zip(res.incumbents, res.incumbents[1:]))
    prob = build_problem(f2, ["a", "b"], "clearance", None)
    res = branch_and_bound(prob, "CT")
    assert all(a > b for a, b in zip(res.incumbents, res.incumbents[1:]))
    assert res.objective == 7


def test_deterministic_per_seed():
    inst = generate_instance(GeneratorParams(areas=3, max_demand=6), 11)
    prob = build_problem(inst, inst.area_ids, "maxflow", 10)
    a = branch_and_bound(prob, "1A2B", seed=5)
    b = branch_and_bound(prob, "1A2B", seed=5)
    assert a.best == b.best and a.stats.nodes == b.stats.nodes


def test_node_limit_reports_timeout():
    inst = generate_instance(GeneratorParams(areas=3, max_demand=6), 2)
    prob = build_problem(inst, inst.area_ids, "maxflow", 12)
    res = branch_and_bound(prob, "1B2A", Budget(node_limit=2))
    assert res.status in ("feasibleTimeout", "unknownTimeout", OPTIMAL)
    assert res.stats.nodes <= 2


def _engine_tuple(plan_entry):
    s, d, e, r, f = plan_entry
    return s, d, e, f, r


@pytest.mark.parametrize("seed", range(25))
def test_optimal_assignment_survives_propagation(seed):
    inst = generate_instance(GeneratorParams(areas=3, max_demand=5), 500 + seed)
    horizon = 9
    value, plan = brute_force_optimum(inst, "simultaneous", "maxflow", horizon, return_schedule=True)
    prob = build_problem(inst, inst.area_ids, "maxflow", horizon)
    root = prob.root()
    assert propagate(prob, root, value)
    st_ = prob.root()
    for i, k in enumerate(prob.areas):
        vals = _engine_tuple(plan[k])
        if vals[3] == 0:
            continue
        for v, x in zip((S, D, E, F, R), vals):
            apply(st_, 5 * i + v, "eq", x)
    assert propagate(prob, st_, value)
