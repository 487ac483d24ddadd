import pytest
from conftest import CHAIN_DOC, F1_DOC, f2_doc, load

from evacsched.engine import Budget
from evacsched.solvers import (
    PreconditionError,
    build_problem,
    convergent_paths,
    phased_greedy_applicable,
    phased_greedy_convergent,
    solve,
    solve_nepp,
    solve_npepp,
)
from evacsched.validate import GeneratorParams, generate_instance, simulate


def check(sol, inst, horizon=None):
    rep = simulate(sol, inst, sol.mode, horizon if horizon is not None else sol.horizon)
    assert rep.ok, rep.violations
    return rep


def test_f1_clearance(f1):
    sol = solve_nepp(f1, "clearance")
    assert sol.objective_value == 5
    a = sol.per_area["a"]
    assert (a.start, a.dur, a.rate) == (0, 3, 2)
    check(sol, f1)


@pytest.mark.parametrize("horizon,expected", [(6, 6), (7, 8), (8, 8)])
def test_f2_maxflow_both_modes(f2, horizon, expected):
    for fn in (solve_nepp, solve_npepp):
        sol = fn(f2, "maxflow", horizon)
        assert sol.objective_value == expected
        assert sol.status == "optimal"
        check(sol, f2)


def test_f2_bound_attached(f2):
    sol = solve_nepp(f2, "maxflow", 6)
    assert sol.bound == 6


def test_f3_sum_of_parts(f3):
    whole = solve_nepp(f3, "maxflow", 6).objective_value
    parts = sum(solve_nepp(f3.subinstance([k]), "maxflow", 6).objective_value for k in f3.area_ids)
    assert whole == parts


def test_f1_phased_equals_simultaneous(f1):
    for obj, h in (("maxflow", 4), ("clearance", None)):
        assert solve_npepp(f1, obj, h).objective_value == solve_nepp(f1, obj, h).objective_value


def test_sat(f2):
    assert solve_nepp(f2, "sat", 6).status == "infeasible"
    sol = solve_nepp(f2, "sat", 8)
    assert sol.status == "optimal"
    assert all(a.flow == f2.area(k).demand for k, a in sol.per_area.items())
    check(sol, f2)


def test_clearance_infeasible_when_cut():
    inst = load(f2_doc(cutoff_s=2.0))
    sol = solve_nepp(inst, "clearance")
    assert sol.status == "infeasible" and sol.objective_value is None


def test_clearance_f2_matches_sat_threshold(f2):
    ct = solve_nepp(f2, "clearance").objective_value
    assert ct == 7
    assert solve_nepp(f2, "sat", ct).status == "optimal"
    assert solve_nepp(f2, "sat", ct - 1).status == "infeasible"


def test_horizon_required(f1):
    with pytest.raises(ValueError):
        solve_nepp(f1, "maxflow", None)
    with pytest.raises(ValueError):
        solve(f1, "sideways", "maxflow", 5)


def test_flow_zero_canonical():
    sol = solve_nepp(load(F1_DOC), "maxflow", 2)
    a = sol.per_area["a"]
    assert (a.start, a.dur, a.end, a.flow) == (0, 0, 0, 0)


def test_rate_set_restricts(f1):
    sol = solve_nepp(f1, "maxflow", 10, rate_set={2, 6, 10, 15, 20})
    assert sol.per_area["a"].rate == 2
    sol = solve_nepp(f1, "maxflow", 10, rate_set={6, 10})
    assert sol.objective_value == 0


def test_workers_deterministic():
    inst = generate_instance(GeneratorParams(areas=6, tree_shape="randomPaths", safe_nodes=3), 4)
    a = solve_nepp(inst, "maxflow", 10, workers=1)
    b = solve_nepp(inst, "maxflow", 10, workers=2)
    assert a.objective_value == b.objective_value
    assert list(a.per_area) == list(b.per_area)


def test_statuses_weakest_wins():
    inst = generate_instance(GeneratorParams(areas=3, max_demand=6), 3)
    sol = solve_nepp(inst, "maxflow", 12, budget=Budget(node_limit=1), use_bound=False, sat_first=False)
    assert sol.status in ("feasibleTimeout", "optimal")


def test_build_problem_edge_sets(f2):
    dom = build_problem(f2, ["a", "b"], "maxflow", 8)
    full = build_problem(f2, ["a", "b"], "maxflow", 8, edges="all")
    assert [c.edge for c in dom.edges] == ["s"]
    assert sorted(c.edge for c in full.edges) == ["ea", "eb", "s"]


@pytest.mark.parametrize("horizon,expected", [(6, 6), (8, 8)])
def test_phased_greedy_f2(f2, horizon, expected):
    assert phased_greedy_applicable(f2, ["a", "b"], horizon)
    out = phased_greedy_convergent(f2, ["a", "b"], horizon)
    assert sum(a.flow for a in out.values()) == expected
    assert simulate(out, f2, "phased", horizon).ok


def test_phased_greedy_single_area(f1):
    out = phased_greedy_convergent(f1, ["a"], 10)
    a = out["a"]
    assert (a.start, a.rate, a.flow) == (0, 2, 6)


def test_phased_greedy_precondition():
    inst = load(CHAIN_DOC)
    assert not convergent_paths(inst, inst.area_ids)
    with pytest.raises(PreconditionError):
        phased_greedy_convergent(inst, inst.area_ids, 10)


def test_phased_fast_path_used(f2):
    sol = solve_npepp(f2, "maxflow", 8)
    assert [c.strategy for c in sol.components] == ["phasedGreedy"]
    slow = solve_npepp(f2, "maxflow", 8, fast_path=False)
    assert slow.components[0].strategy != "phasedGreedy"
    assert slow.objective_value == sol.objective_value


@pytest.mark.parametrize("seed", range(20))
def test_auto_at_least_each_strategy(seed):
    inst = generate_instance(GeneratorParams(areas=3, tree_shape="randomPaths", max_demand=5), 900 + seed)
    auto = solve_nepp(inst, "maxflow", 9).objective_value
    for s in ("1A2A", "1A2B", "1B2A", "1B2B"):
        assert auto >= solve_nepp(inst, "maxflow", 9, strategy=s).objective_value


@pytest.mark.parametrize("seed", range(20))
def test_sat_iff_full_maxflow(seed):
    inst = generate_instance(GeneratorParams(areas=3, tree_shape="randomPaths", max_demand=4), 300 + seed)
    for h in (5, 8):
        mf = solve_nepp(inst, "maxflow", h)
        sat = solve_nepp(inst, "sat", h)
        check(mf, inst)
        assert (sat.status == "optimal") == (mf.objective_value == inst.total_demand)


def test_phased_greedy_needs_common_arc(f3):
    # two disjoint trees are convergent but have no arc to sweep over
    assert not phased_greedy_applicable(f3, f3.area_ids, 10)
    sol = solve_npepp(f3, "maxflow", 10, decompose=False)
    assert sol.objective_value == solve_npepp(f3, "maxflow", 10).objective_value
