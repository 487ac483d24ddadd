"""Command-line interface: solve, validate, bound, gen and report."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional

from .bounds import bound_report
from .engine import Budget
from .model import PHASED, SIMULTANEOUS, Instance, InstanceError, parse_instance, serialize_instance
from .solvers import CLEARANCE_OBJ, MAXFLOW, SAT, Solution, solve
from .validate import GeneratorParams, generate_instance, schedule_of, simulate

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

MODES = {"sim": SIMULTANEOUS, "phased": PHASED, SIMULTANEOUS: SIMULTANEOUS}
STRATEGIES = ("1A2A", "1A2B", "1B2A", "1B2B", "auto")
PROFILE_HEADER = ("areaId", "minute", "vehiclesDeparting")


class UsageError(Exception):
    pass


def _rates(text: str) -> list:
    try:
        vals = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid rate list {text!r}")
    if not vals or vals[0] < 1:
        raise argparse.ArgumentTypeError("rates must be positive integers")
    return vals


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def load_instance(path: str) -> Instance:
    try:
        return parse_instance(_read_text(path))
    except InstanceError as exc:
        raise UsageError(f"{path}: {exc}")


def load_solution(path: str) -> dict:
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc.msg})")
    if not isinstance(doc, dict) or not isinstance(doc.get("perArea"), dict):
        raise UsageError(f"{path}: solution document needs a perArea object")
    return doc


def gap_percent(kind: str, objective: Optional[int], bound: Optional[int]) -> Optional[float]:
    """Relative distance to the preemptive bound, in percent."""
    if objective is None or bound is None:
        return None
    if bound == 0:
        return 0.0
    if kind == CLEARANCE_OBJ:
        return round(100.0 * (objective - bound) / bound, 3)
    return round(100.0 * (bound - objective) / bound, 3)


def solution_document(sol: Solution, instance: Instance, strategy: str, time_limit: Optional[float]) -> dict:
    demand = instance.total_demand
    evacuated = sol.evacuated
    return {
        "mode": sol.mode,
        "objectiveKind": sol.objective_kind,
        "horizon": sol.horizon,
        "perArea": {k: v.to_dict() for k, v in sol.per_area.items()},
        "objective": sol.objective_value,
        "bound": sol.bound,
        "gapPercent": gap_percent(sol.objective_kind, sol.objective_value, sol.bound),
        "percentEvacuated": round(100.0 * evacuated / demand, 3) if demand else 100.0,
        "status": sol.status,
        "stats": sol.stats_dict(),
        "search": {
            "strategy": strategy,
            "timeLimitPerComponent": time_limit,
            "components": [
                {"areas": list(c.areas), "strategy": c.strategy, "status": c.status, "objective": c.objective}
                for c in sol.components
            ],
        },
    }


def departure_profile(schedule: dict) -> list:
    """Rows ``(area, minute, vehicles)`` for every minute an area releases vehicles."""
    rows = []
    for area in sorted(schedule):
        start, dur, _end, rate, flow = schedule[area]
        left = flow
        t = start
        while left > 0 and t < start + dur:
            n = min(rate, left)
            rows.append((area, t, n))
            left -= n
            t += 1
    return rows


def report_departure_profile(solution, instance: Instance) -> str:
    """CSV text of the departure profile; ``solution`` must validate."""
    schedule = schedule_of(solution)
    unknown = sorted(set(schedule) - set(instance.area_ids))
    if unknown:
        raise UsageError(f"solution references unknown areas: {', '.join(unknown)}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_HEADER)
    w.writerows(departure_profile(schedule))
    return buf.getvalue()


# ----------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    inst = load_instance(args.input)
    mode = MODES[args.mode]
    if args.objective != CLEARANCE_OBJ and args.horizon is None:
        raise UsageError("--horizon is required for maxflow and sat")
    if args.objective == CLEARANCE_OBJ and args.horizon is not None:
        print("note: --horizon is ignored for clearance", file=sys.stderr)
    budget = Budget(time_limit=args.time_limit)
    horizon = None if args.objective == CLEARANCE_OBJ else args.horizon
    sol = solve(
        inst,
        mode,
        args.objective,
        horizon,
        strategy=args.strategy,
        budget=budget,
        rate_set=args.rates,
        seed=args.seed,
        workers=args.workers,
    )
    doc = solution_document(sol, inst, args.strategy, args.time_limit)
    _write_text(args.output, _dump(doc))
    if args.output not in (None, "-"):
        print(
            f"{sol.status}: objective {sol.objective_value} bound {sol.bound} "
            f"evacuated {doc['percentEvacuated']}%",
            file=sys.stderr,
        )
    return EXIT_FAILED if sol.objective_value is None else EXIT_OK


def cmd_validate(args) -> int:
    inst = load_instance(args.input)
    doc = load_solution(args.solution)
    mode = MODES[args.mode] if args.mode else MODES.get(doc.get("mode", SIMULTANEOUS), SIMULTANEOUS)
    horizon = args.horizon if args.horizon is not None else doc.get("horizon")
    unknown = sorted(set(doc["perArea"]) - set(inst.area_ids))
    if unknown:
        raise UsageError(f"solution references unknown areas: {', '.join(unknown)}")
    try:
        report = simulate(doc, inst, mode, horizon)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.solution}: malformed perArea entry ({exc})")
    out = report.to_dict()
    if args.occupancy:
        out["occupancy"] = [[e, t, u] for (e, t), u in sorted(report.occupancy.items())]
    _write_text(args.output, _dump(out))
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_bound(args) -> int:
    inst = load_instance(args.input)
    if args.horizon < 1:
        raise UsageError("--horizon must be at least 1")
    _write_text(args.output, _dump(bound_report(inst, args.horizon)))
    return EXIT_OK


def cmd_gen(args) -> int:
    params = GeneratorParams(
        areas=args.areas,
        max_demand=args.max_demand,
        max_capacity=args.max_capacity,
        max_travel=args.max_travel,
        tree_shape=args.tree_shape,
        cutoff_probability=args.cutoff_probability,
        safe_nodes=args.safe_nodes,
        transit_nodes=args.transit_nodes,
        arcs=args.arcs,
        min_demand=args.min_demand,
        min_capacity=args.min_capacity,
    )
    try:
        inst = generate_instance(params, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    _write_text(args.output, serialize_instance(inst) + "\n")
    return EXIT_OK


def cmd_report(args) -> int:
    if not args.profile and not args.partition:
        raise UsageError("report needs --profile or --partition")
    inst = load_instance(args.input)
    if args.partition:
        from .decompose import partition_components

        mode = MODES[args.mode or "sim"]
        _write_text(args.output, _dump(partition_components(inst, mode).to_dict()))
        return EXIT_OK
    if args.solution is None:
        raise UsageError("--profile needs -s SOLUTION")
    doc = load_solution(args.solution)
    mode = MODES[args.mode] if args.mode else MODES.get(doc.get("mode", SIMULTANEOUS), SIMULTANEOUS)
    report = simulate(doc, inst, mode, doc.get("horizon"))
    if not report.ok:
        for v in report.violations:
            print(f"violation: {v.kind} {v.where} {v.minute} {v.detail}", file=sys.stderr)
        return EXIT_FAILED
    _write_text(args.output, report_departure_profile(doc, inst))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evacsched", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="schedule evacuation departures")
    s.add_argument("-i", "--input", required=True, help="instance JSON ('-' for stdin)")
    s.add_argument("-o", "--output", help="solution JSON (default stdout)")
    s.add_argument("--mode", choices=("sim", "phased"), default="sim")
    s.add_argument("--objective", choices=(MAXFLOW, SAT, CLEARANCE_OBJ), default=MAXFLOW)
    s.add_argument("--horizon", type=int, help="minutes (required for maxflow and sat)")
    s.add_argument("--time-limit", type=float, default=None, help="seconds per component")
    s.add_argument("--strategy", choices=STRATEGIES, default="auto")
    s.add_argument("--rates", type=_rates, default=None, help="allowed rates, e.g. 2,6,10")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1, help="processes for independent components")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="replay a solution minute by minute")
    v.add_argument("-i", "--input", required=True)
    v.add_argument("-s", "--solution", required=True)
    v.add_argument("-o", "--output")
    v.add_argument("--mode", choices=("sim", "phased"), default=None, help="default: the solution's mode")
    v.add_argument("--horizon", type=int, default=None, help="default: the solution's horizon")
    v.add_argument("--occupancy", action="store_true", help="include per-minute arc usage")
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("bound", help="preemptive max-flow bound")
    b.add_argument("-i", "--input", required=True)
    b.add_argument("-o", "--output")
    b.add_argument("--horizon", type=int, required=True)
    b.set_defaults(func=cmd_bound)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("-o", "--output")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--areas", type=int, default=3)
    g.add_argument("--max-demand", type=int, default=6)
    g.add_argument("--min-demand", type=int, default=1)
    g.add_argument("--max-capacity", type=float, default=3)
    g.add_argument("--min-capacity", type=float, default=1)
    g.add_argument("--max-travel", type=float, default=3.0)
    g.add_argument("--tree-shape", choices=("convergentForest", "randomPaths"), default="convergentForest")
    g.add_argument("--cutoff-probability", type=float, default=0.0)
    g.add_argument("--safe-nodes", type=int, default=1)
    g.add_argument("--transit-nodes", type=int, default=None)
    g.add_argument("--arcs", type=int, default=None, help="pad the network to this many arcs")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("report", help="departure profile or component partition")
    r.add_argument("-i", "--input", required=True)
    r.add_argument("-s", "--solution")
    r.add_argument("-o", "--output")
    r.add_argument("--mode", choices=("sim", "phased"), default=None)
    grp = r.add_mutually_exclusive_group()
    grp.add_argument("--profile", action="store_true", help="CSV of vehicles departing per minute")
    grp.add_argument("--partition", action="store_true", help="independent components as JSON")
    r.set_defaults(func=cmd_report)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
