"""Compare the compiled timetable kernel with the pure-Python fallback.

Run from the repository root after ``pip install -e .``::

    python3 benchmarks/bench_kernel.py --tasks 40 --repeat 200

Two measurements: the kernel alone on random task domains, and a full
branch-and-bound solve where the kernel is swapped in place.
"""

import argparse
import random
import time
from array import array

from evacsched.engine import Budget, _kernel_py
from evacsched.engine import kernel as kernel_mod
from evacsched.solvers import solve_nepp
from evacsched.validate import GeneratorParams, generate_instance

try:
    from evacsched.engine import _kernel as _kernel_c
except ImportError:
    _kernel_c = None


def random_domains(rng, n, horizon):
    lo, hi = array("q"), array("q")
    for _ in range(n):
        s = rng.randint(0, horizon // 2)
        d = rng.randint(1, horizon // 4 + 1)
        r = rng.randint(1, 4)
        slack = rng.randint(0, horizon // 4)
        lo.extend([s, d, s + d, 0, r])
        hi.extend([s + slack, d + slack, s + d + 2 * slack, 100, r + rng.randint(0, 2)])
    tasks = array("q", range(n))
    offs = array("q", [rng.randint(0, 5) for _ in range(n)])
    return lo, hi, tasks, offs


def bench_kernel(impl, cases, repeat):
    t0 = time.perf_counter()
    for _ in range(repeat):
        for lo, hi, tasks, offs, cap in cases:
            impl.timetable(array("q", lo), array("q", hi), tasks, offs, cap, False)
    return time.perf_counter() - t0


def bench_solve(impl, instances, horizon):
    saved = kernel_mod.timetable
    kernel_mod.timetable = impl.timetable
    try:
        t0 = time.perf_counter()
        values = [solve_nepp(inst, "maxflow", horizon, budget=Budget(node_limit=20000),
                             strategy="1B2B", compute_bound=False).objective_value
                  for inst in instances]
        return time.perf_counter() - t0, values
    finally:
        kernel_mod.timetable = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tasks", type=int, default=40)
    ap.add_argument("--cases", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=100)
    ap.add_argument("--horizon", type=int, default=120)
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _kernel_c is None:
        print("compiled kernel not built; only the Python kernel is available")
        return
    rng = random.Random(args.seed)
    cases = []
    for _ in range(args.cases):
        lo, hi, tasks, offs = random_domains(rng, args.tasks, args.horizon)
        cases.append((lo, hi, tasks, offs, float(rng.randint(2, 8))))

    print(f"selected kernel: {kernel_mod.IMPLEMENTATION}")
    tp = bench_kernel(_kernel_py, cases, args.repeat)
    tc = bench_kernel(_kernel_c, cases, args.repeat)
    calls = args.cases * args.repeat
    print(f"kernel only  ({calls} calls, {args.tasks} tasks): "
          f"python {tp:.3f}s  cython {tc:.3f}s  speedup {tp / tc:.1f}x")

    params = GeneratorParams(areas=8, max_demand=40, min_demand=10, max_capacity=6, max_travel=4)
    instances = [generate_instance(params, args.seed + i) for i in range(args.instances)]
    sp, vp = bench_solve(_kernel_py, instances, 40)
    sc, vc = bench_solve(_kernel_c, instances, 40)
    assert vp == vc, "kernels disagree"
    print(f"solve        ({args.instances} instances, 8 areas): "
          f"python {sp:.3f}s  cython {sc:.3f}s  speedup {sp / sc:.1f}x")


if __name__ == "__main__":
    main()
