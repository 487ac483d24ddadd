"""Pure-Python timetable kernel (reference implementation and fallback).

Domains of task ``i`` live in the flat bound arrays ``lo``/``hi`` at
``5*i + {0: start, 1: dur, 2: end, 3: flow, 4: rate}``.
"""

import math

FAIL = -1
UNCHANGED = 0
CHANGED = 1


def timetable(lo, hi, tasks, offs, cap, disjunctive):
    """Timetable check and filtering for the tasks sharing one arc.

    Builds the mandatory usage profile from compulsory parts, fails when it
    exceeds ``cap``, then pushes start lower bounds / end upper bounds of
    running tasks away from minutes they cannot share, and caps rates by the
    residual capacity over each task's compulsory part. ``lo`` and ``hi`` are
    updated in place. Returns ``FAIL``, ``UNCHANGED`` or ``CHANGED``.
    """
    n = len(tasks)
    if disjunctive:
        cap = 1.0
    cs = [0] * n
    ce = [0] * n
    hs = [0] * n
    tmin = None
    tmax = None
    for j in range(n):
        b = 5 * tasks[j]
        o = offs[j]
        a = hi[b] + o
        z = lo[b + 2] + o
        cs[j] = a
        ce[j] = z
        hs[j] = 1 if disjunctive else lo[b + 4]
        if a < z:
            if tmin is None or a < tmin:
                tmin = a
            if tmax is None or z > tmax:
                tmax = z
    if tmin is None:
        return UNCHANGED
    prof = [0] * (tmax - tmin)
    for j in range(n):
        if cs[j] < ce[j]:
            h = hs[j]
            for m in range(cs[j] - tmin, ce[j] - tmin):
                prof[m] += h
    for u in prof:
        if u > cap:
            return FAIL

    changed = UNCHANGED
    for j in range(n):
        b = 5 * tasks[j]
        length = lo[b + 1]
        if length < 1:
            continue
        o = offs[j]
        h = hs[j]
        own_a = cs[j]
        own_z = ce[j]

        def conflict(m):
            u = prof[m - tmin]
            if own_a <= m < own_z:
                u -= h
            return u + h > cap

        # earliest feasible start
        s = lo[b]
        while True:
            a = max(s + o, tmin)
            z = min(s + o + length, tmax)
            m = z - 1
            while m >= a and not conflict(m):
                m -= 1
            if m < a:
                break
            s = m - o + 1
            if s > hi[b]:
                return FAIL
        if s > lo[b]:
            lo[b] = s
            changed = CHANGED

        # latest feasible end
        e = hi[b + 2]
        while True:
            a = max(e - length + o, tmin)
            z = min(e + o, tmax)
            m = a
            while m < z and not conflict(m):
                m += 1
            if m >= z:
                break
            e = m - o
            if e < lo[b + 2]:
                return FAIL
        if e < hi[b + 2]:
            hi[b + 2] = e
            changed = CHANGED

        if not disjunctive and own_a < own_z:
            peak = 0
            for m in range(own_a, own_z):
                u = prof[m - tmin] - h
                if u > peak:
                    peak = u
            rmax = math.floor(cap - peak)
            if rmax < hi[b + 4]:
                if rmax < lo[b + 4]:
                    return FAIL
                hi[b + 4] = rmax
                changed = CHANGED
    return changed


def usage_profile(lo, hi, tasks, offs, disjunctive):
    """Mandatory usage per minute as a ``{minute: usage}`` dict (diagnostics/tests)."""
    out = {}
    for j in range(len(tasks)):
        b = 5 * tasks[j]
        h = 1 if disjunctive else lo[b + 4]
        for m in range(hi[b] + offs[j], lo[b + 2] + offs[j]):
            out[m] = out.get(m, 0) + h
    return out
