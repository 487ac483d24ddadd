# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled timetable kernel; same contract as ``_kernel_py``."""

from libc.math cimport floor
from libc.stdlib cimport malloc, free

cdef enum:
    FAIL = -1
    UNCHANGED = 0
    CHANGED = 1


cdef inline bint _conflict(long long *prof, long long m, long long tmin,
                           long long own_a, long long own_z, long long h,
                           double cap) nogil:
    cdef long long u = prof[m - tmin]
    if own_a <= m < own_z:
        u -= h
    return u + h > cap


def timetable(long long[::1] lo, long long[::1] hi, long long[::1] tasks,
              long long[::1] offs, double cap, bint disjunctive):
    cdef Py_ssize_t n = tasks.shape[0]
    cdef Py_ssize_t j
    cdef long long b, o, a, z, m, s, e, h, length, own_a, own_z, peak, u, rmax
    cdef long long tmin = 0, tmax = 0
    cdef bint any_part = False
    cdef int changed = UNCHANGED
    if n == 0:
        return UNCHANGED
    if disjunctive:
        cap = 1.0
    cdef long long *cs = <long long *> malloc(n * sizeof(long long))
    cdef long long *ce = <long long *> malloc(n * sizeof(long long))
    cdef long long *hs = <long long *> malloc(n * sizeof(long long))
    cdef long long *prof = NULL
    if cs == NULL or ce == NULL or hs == NULL:
        free(cs); free(ce); free(hs)
        raise MemoryError()
    try:
        for j in range(n):
            b = 5 * tasks[j]
            o = offs[j]
            a = hi[b] + o
            z = lo[b + 2] + o
            cs[j] = a
            ce[j] = z
            hs[j] = 1 if disjunctive else lo[b + 4]
            if a < z:
                if not any_part or a < tmin:
                    tmin = a
                if not any_part or z > tmax:
                    tmax = z
                any_part = True
        if not any_part:
            return UNCHANGED
        prof = <long long *> malloc((tmax - tmin) * sizeof(long long))
        if prof == NULL:
            raise MemoryError()
        for m in range(tmax - tmin):
            prof[m] = 0
        for j in range(n):
            if cs[j] < ce[j]:
                h = hs[j]
                for m in range(cs[j] - tmin, ce[j] - tmin):
                    prof[m] += h
        for m in range(tmax - tmin):
            if prof[m] > cap:
                return FAIL

        for j in range(n):
            b = 5 * tasks[j]
            length = lo[b + 1]
            if length < 1:
                continue
            o = offs[j]
            h = hs[j]
            own_a = cs[j]
            own_z = ce[j]

            s = lo[b]
            while True:
                a = s + o if s + o > tmin else tmin
                z = s + o + length if s + o + length < tmax else tmax
                m = z - 1
                while m >= a and not _conflict(prof, m, tmin, own_a, own_z, h, cap):
                    m -= 1
                if m < a:
                    break
                s = m - o + 1
                if s > hi[b]:
                    return FAIL
            if s > lo[b]:
                lo[b] = s
                changed = CHANGED

            e = hi[b + 2]
            while True:
                a = e - length + o if e - length + o > tmin else tmin
                z = e + o if e + o < tmax else tmax
                m = a
                while m < z and not _conflict(prof, m, tmin, own_a, own_z, h, cap):
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
                rmax = <long long> floor(cap - peak)
                if rmax < hi[b + 4]:
                    if rmax < lo[b + 4]:
                        return FAIL
                    hi[b + 4] = rmax
                    changed = CHANGED
        return changed
    finally:
        free(cs)
        free(ce)
        free(hs)
        if prof != NULL:
            free(prof)
