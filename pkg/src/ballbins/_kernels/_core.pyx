# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Semantics match ballbins._kernels.py bit for bit: two uniforms per ball,
u[2b] picks the alias slot and u[2b+1] picks slot vs alias.
"""

import numpy as np

cimport numpy as cnp

BACKEND = "cython"


def max_loads(const double[:, ::1] u, const double[::1] prob, const long long[::1] alias,
              long long[::1] out):
    """Per-trial maximum load; u has shape (trials, 2 * balls)."""
    cdef Py_ssize_t trials = u.shape[0]
    cdef Py_ssize_t balls = u.shape[1] // 2
    cdef Py_ssize_t n = prob.shape[0]
    cdef Py_ssize_t t, b, i
    cdef long long best, cnt, bin_
    if balls == 0:
        for t in range(trials):
            out[t] = 0
        return
    loads_arr = np.zeros(n, dtype=np.int64)
    touched_arr = np.empty(balls, dtype=np.int64)
    cdef long long[::1] loads = loads_arr
    cdef long long[::1] touched = touched_arr
    with nogil:
        for t in range(trials):
            best = 0
            for b in range(balls):
                i = <Py_ssize_t>(u[t, 2 * b] * n)
                if i > n - 1:
                    i = n - 1
                if u[t, 2 * b + 1] < prob[i]:
                    bin_ = i
                else:
                    bin_ = alias[i]
                touched[b] = bin_
                cnt = loads[bin_] + 1
                loads[bin_] = cnt
                if cnt > best:
                    best = cnt
            out[t] = best
            for b in range(balls):
                loads[touched[b]] = 0


def waiting_scan(const double[::1] u, const double[::1] prob, const long long[::1] alias,
                 long long[::1] loads, long long k, long long start_index):
    """Scan one block of a waiting-time trial; see the python backend."""
    cdef Py_ssize_t B = u.shape[0] // 2
    cdef Py_ssize_t n = prob.shape[0]
    cdef Py_ssize_t b, i
    cdef long long bin_
    cdef long long hit = -1
    with nogil:
        for b in range(B):
            i = <Py_ssize_t>(u[2 * b] * n)
            if i > n - 1:
                i = n - 1
            if u[2 * b + 1] < prob[i]:
                bin_ = i
            else:
                bin_ = alias[i]
            loads[bin_] += 1
            if loads[bin_] >= k:
                hit = start_index + b + 1
                break
    return hit
