# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Must stay behaviourally identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY
from libc.stdlib cimport free, malloc

cnp.import_array()


def edit_ops(ref, hyp):
    """(substitutions, deletions, insertions) along one minimal alignment.

    Accepts any integer sequences; the DP table is a flat int32 buffer.
    """
    cdef Py_ssize_t n = len(ref), m = len(hyp)
    cdef Py_ssize_t i, j, w = m + 1
    cdef long long *a = <long long *> malloc((n + m + 1) * sizeof(long long))
    cdef int *dp = <int *> malloc((n + 1) * (m + 1) * sizeof(int))
    cdef long long *b
    cdef int best, c
    cdef long long sub = 0, dele = 0, ins = 0
    if a == NULL or dp == NULL:
        free(a)
        free(dp)
        raise MemoryError()
    b = a + n
    try:
        for i in range(n):
            a[i] = ref[i]
        for j in range(m):
            b[j] = hyp[j]
        for i in range(n + 1):
            dp[i * w] = <int> i
        for j in range(m + 1):
            dp[j] = <int> j
        for i in range(1, n + 1):
            for j in range(1, m + 1):
                best = dp[(i - 1) * w + j - 1] + (0 if a[i - 1] == b[j - 1] else 1)
                c = dp[(i - 1) * w + j] + 1
                if c < best:
                    best = c
                c = dp[i * w + j - 1] + 1
                if c < best:
                    best = c
                dp[i * w + j] = best

        i = n
        j = m
        while i > 0 or j > 0:
            if i > 0 and j > 0 and dp[i * w + j] == dp[(i - 1) * w + j - 1] + (0 if a[i - 1] == b[j - 1] else 1):
                if a[i - 1] != b[j - 1]:
                    sub += 1
                i -= 1
                j -= 1
            elif i > 0 and dp[i * w + j] == dp[(i - 1) * w + j] + 1:
                dele += 1
                i -= 1
            else:
                ins += 1
                j -= 1
    finally:
        free(a)
        free(dp)
    return int(sub), int(dele), int(ins)


cdef long long _merge_count(long long[::1] a, long long[::1] tmp, Py_ssize_t lo, Py_ssize_t hi):
    if hi - lo < 2:
        return 0
    cdef Py_ssize_t mid = (lo + hi) // 2
    cdef long long inv = _merge_count(a, tmp, lo, mid) + _merge_count(a, tmp, mid, hi)
    cdef Py_ssize_t i = lo, j = mid, k = lo
    while i < mid and j < hi:
        if a[i] <= a[j]:
            tmp[k] = a[i]
            i += 1
        else:
            tmp[k] = a[j]
            inv += mid - i
            j += 1
        k += 1
    while i < mid:
        tmp[k] = a[i]
        i += 1
        k += 1
    while j < hi:
        tmp[k] = a[j]
        j += 1
        k += 1
    for k in range(lo, hi):
        a[k] = tmp[k]
    return inv


def count_inversions(const long long[::1] seq):
    cdef Py_ssize_t n = seq.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] work = np.array(seq, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] tmp = np.empty(n, dtype=np.int64)
    return int(_merge_count(work, tmp, 0, n))


def linear_assignment(const double[:, ::1] cost):
    cdef Py_ssize_t n = cost.shape[0]
    cdef Py_ssize_t i, j, i0, j0, j1
    cdef double delta, cur
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u_arr = np.zeros(n + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v_arr = np.zeros(n + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] minv_arr = np.empty(n + 1)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] p_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] way_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used_arr = np.zeros(n + 1, dtype=np.uint8)
    cdef double[::1] u = u_arr, v = v_arr, minv = minv_arr
    cdef long long[::1] p = p_arr, way = way_arr
    cdef unsigned char[::1] used = used_arr

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        for j in range(n + 1):
            minv[j] = INFINITY
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = p[j0]
            delta = INFINITY
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break

    cdef cnp.ndarray[cnp.int64_t, ndim=1] assign = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        assign[p[j] - 1] = j - 1
    return assign


def autocorr_peaks(const double[:, ::1] frames, Py_ssize_t min_lag, Py_ssize_t max_lag):
    cdef Py_ssize_t n_frames = frames.shape[0], length = frames.shape[1]
    cdef Py_ssize_t f, lag, k, stop
    cdef double num, e0, e1, r, best, a, b
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_frames)
    if max_lag > length - 1:
        max_lag = length - 1
    for f in range(n_frames):
        best = 0.0
        for lag in range(min_lag, max_lag + 1):
            stop = length - lag
            num = 0.0
            e0 = 0.0
            e1 = 0.0
            for k in range(stop):
                a = frames[f, k]
                b = frames[f, k + lag]
                num += a * b
                e0 += a * a
                e1 += b * b
            if e0 > 0.0 and e1 > 0.0:
                r = num / sqrt(e0 * e1)
                if r > best:
                    best = r
        out[f] = best
    return out
