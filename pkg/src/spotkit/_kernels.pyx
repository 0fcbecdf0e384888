# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled suppression/matching kernels.

Semantics (including tie-breaking and the order of floating-point
operations) are bit-for-bit identical to the pure-NumPy twins in
``_kernels_py.py``; see that module for the documented contracts.
"""

from libc.math cimport fabs

import numpy as np

cimport numpy as cnp

cnp.import_array()


def soft_nms_kernel(times, confs, double window, double floor, bint indicator=False):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] times_arr = np.ascontiguousarray(times, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] conf_arr = np.array(confs, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = times_arr.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] accepted = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] active = np.empty(n, dtype=np.uint8)

    cdef double[::1] t = times_arr
    cdef double[::1] c = conf_arr
    cdef cnp.int64_t[::1] order_v = order
    cdef double[::1] accepted_v = accepted
    cdef cnp.uint8_t[::1] active_v = active

    cdef Py_ssize_t i, j, best, n_out = 0, n_active = 0
    cdef double half_w = window / 2.0
    cdef double best_c, best_t, dist, factor, t_acc

    for j in range(n):
        if c[j] >= floor:
            active_v[j] = 1
            n_active += 1
        else:
            active_v[j] = 0

    while n_active > 0:
        best = -1
        best_c = -1.0
        best_t = 0.0
        for j in range(n):
            if not active_v[j]:
                continue
            if c[j] > best_c or (c[j] == best_c and t[j] < best_t):
                best = j
                best_c = c[j]
                best_t = t[j]
        order_v[n_out] = best
        accepted_v[n_out] = c[best]
        n_out += 1
        active_v[best] = 0
        n_active -= 1
        if n_active == 0:
            break
        t_acc = t[best]
        for j in range(n):
            if not active_v[j]:
                continue
            dist = fabs(t[j] - t_acc)
            if indicator:
                factor = 0.0 if dist < half_w else 1.0
            else:
                factor = dist / half_w
                if factor > 1.0:
                    factor = 1.0
            c[j] *= factor
            if c[j] < floor:
                active_v[j] = 0
                n_active -= 1

    return order[:n_out].copy(), accepted[:n_out].copy()


def hard_nms_kernel(times, confs, double window):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] times_arr = np.ascontiguousarray(times, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] conf_arr = np.ascontiguousarray(confs, dtype=np.float64)
    cdef Py_ssize_t n = times_arr.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.lexsort(
        (np.arange(n), times_arr, -conf_arr)
    ).astype(np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] kept = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] alive = np.ones(n, dtype=np.uint8)

    cdef double[::1] t = times_arr
    cdef cnp.int64_t[::1] order_v = order
    cdef cnp.int64_t[::1] kept_v = kept
    cdef cnp.uint8_t[::1] alive_v = alive

    cdef Py_ssize_t k, j, i, n_kept = 0
    cdef double half_w = window / 2.0

    for k in range(n):
        i = order_v[k]
        if not alive_v[i]:
            continue
        kept_v[n_kept] = i
        n_kept += 1
        for j in range(n):
            if alive_v[j] and fabs(t[j] - t[i]) < half_w:
                alive_v[j] = 0

    return kept[:n_kept].copy()


def match_kernel(det_times, gt_times, double radius):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] det_arr = np.ascontiguousarray(det_times, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gt_arr = np.ascontiguousarray(gt_times, dtype=np.float64)
    cdef Py_ssize_t n = det_arr.shape[0]
    cdef Py_ssize_t m = gt_arr.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] flags = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] taken = np.zeros(m, dtype=np.uint8)

    cdef double[::1] d = det_arr
    cdef double[::1] g = gt_arr
    cdef cnp.uint8_t[::1] flags_v = flags
    cdef cnp.uint8_t[::1] taken_v = taken

    cdef Py_ssize_t k, j, best
    cdef double dist, best_d

    if m == 0:
        return flags

    for k in range(n):
        best = -1
        best_d = 0.0
        for j in range(m):
            if taken_v[j]:
                continue
            dist = fabs(g[j] - d[k])
            if dist <= radius and (best < 0 or dist < best_d):
                best = j
                best_d = dist
        if best >= 0:
            taken_v[best] = 1
            flags_v[k] = 1

    return flags
