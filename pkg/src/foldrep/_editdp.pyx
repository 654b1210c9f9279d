# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled dynamic-programming core for generalized edit distances.

Twin of foldrep._editdp_py; see that module for the contract. Build with
    python setup.py build_ext --inplace
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

COMPILED = True


def lev_symbols(const cnp.int32_t[::1] a, const cnp.int32_t[::1] b,
                const double[:, ::1] costs, double indel):
    """Edit distance between two integer-encoded symbol sequences."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef cnp.ndarray[double, ndim=1] prev_arr = np.empty(m + 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cur_arr = np.empty(m + 1, dtype=np.float64)
    cdef double[::1] prev = prev_arr
    cdef double[::1] cur = cur_arr
    cdef double[::1] tmp
    cdef Py_ssize_t i, j, ai
    cdef double best, dele, ins

    prev[0] = 0.0
    for j in range(1, m + 1):
        prev[j] = prev[j - 1] + indel
    if n == 0:
        return prev[m]
    for i in range(1, n + 1):
        ai = a[i - 1]
        cur[0] = prev[0] + indel
        for j in range(1, m + 1):
            best = prev[j - 1] + costs[ai, b[j - 1]]
            dele = prev[j] + indel
            if dele < best:
                best = dele
            ins = cur[j - 1] + indel
            if ins < best:
                best = ins
            cur[j] = best
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m]


def lev_vectors(const double[:, ::1] a, const double[:, ::1] b,
                double scale, double indel):
    """Edit distance between two sequences of real vectors."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t dim = a.shape[1] if n else (b.shape[1] if m else 0)
    cdef cnp.ndarray[double, ndim=1] prev_arr = np.empty(m + 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cur_arr = np.empty(m + 1, dtype=np.float64)
    cdef double[::1] prev = prev_arr
    cdef double[::1] cur = cur_arr
    cdef double[::1] tmp
    cdef Py_ssize_t i, j, k
    cdef double best, dele, ins, sub, acc, d

    prev[0] = 0.0
    for j in range(1, m + 1):
        prev[j] = prev[j - 1] + indel
    if n == 0:
        return prev[m]
    for i in range(1, n + 1):
        cur[0] = prev[0] + indel
        for j in range(1, m + 1):
            acc = 0.0
            for k in range(dim):
                d = a[i - 1, k] - b[j - 1, k]
                acc += d * d
            sub = scale * sqrt(acc)
            if sub > 1.0:
                sub = 1.0
            best = prev[j - 1] + sub
            dele = prev[j] + indel
            if dele < best:
                best = dele
            ins = cur[j - 1] + indel
            if ins < best:
                best = ins
            cur[j] = best
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m]
