# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; same contracts as ``_kernels_py``."""
import numpy as np

from libc.math cimport pow


def scatter_pairs(double[:, :, ::1] local, Py_ssize_t n):
    cdef Py_ssize_t d, a, k, l, rk, rl
    cdef Py_ssize_t nodes[4]
    cdef double w
    out = np.zeros((n, n))
    cdef double[:, ::1] A = out
    for d in range(local.shape[0]):
        for a in range(n + 1 - d):
            nodes[0] = a - 1
            nodes[1] = a
            nodes[2] = a + d - 1
            nodes[3] = a + d
            for k in range(4):
                rk = nodes[k]
                if rk < 0 or rk >= n:
                    continue
                for l in range(4):
                    rl = nodes[l]
                    if rl < 0 or rl >= n:
                        continue
                    w = local[d, k, l]
                    if w != 0.0:
                        A[rk, rl] += w
    return out


def offset_sum(values, double s, Py_ssize_t band):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t m_count = v.shape[0]
    cdef Py_ssize_t m, p
    cdef double total = 0.0, acc, diff
    for m in range(band + 1, m_count):
        acc = 0.0
        for p in range(m_count - m):
            diff = v[p + m] - v[p]
            acc += diff * diff
        total += acc * pow(<double>m, -1.0 - 2.0 * s)
    return 2.0 * total
