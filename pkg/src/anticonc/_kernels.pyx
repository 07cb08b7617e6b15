# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops over configuration space.

Every kernel performs floating-point operations in exactly the same order as
its counterpart in ``_fallback`` so that both backends agree bit for bit.
Arrays are laid out as ``(N, B)``: N configurations, B independent columns.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def wht_inplace(double[:, ::1] a):
    cdef Py_ssize_t n = a.shape[0], nb = a.shape[1]
    cdef Py_ssize_t h = 1, i, j, k
    cdef double x, y
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                for k in range(nb):
                    x = a[j, k]
                    y = a[j + h, k]
                    a[j, k] = x + y
                    a[j + h, k] = x - y
        h *= 2


def apply_pair_inplace(double[:, ::1] a, Py_ssize_t bit_i, Py_ssize_t bit_j, double gamma):
    cdef Py_ssize_t n = a.shape[0], nb = a.shape[1]
    cdef Py_ssize_t mi = (<Py_ssize_t>1) << bit_i
    cdef Py_ssize_t mj = (<Py_ssize_t>1) << bit_j
    cdef Py_ssize_t both = mi | mj
    cdef Py_ssize_t x, k
    cdef double s
    for x in range(n):
        if x & both:
            continue
        for k in range(nb):
            s = gamma * (a[x | mi, k] + a[x | mj, k])
            a[x, k] = a[x, k] + s
            a[x | both, k] = a[x | both, k] + s
            a[x | mi, k] = 0.0
            a[x | mj, k] = 0.0


def tree_sum(const double[::1] v):
    cdef Py_ssize_t n = v.shape[0], half, i
    if n == 0:
        return 0.0
    cdef double[::1] buf = np.array(v, dtype=np.float64, copy=True)
    while n > 1:
        half = n // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if n % 2:
            buf[half] = buf[n - 1]
            n = half + 1
        else:
            n = half
    return buf[0]
