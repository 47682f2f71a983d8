# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Must stay numerically interchangeable with _kernels_py."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt

cnp.import_array()

# exp(-x) underflows to a subnormal past this point
cdef double _EXP_CUT = 745.0


def heat_trace(double[::1] lams, double[::1] ts):
    """Sum exp(-lam*t) over ascending ``lams`` for every t, Neumaier-compensated."""
    cdef Py_ssize_t nt = ts.shape[0], nl = lams.shape[0]
    cdef Py_ssize_t i, j
    cdef double t, s, c, term, tmp
    out = np.empty(nt, dtype=np.float64)
    cdef double[::1] res = out
    for i in range(nt):
        t = ts[i]
        s = 0.0
        c = 0.0
        for j in range(nl):
            if lams[j] * t > _EXP_CUT:
                break
            term = exp(-lams[j] * t)
            tmp = s + term
            if (s if s >= 0 else -s) >= term:
                c += (s - tmp) + term
            else:
                c += (term - tmp) + s
            s = tmp
        res[i] = s + c
    return out


def compensated_sum(double[::1] values):
    cdef Py_ssize_t j, n = values.shape[0]
    cdef double s = 0.0, c = 0.0, v, tmp
    for j in range(n):
        v = values[j]
        tmp = s + v
        if (s if s >= 0 else -s) >= (v if v >= 0 else -v):
            c += (s - tmp) + v
        else:
            c += (v - tmp) + s
        s = tmp
    return s + c


cdef Py_ssize_t _start_index(Py_ssize_t nmax, double x):
    # Truncation error at order nmax shrinks like prod h_k^2; stop once that
    # product is below exp(-42).
    cdef Py_ssize_t m = nmax
    cdef double acc = 0.0, k1, hk
    while acc > -42.0:
        k1 = <double>(m + 1)
        hk = x / (k1 + sqrt(k1 * k1 + x * x))
        acc += 2.0 * log(hk)
        m += 1
    return m + 8


def bessel_i_ratio_all(Py_ssize_t nmax, double x):
    """I_n'(x)/I_n(x) for n = 0..nmax by backward recurrence on I_{n+1}/I_n."""
    cdef Py_ssize_t m = _start_index(nmax, x)
    cdef Py_ssize_t n
    cdef double h = 0.0
    out = np.empty(nmax + 1, dtype=np.float64)
    cdef double[::1] res = out
    for n in range(m, -1, -1):
        h = 1.0 / (2.0 * (n + 1) / x + h)
        if n <= nmax:
            res[n] = h + n / x
    return out
