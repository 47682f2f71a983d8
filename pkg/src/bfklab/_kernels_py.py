"""Pure-Python implementations of the compiled kernels in ``_kernels.pyx``."""

import math

import numpy as np

_EXP_CUT = 745.0


def heat_trace(lams, ts):
    lams = np.ascontiguousarray(lams, dtype=np.float64)
    ts = np.ascontiguousarray(ts, dtype=np.float64)
    out = np.empty(ts.shape[0])
    for i, t in enumerate(ts):
        stop = np.searchsorted(lams * t, _EXP_CUT, side="right")
        out[i] = math.fsum(np.exp(-lams[:stop] * t))
    return out


def compensated_sum(values):
    return math.fsum(np.asarray(values, dtype=np.float64))


def _start_index(nmax, x):
    m = nmax
    acc = 0.0
    while acc > -42.0:
        k1 = m + 1.0
        acc += 2.0 * math.log(x / (k1 + math.sqrt(k1 * k1 + x * x)))
        m += 1
    return m + 8


def bessel_i_ratio_all(nmax, x):
    m = _start_index(nmax, x)
    out = np.empty(nmax + 1)
    h = 0.0
    for n in range(m, -1, -1):
        h = 1.0 / (2.0 * (n + 1) / x + h)
        if n <= nmax:
            out[n] = h + n / x
    return out
