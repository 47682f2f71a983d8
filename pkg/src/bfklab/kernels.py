"""Backend selection for the numerical hot loops.

The compiled extension ``bfklab._kernels`` is used when it imports; otherwise
the pure-Python twins in ``bfklab._kernels_py`` are used. Setting the
environment variable ``BFKLAB_PURE_PYTHON=1`` forces the fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("BFKLAB_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def heat_trace(lams, ts):
    """Heat trace sum(exp(-lam*t)) at each t; ``lams`` must be ascending."""
    return _impl.heat_trace(
        np.ascontiguousarray(lams, dtype=np.float64),
        np.ascontiguousarray(np.atleast_1d(ts), dtype=np.float64),
    )


def compensated_sum(values):
    return float(_impl.compensated_sum(np.ascontiguousarray(values, dtype=np.float64)))


def bessel_i_ratio_all(nmax, x):
    """I_n'(x)/I_n(x) for n = 0..nmax (x > 0)."""
    return _impl.bessel_i_ratio_all(int(nmax), float(x))


__all__ = ["BACKEND", "heat_trace", "compensated_sum", "bessel_i_ratio_all"]
