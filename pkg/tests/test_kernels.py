import math

import numpy as np
import pytest
from scipy import special

from bfklab import _kernels_py, kernels

try:
    from bfklab import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = [pytest.param(_kernels_py, id="python")]
if _compiled is not None:
    BACKENDS.append(pytest.param(_compiled, id="cython"))


@pytest.mark.parametrize("impl", BACKENDS)
def test_heat_trace_matches_direct_sum(impl):
    lam = np.sort(np.random.default_rng(1).uniform(0.1, 1e4, 500))
    ts = np.geomspace(1e-4, 1.0, 17)
    ref = np.exp(-np.outer(ts, lam)).sum(axis=1)
    np.testing.assert_allclose(impl.heat_trace(lam, ts), ref, rtol=1e-13)


@pytest.mark.parametrize("impl", BACKENDS)
def test_compensated_sum_matches_fsum(impl):
    vals = np.random.default_rng(2).standard_normal(10000) * 10.0 ** np.random.default_rng(3).integers(-8, 8, 10000)
    assert impl.compensated_sum(vals) == pytest.approx(math.fsum(vals), rel=1e-15, abs=1e-15)


@pytest.mark.parametrize("impl", BACKENDS)
@pytest.mark.parametrize("x", [1e-3, 0.5, 1.0, 37.0, 900.0])
def test_bessel_ratio_against_scaled_bessel(impl, x):
    nmax = 60
    n = np.arange(nmax + 1)
    i_n = special.ive(n, x)
    ref = 0.5 * (special.ive(n - 1, x) + special.ive(n + 1, x)) / i_n
    np.testing.assert_allclose(impl.bessel_i_ratio_all(nmax, x), ref, rtol=1e-12)


@pytest.mark.skipif(_compiled is None, reason="compiled backend not built")
def test_backends_agree():
    lam = np.sort(np.random.default_rng(4).uniform(1.0, 1e5, 2000))
    ts = np.geomspace(1e-5, 1.0, 30)
    np.testing.assert_allclose(_compiled.heat_trace(lam, ts), _kernels_py.heat_trace(lam, ts), rtol=1e-14)
    np.testing.assert_allclose(_compiled.bessel_i_ratio_all(300, 12.5), _kernels_py.bessel_i_ratio_all(300, 12.5),
                               rtol=1e-14)


def test_dispatch_reports_backend():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.compensated_sum([1e16, 1.0, -1e16]) == 1.0


def test_environment_forces_python_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, BFKLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import bfklab; print(bfklab.BACKEND)"], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
