import math

import numpy as np
import pytest

from bfklab import bfk, zeta_engine as ze
from bfklab.errors import PoleHit


def _coth_sum(a):
    """sum_{k>=1} 1/(k^2 + a^2)."""
    return (math.pi * a / math.tanh(math.pi * a) - 1) / (2 * a * a)


@pytest.mark.parametrize("m,L", [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0), (0.5, 2.0)])
def test_interval_determinants_closed_form(m, L):
    d = ze.zeta_prime_zero(bfk.interval_source(m, L, "dirichlet"))
    n = ze.zeta_prime_zero(bfk.interval_source(m, L, "neumann"))
    assert d.log_determinant == pytest.approx(math.log(2 * math.sinh(m * L) / m), abs=1e-8)
    assert n.log_determinant == pytest.approx(math.log(2 * m * math.sinh(m * L)), abs=1e-8)
    assert d.error_estimate < 1e-7


@pytest.mark.parametrize("m,L", [(1.0, 2 * math.pi), (2.0, 1.0)])
def test_circle_determinant_closed_form(m, L):
    r = ze.zeta_prime_zero(bfk.circle_source(m, L))
    assert r.log_determinant == pytest.approx(math.log(4 * math.sinh(0.5 * m * L) ** 2), abs=1e-8)


def test_zeta_at_one_matches_coth_sum():
    m, L = 1.0, 1.0
    a = m * L / math.pi
    ref = (L / math.pi) ** 2 * _coth_sum(a)
    v = ze.zeta(bfk.interval_source(m, L), 1.0)
    assert v.value.real == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("bc,expected", [("dirichlet", -0.5), ("neumann", 0.5)])
def test_zeta_at_zero_from_heat_coefficient(bc, expected):
    v = ze.zeta(bfk.interval_source(1.0, 1.0, bc), 0.0)
    assert v.value.real == pytest.approx(expected, abs=1e-8)


def test_pole_is_reported_with_regular_part():
    with pytest.raises(PoleHit) as info:
        ze.zeta(bfk.interval_source(1.0, 1.0), 0.5)
    assert math.isfinite(info.value.regular_part.real)


def test_pole_regular_parts_difference_equals_extra_mode():
    m = 2.0
    parts = []
    for bc in ("neumann", "dirichlet"):
        with pytest.raises(PoleHit) as info:
            ze.zeta(bfk.interval_source(m, 1.0, bc), 0.5)
        parts.append(info.value.regular_part)
    assert (parts[0] - parts[1]).real == pytest.approx(1 / m, rel=1e-7)


def test_finite_spectrum_is_plain_sum():
    lam = np.array([0.5, 1.0, 4.0])
    src = ze.SpectrumSource(lam)
    assert ze.zeta(src, 2.0).value == pytest.approx(np.sum(lam**-2.0))
    assert ze.zeta_prime_zero(src).determinant == pytest.approx(2.0)
    assert ze.direct_zeta(lam, 1.0) == pytest.approx(3.25)


def test_union_of_finite_sources():
    u = ze.union(ze.SpectrumSource([1.0, 3.0]), ze.SpectrumSource([2.0]))
    np.testing.assert_array_equal(u.eigenvalues, [1.0, 2.0, 3.0])


def test_heat_fit_recovers_leading_coefficient():
    L = 1.0
    fit = ze.heat_fit(bfk.interval_source(1.0, L))
    assert fit.coefficient(-0.5) == pytest.approx(L / (2 * math.sqrt(math.pi)), rel=1e-8)


def test_result_json():
    r = ze.zeta_prime_zero(bfk.interval_source(1.0, 1.0))
    import json
    data = json.loads(r.to_json())
    assert set(data) == {"zeta_prime_zero", "determinant", "error_estimate", "diagnostics"}
    assert data["determinant"] == pytest.approx(math.exp(-data["zeta_prime_zero"]))


def test_rejects_non_positive_spectrum():
    with pytest.raises(ValueError):
        ze.SpectrumSource([0.0, 1.0])
