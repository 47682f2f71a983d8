"""Cross-module invariants and worked examples with closed-form answers."""

import math

import numpy as np
import pytest
from scipy import special

from bfklab import bfk, contour, discrete_lab as dl, dtn_models as dm, model_geometries as mg
from bfklab import zeta_engine as ze
from bfklab.errors import BranchCutHit


@pytest.fixture(scope="module")
def interval40():
    return dl.interval_problem(40, m=1.0, length=1.0)


# finite zeta


def test_finite_zeta_special_values(interval40):
    p = interval40
    a = dl.reduced_operator(p, 0.0)
    assert dl.finite_zeta(p, 0.0, 0) == pytest.approx(p.n_interior, abs=1e-12)
    assert dl.finite_zeta(p, 0.0, 1).real == pytest.approx(np.trace(np.linalg.inv(a)), rel=1e-12)
    assert dl.finite_zeta(p, 0.0, -1).real == pytest.approx(np.trace(a), rel=1e-12)


def test_finite_zeta_branch_cut():
    p = dl.interval_problem(20, m=1.0, length=1.0, potential=lambda x: -50.0 * np.ones_like(x))
    with pytest.raises(BranchCutHit):
        dl.finite_zeta(p, 0.0, 0.5)


# resolvent and Poisson operator


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_resolvent_and_poisson_round_trip(interval40, t):
    p, z = interval40, -2.0
    assert np.all(dl.resolvent(p, t, z, np.zeros(p.n_interior)) == 0.0)
    rm = dl.resolvent_matrix(p, t, z)
    e3 = np.zeros(p.n_interior)
    e3[3] = 1.0
    np.testing.assert_allclose(dl.resolvent(p, t, z, e3), rm[:, 3], rtol=1e-12, atol=1e-14)
    g = np.array([0.3, -1.2])
    u = dl.poisson(p, t, z, g)
    interior = (p.interior_rows - z * p.interior_selector) @ u
    # rows carry a 1/h^2 scale
    assert np.max(np.abs(interior)) < 1e-12 * np.max(np.abs(u)) * 40**2
    np.testing.assert_allclose(p.boundary_block(t) @ u, g, rtol=1e-12, atol=1e-13)


def test_robin_half_first_eigenvalue_matches_discrete():
    exact = mg.interval_spectrum(mg.IntervalModel(1.0, 1.0), mg.robin(0.5), 1)[0]
    coarse = np.min(dl.spectrum(dl.interval_problem(400, stencil="three_point"), 0.5).real)
    fine = np.min(dl.spectrum(dl.interval_problem(800, stencil="three_point"), 0.5).real)
    extrapolated = (4 * fine - coarse) / 3
    assert abs(fine - exact) < 1e-4
    assert abs(extrapolated - exact) < 1e-6


# special functions and determinants


@pytest.mark.parametrize("n", [0, 3, 25])
def test_bessel_ratio_riccati_equation(n):
    x, h = 2.5, 1e-4
    r = mg.bessel_i_ratio(n, x)
    dr = (mg.bessel_i_ratio(n, x + h) - mg.bessel_i_ratio(n, x - h)) / (2 * h)
    assert dr == pytest.approx(1 + n * n / x**2 - r / x - r * r, rel=1e-7, abs=1e-8)


def test_bessel_ratio_large_order():
    x = 1.0
    for n in (500, 2000):
        r = mg.bessel_i_ratio(n, x)
        assert r * x / n == pytest.approx(1.0, abs=1.0 / n)


def test_gelfand_yaglom_massless_limit():
    L = 1.7
    assert mg.gelfand_yaglom_det(mg.IntervalModel(L, 1e-6)) == pytest.approx(2 * L, rel=1e-10)


# interval and cut-circle DtN maps


def test_dtn_interval_deep_negative_is_diagonal():
    m, L, z = 1.0, 1.0, -1e6
    q = dm.dtn_interval(z, m, L)
    mu = math.sqrt(m * m - z)
    assert q[0, 0] == pytest.approx(mu, rel=1e-12)
    assert abs(q[0, 1]) < 1e-300


def test_dtn_interval_determinant_on_grid():
    m, L = 1.3, 0.8
    zs = np.concatenate([-np.geomspace(1e-2, 1e4, 49), [0.0]])
    errs = [abs(np.linalg.det(dm.dtn_interval(z, m, L)) / (m * m - z) - 1) for z in zs]
    assert max(errs) < 1e-12


def test_dtn_interval_against_discrete_second_order():
    m, L, z = 1.0, 1.0, -3.0
    exact = dm.dtn_interval(z, m, L)
    errs = [np.max(np.abs(dl.q_matrix(dl.interval_problem(n, m, L, stencil="three_point"), z) - exact))
            for n in (100, 200, 400)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2) < 0.1)


def test_cut_circle_row_sums():
    m, L, z = 0.7, 2.0, -1.5
    q = dm.dtn_interval(z, m, L)
    mu = math.sqrt(m * m - z)
    np.testing.assert_allclose(q.sum(axis=1), mu * math.tanh(mu * L / 2), rtol=1e-13)
    assert q.sum() == pytest.approx(dm.dtn_cut_circle(z, m, L), rel=1e-13)
    assert np.linalg.det(dm.cut_circle_transmission_matrix(z, m, L)) == pytest.approx(
        dm.dtn_cut_circle(z, m, L), rel=1e-12)


def test_cut_circle_exponential_regime():
    rep = bfk.verify_cut_circle(10.0, 2.0)
    assert rep.passed, rep.failed_checks()


# disk modes


def test_disk_modes_shape():
    m, R, z = 1.0, 1.5, -2.0
    lam = dm.disk_modes(200, z, m, R)
    assert np.all(np.diff(lam) > 0)
    n = np.arange(lam.size)
    excess = lam - n / R
    assert np.all(excess > 0)
    mu = math.sqrt(m * m - z)
    assert np.max(excess) <= mu
    # I_{-n} = I_n, so the negative modes repeat the positive ones
    assert dm.dtn_disk_mode(7, z, m, R) == pytest.approx(lam[7], rel=1e-14)
    x = mu * R
    ref = mu * special.ive(6, x) / special.ive(7, x) - 7 / R
    assert lam[7] == pytest.approx(ref, rel=1e-12)


def test_disk_scalar_interpolation_per_mode():
    assert dm.disk_scalar_mode_check(-1.0, 1.0, 1.0, nmax=200) < 1e-10


# contour quadrature


def _contour(s, g, eps, growth):
    return contour.prop41_rhs(s, g, contour.ContourSpec(epsilon=eps), growth=growth)


def _contour_total(s, g, eps, growth):
    return _contour(s, g, eps, growth).value


@pytest.mark.parametrize("s", [0.3, 1.5, 2.25])
def test_contour_of_constant_vanishes(s):
    growth = contour.GrowthModel(C=1.0, beta=0.0, log_power=0)
    assert abs(_contour_total(s, lambda z: np.ones_like(z), 0.5, growth)) < 1e-11


@pytest.mark.parametrize("s", [0.4, 1.3, 2.0])
def test_contour_single_eigenvalue(s):
    lam = 3.0
    g = lambda z: np.log(lam - z + 0j)
    growth = contour.GrowthModel(C=1.0 + abs(math.log(lam)), beta=0.0, log_power=1)
    a = _contour(s, g, 0.5, growth)
    b = _contour(s, g, 2.0, growth)
    assert abs(a.value - b.value) <= a.error + b.error + 1e-12
    assert abs(a.value - lam**-s) <= a.error + 1e-12


@pytest.mark.parametrize("delta", [1e-2, 1e-3])
def test_explicit_path_converges_to_collapsed(delta):
    lam, s = 3.0, 1.5
    g = lambda z: np.log(lam - z + 0j)
    growth = contour.GrowthModel(C=1.0 + math.log(lam), beta=0.0, log_power=1)
    collapsed = _contour_total(s, g, 0.5, growth)
    spec = contour.ContourSpec(epsilon=0.5, delta=delta)
    explicit = contour.explicit_contour_integral(s, g, spec, r_max=1e8).value
    assert abs(explicit - collapsed) < 20 * delta


# complex powers of finite operators


@pytest.fixture(scope="module")
def small_problem():
    return dl.interval_problem(12, m=1.0, length=1.0)


def _seeley(p, s):
    lam = dl.spectrum(p, 0.0).real
    spec = contour.ContourSpec(epsilon=0.5 * lam.min(), r_max=2.0 * lam.max(), circle_nodes=400)
    return contour.seeley_power_discrete(p, 0.0, s, spec)


def test_seeley_power_special_values(small_problem):
    a = dl.reduced_operator(small_problem, 0.0)
    np.testing.assert_allclose(_seeley(small_problem, 0), np.eye(a.shape[0]))
    inv = np.linalg.inv(a)
    assert np.max(np.abs(_seeley(small_problem, 1.0) - inv)) < 1e-10 * np.max(np.abs(inv))


def test_seeley_power_semigroup(small_problem):
    half = _seeley(small_problem, 0.5)
    full = _seeley(small_problem, 1.0)
    assert np.max(np.abs(half @ half - full)) < 1e-10 * np.max(np.abs(full))


# heat-trace ladders


def test_disk_heat_fit_area_and_perimeter(zero_cache):
    R = 1.0
    fit = ze.heat_fit(bfk.disk_source(1.0, R, cache=zero_cache))
    assert fit.coefficient(-1.0) == pytest.approx(R * R / 4, rel=1e-6)
    assert fit.coefficient(-0.5) == pytest.approx(-2 * math.pi * R / (8 * math.sqrt(math.pi)), rel=1e-4)


def test_circle_heat_fit_has_no_constant_term():
    L = 2 * math.pi
    fit = ze.heat_fit(bfk.circle_source(1.0, L))
    assert fit.coefficient(-0.5) == pytest.approx(L / math.sqrt(4 * math.pi), rel=1e-8)
    assert abs(fit.coefficient(0.0)) < 1e-6
