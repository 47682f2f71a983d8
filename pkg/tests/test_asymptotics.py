import json
import math

import numpy as np
import pytest

from bfklab import asymptotics as asy, dtn_models as dm, model_geometries as mg
from bfklab.errors import IllConditioned, ResidualTooLarge


def _synthetic(d, pi, q, grid):
    ax = np.abs(grid)
    v = sum(c * ax ** (-j / 2) for j, c in pi.items()) + sum(c * ax ** (j / 2) * np.log(ax) for j, c in q.items())
    return asy.SampleTable(grid, v, 1e-16 * np.maximum(1, np.abs(v)))


@pytest.mark.parametrize("d", [1, 2])
def test_fit_recovers_known_coefficients(d):
    pi = {j: 0.3 * (j + 2) for j in range(-(d - 1), d + 4)}
    q = {j: 1.0 + 0.5 * j for j in range(d)}
    grid = asy.default_grid(d)
    fit = asy.fit_expansion(_synthetic(d, pi, q, grid), d)
    assert fit.pi[0] == pytest.approx(pi[0], abs=1e-8)
    for j in q:
        assert fit.q[j] == pytest.approx(q[j], abs=1e-8)
    np.testing.assert_allclose(fit.evaluate(grid), _synthetic(d, pi, q, grid).value, rtol=1e-12)


def test_interval_expansion_coefficients():
    m = 2.0
    op = dm.DtNOperator("interval", m, 1.0)
    fit = asy.fit_expansion(asy.sample_logdetq(op, asy.default_grid(1, 40, 1e4, 1e8)), 1, 6)
    # log(m^2 - x) = log|x| + m^2/|x| - m^4/(2 x^2) + ...
    assert abs(fit.pi[0]) < 1e-10
    assert fit.q[0] == pytest.approx(1.0, abs=1e-12)
    assert fit.pi[2] == pytest.approx(m * m, abs=1e-7)


def test_disk_leading_coefficient_is_pi_r():
    op = dm.DtNOperator("disk", 1.0, 1.0)
    fit = asy.fit_expansion(asy.sample_logdetq(op, asy.default_grid(2)), 2)
    assert fit.pi[-1] == pytest.approx(math.pi, rel=1e-6)
    assert fit.pi0 == pytest.approx(-1.0, abs=1e-4)


def test_too_few_samples_and_narrow_grid():
    op = dm.DtNOperator("interval", 1.0, 1.0)
    with pytest.raises(ValueError, match="samples"):
        asy.fit_expansion(asy.sample_logdetq(op, asy.default_grid(1, 10)), 1)
    with pytest.raises(ValueError, match="decades"):
        asy.fit_expansion(asy.sample_logdetq(op, -np.geomspace(1e3, 1e5, 40)), 1)


def test_ill_conditioned_basis_rejected():
    op = dm.DtNOperator("interval", 1.0, 1.0)
    with pytest.raises(IllConditioned):
        asy.fit_expansion(asy.sample_logdetq(op, asy.default_grid(1, 80)), 1, j_max=16)


def test_residual_limit_enforced():
    # log det Q carries an |x|^{1/2} term on the disk that the d=1 basis lacks
    op = dm.DtNOperator("disk", 1.0, 1.0)
    with pytest.raises(ResidualTooLarge):
        asy.fit_expansion(asy.sample_logdetq(op, asy.default_grid(2)), 1)


def test_fit_dict_round_trip_and_csv(tmp_path):
    op = dm.DtNOperator("cut_circle", 1.0, 2 * math.pi)
    rows = dm.dtn_scan(op, asy.default_grid(1))
    path = tmp_path / "scan.csv"
    dm.write_dtn_scan(path, rows)
    fit = asy.fit_expansion(asy.SampleTable.from_csv(path), 1, 6)
    back = asy.fit_from_dict(json.loads(fit.to_json()))
    assert back.pi == fit.pi and back.q == fit.q
    assert asy.local_constant(fit) == pytest.approx(0.5, abs=1e-10)


def test_locality_audit_for_interior_bump():
    audit = asy.locality_audit(1.0, 1.0, mg.bump_potential(1.0, 20.0))
    assert audit.passed
    assert audit.logdetq_change_at_zero > 1e-2


def test_sample_table_validation():
    with pytest.raises(ValueError):
        asy.SampleTable([1.0, 2.0], [1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        asy.SampleTable.from_rows([])
