import json

import numpy as np
import pytest

from bfklab import model_geometries as mg
from bfklab.cache import FORMAT_VERSION, BesselZeroCache, default_cache_dir
from bfklab.errors import CacheCorrupt


def test_put_get_save_reload(tmp_path):
    c = BesselZeroCache(tmp_path)
    zeros = mg.bessel_zeros_below(3, 50.0, "J")
    c.put("J", 3, 50.0, zeros)
    c.save()
    again = BesselZeroCache(tmp_path)
    assert again.get("J", 3, 40.0) == [z for z in zeros.tolist() if z < 40.0]
    assert again.get("J", 3, 60.0) is None
    assert again.get("Jp", 3, 10.0) is None
    data = json.loads(again.path.read_text())
    assert data["format_version"] == FORMAT_VERSION


def test_bad_header_raises(tmp_path):
    (tmp_path / "bessel_zeros.json").write_text(json.dumps({"tables": {}}))
    with pytest.raises(CacheCorrupt):
        BesselZeroCache(tmp_path)
    (tmp_path / "bessel_zeros.json").write_text("not json")
    with pytest.raises(CacheCorrupt):
        BesselZeroCache(tmp_path)


def test_clear_then_miss_recomputes(tmp_path):
    model = mg.DiskModel(1.0, 1.0)
    c = BesselZeroCache(tmp_path)
    first = mg.disk_spectrum(model, "dirichlet", 1 + 50.0**2, cache=c)
    c.clear()
    assert not c.path.exists()
    second = mg.disk_spectrum(model, "dirichlet", 1 + 50.0**2, cache=c)
    np.testing.assert_array_equal(first, second)


def test_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv("BFKLAB_CACHE_DIR", str(tmp_path))
    assert default_cache_dir() == tmp_path


def test_tables_iteration_order(tmp_path):
    c = BesselZeroCache(tmp_path)
    for n in (10, 2):
        c.put("Jp", n, 5.0, [])
    c.put("J", 1, 5.0, [3.83])
    assert [(k, n) for k, n, _, _ in c.tables()] == [("J", 1), ("Jp", 2), ("Jp", 10)]
