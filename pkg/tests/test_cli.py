import json
import math

import pytest

from bfklab import cli


@pytest.fixture(autouse=True)
def _cache_env(monkeypatch, tmp_path):
    monkeypatch.setenv("BFKLAB_CACHE_DIR", str(tmp_path / "cache"))


def test_verify_interval_example(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert cli.main(["verify", "interval", "--m", "2", "--L", "1", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["lhs"] == pytest.approx(4.0, rel=1e-6) and data["rhs"] == pytest.approx(4.0, rel=1e-12)
    assert data["c"] == pytest.approx(1.0)
    assert "PASS" in capsys.readouterr().out


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert cli.main(["verify", "discrete", "--seed", "5", "--n", "60", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_lab_example():
    assert cli.main(["lab", "--seed", "7", "--n", "100"]) == 0


def test_fit_on_empty_file_is_config_error(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert cli.main(["fit", "--input", str(empty)]) == 2
    assert cli.main(["fit"]) == 2


def test_scan_then_fit(tmp_path):
    scan, fit = tmp_path / "s.csv", tmp_path / "f.json"
    assert cli.main(["dtn-scan", "cut-circle", "--m", "2", "--L", "1", "--out", str(scan)]) == 0
    assert scan.read_text().splitlines()[0] == "x,logdetq,err"
    assert cli.main(["fit", "--input", str(scan), "--j-max", "6", "--out", str(fit)]) == 0
    assert json.loads(fit.read_text())["c"] == pytest.approx(0.5, abs=1e-8)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"m": 2.0, "L": 1.0}))
    out = tmp_path / "r.json"
    assert cli.main(["--config", str(cfg), "verify", "interval", "--m", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["geometry"]["m"] == 1.0
    cfg.write_text(json.dumps({"m": -1.0}))
    assert cli.main(["--config", str(cfg), "verify", "interval"]) == 2
    cfg.write_text(json.dumps({"bogus": 1}))
    assert cli.main(["--config", str(cfg), "verify", "interval"]) == 2


def test_assertion_failure_exit_code(tmp_path):
    assert cli.main(["verify", "interval", "--tolerance", "1e-15"]) == 1


def test_numerical_failure_exit_code():
    # s = 1/2 is a pole of the interval zeta function
    assert cli.main(["zeta", "interval", "--s", "0.5"]) == 3


def test_zeta_command(tmp_path):
    out = tmp_path / "z.json"
    assert cli.main(["zeta", "circle", "--m", "2", "--L", "1", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["determinant"] == pytest.approx(4 * math.sinh(1.0) ** 2, rel=1e-8)


def test_cache_lifecycle(tmp_path, capsys):
    d = str(tmp_path / "zc")
    assert cli.main(["cache", "build", "--cache-dir", d, "--radial-limit", "40"]) == 0
    assert cli.main(["cache", "verify", "--cache-dir", d, "--sample-fraction", "0.2"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert cli.main(["cache", "clear", "--cache-dir", d]) == 0
    (tmp_path / "zc").mkdir(exist_ok=True)
    (tmp_path / "zc" / "bessel_zeros.json").write_text('{"format_version": 99}')
    assert cli.main(["cache", "info", "--cache-dir", d]) == 2


def test_csv_summary(tmp_path):
    path = tmp_path / "summary.csv"
    assert cli.main(["verify", "cut-circle", "--m", "2", "--L", "1", "--csv", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0].startswith("geometry,params,lhs,rhs,c")
    assert len(lines) == 2
