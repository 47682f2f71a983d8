"""Command-line runner.

Subcommands: lab, verify, zeta, dtn-scan, fit, cache. A JSON config file
(``--config``) mirrors the flags; explicit flags override it. Exit status is
0 when every assertion passes, 1 on an assertion failure, 2 on a
configuration error and 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import bfk, discrete_lab, dtn_models as dm, model_geometries as mg, zeta_engine as ze
from .cache import BesselZeroCache
from .errors import BFKError, ConfigInvalid

log = logging.getLogger("bfklab")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

GEOMETRIES = ("interval", "cut-circle", "disk", "discrete", "all")


@dataclass
class RunConfig:
    command: str
    geometry: str | None = None
    action: str | None = None
    m: float = 1.0
    L: float = 1.0
    R: float = 1.0
    bc: str = "dirichlet"
    potential: str = "none"
    bump_height: float = 5.0
    seed: int = 0
    n: int = 200
    s: float | None = None
    tolerance: float | None = None
    j_max: int | None = None
    d: int = 1
    x_min: float = -1e7
    x_max: float = -1e3
    points: int = 40
    radial_limit: float = 300.0
    n_exact: int = 200
    sample_fraction: float = 0.01
    cache_dir: str | None = None
    input: str | None = None
    out: str | None = None
    csv: str | None = None
    workers: int = 1
    timings: bool = False

    def validate(self):
        for name in ("m", "L", "R", "radial_limit"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigInvalid(f"{name} must be a positive number, got {v!r}")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigInvalid("tolerance must be positive")
        if self.n < 6:
            raise ConfigInvalid("n must be at least 6")
        if self.points < 2 or self.workers < 1 or self.n_exact < 1:
            raise ConfigInvalid("points, workers and n_exact must be positive")
        if not self.x_min < self.x_max < 0:
            raise ConfigInvalid("need x_min < x_max < 0")
        if self.d not in (1, 2):
            raise ConfigInvalid("d must be 1 or 2")
        if not 0 < self.sample_fraction <= 1:
            raise ConfigInvalid("sample_fraction must lie in (0, 1]")
        if self.potential not in ("none", "bump"):
            raise ConfigInvalid("potential must be 'none' or 'bump'")
        if self.bc not in ("dirichlet", "neumann"):
            raise ConfigInvalid("bc must be 'dirichlet' or 'neumann'")
        return self

    def cache(self) -> BesselZeroCache:
        return BesselZeroCache(self.cache_dir)

    def bump(self):
        if self.potential == "none":
            return None
        return mg.bump_potential(self.L, self.bump_height)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bfklab", description="Numerical checks of the BFK gluing formula.")
    p.add_argument("--config", help="JSON file mirroring the flags; flags override it")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def geom(sp):
        sp.add_argument("--m", type=float, default=S, help="mass")
        sp.add_argument("--L", type=float, default=S, help="interval or circle length")
        sp.add_argument("--R", type=float, default=S, help="disk radius")

    def outputs(sp):
        sp.add_argument("--out", default=S, help="JSON output path")

    lab = sub.add_parser("lab", help="discrete-lab property checks on a seeded problem")
    lab.add_argument("--seed", type=int, default=S)
    lab.add_argument("--n", type=int, default=S, help="maximal total node count")
    outputs(lab)

    ver = sub.add_parser("verify", help="check det A1 / det A0 = c det Q")
    ver.add_argument("geometry", choices=GEOMETRIES)
    geom(ver)
    ver.add_argument("--potential", choices=("none", "bump"), default=S)
    ver.add_argument("--bump-height", dest="bump_height", type=float, default=S)
    ver.add_argument("--seed", type=int, default=S)
    ver.add_argument("--n", type=int, default=S)
    ver.add_argument("--tolerance", type=float, default=S)
    ver.add_argument("--radial-limit", dest="radial_limit", type=float, default=S)
    ver.add_argument("--cache-dir", dest="cache_dir", default=S)
    ver.add_argument("--workers", type=int, default=S)
    ver.add_argument("--csv", default=S, help="append summary rows to this CSV")
    ver.add_argument("--timings", action="store_true", default=S, help="include timings in the JSON report")
    outputs(ver)

    zt = sub.add_parser("zeta", help="zeta determinant of a model operator")
    zt.add_argument("geometry", choices=("interval", "circle", "disk"))
    geom(zt)
    zt.add_argument("--bc", choices=("dirichlet", "neumann"), default=S)
    zt.add_argument("--s", type=float, default=S, help="also evaluate zeta(s)")
    zt.add_argument("--radial-limit", dest="radial_limit", type=float, default=S)
    zt.add_argument("--cache-dir", dest="cache_dir", default=S)
    outputs(zt)

    sc = sub.add_parser("dtn-scan", help="tabulate log det Q(x) on the negative axis")
    sc.add_argument("geometry", choices=("interval", "cut-circle", "disk"))
    geom(sc)
    sc.add_argument("--potential", choices=("none", "bump"), default=S)
    sc.add_argument("--bump-height", dest="bump_height", type=float, default=S)
    sc.add_argument("--x-min", dest="x_min", type=float, default=S)
    sc.add_argument("--x-max", dest="x_max", type=float, default=S)
    sc.add_argument("--points", type=int, default=S)
    sc.add_argument("--n-exact", dest="n_exact", type=int, default=S)
    sc.add_argument("--out", default=S, help="CSV output path (stdout if omitted)")

    ft = sub.add_parser("fit", help="fit the large-|x| expansion to a dtn-scan table")
    ft.add_argument("--input", default=S, required=False)
    ft.add_argument("--d", type=int, default=S)
    ft.add_argument("--j-max", dest="j_max", type=int, default=S)
    outputs(ft)

    ca = sub.add_parser("cache", help="manage the Bessel-zero cache")
    ca.add_argument("action", choices=("build", "verify", "clear", "info"))
    ca.add_argument("--cache-dir", dest="cache_dir", default=S)
    ca.add_argument("--radial-limit", dest="radial_limit", type=float, default=S)
    ca.add_argument("--sample-fraction", dest="sample_fraction", type=float, default=S)
    ca.add_argument("--seed", type=int, default=S)
    return p


def load_config(argv) -> tuple[RunConfig, bool]:
    args = vars(_parser().parse_args(argv))
    verbose = args.pop("verbose")
    path = args.pop("config", None)
    values: dict = {}
    if path:
        try:
            values = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigInvalid("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(values) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    values.update(args)
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from exc
    return cfg.validate(), verbose


# ---------------------------------------------------------------------------
# output


def _write(path, text):
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")


def _summary(reports):
    lines = [f"{'geometry':<44} {'lhs':>16} {'rhs':>16} {'c':>10} {'rel.err':>10} {'tol':>8}  status"]
    for r in reports:
        label = r.geometry.get("type", "") + " " + ",".join(
            f"{k}={v}" for k, v in sorted(r.geometry.items()) if k not in ("type",))
        status = "PASS" if r.passed else "FAIL " + ",".join(r.failed_checks() or ["identity"])
        lines.append(f"{label[:44]:<44} {r.lhs:>16.10g} {r.rhs:>16.10g} {r.c:>10.6g} "
                     f"{r.relative_error:>10.2e} {r.tolerance:>8.0e}  {status}")
    return "\n".join(lines)


def _append_csv(path, reports):
    p = Path(path)
    new = not p.exists() or p.stat().st_size == 0
    with p.open("a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(bfk.VerificationReport.CSV_HEADER)
        for r in reports:
            w.writerow(r.csv_row())


# ---------------------------------------------------------------------------
# commands


def cmd_lab(cfg: RunConfig) -> int:
    problem = discrete_lab.random_symmetric_problem(cfg.seed, cfg.n)
    checks = discrete_lab.lab_checks(problem)
    report = {"schema_version": bfk.SCHEMA_VERSION, "seed": cfg.seed, "n_max": cfg.n,
              "n_total": problem.n_total, "n_bdy": problem.n_bdy,
              "checks": [c.to_dict() for c in checks], "pass": all(c.passed for c in checks)}
    if cfg.out:
        _write(cfg.out, json.dumps(report, indent=2, sort_keys=True))
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<28} {json.dumps(c.inputs, sort_keys=True):<34} "
              f"value={c.value:.3e} tol={c.tolerance:.1e}")
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def _verify_tasks(cfg: RunConfig):
    g = cfg.geometry
    if g == "interval":
        return [lambda: bfk.verify_interval(cfg.m, cfg.L, cfg.bump())]
    if g == "cut-circle":
        return [lambda: bfk.verify_cut_circle(cfg.m, cfg.L)]
    if g == "disk":
        cache = cfg.cache()
        return [lambda: bfk.verify_disk(cfg.m, cfg.R, cfg.radial_limit, cache)]
    if g == "discrete":
        return [lambda: bfk.verify_discrete(cfg.seed, cfg.n)]
    cache = cfg.cache()
    tasks = [(lambda m=m, L=L: bfk.verify_interval(m, L)) for m, L in ((1, 1), (2, 1), (1, 3))]
    tasks.append(lambda: bfk.verify_interval(1.0, 1.0, mg.bump_potential(1.0, cfg.bump_height)))
    tasks += [(lambda m=m, L=L: bfk.verify_cut_circle(m, L)) for m, L in ((1, 2 * math.pi), (2, 1))]
    tasks += [(lambda m=m: bfk.verify_disk(m, 1.0, cfg.radial_limit, cache)) for m in (1.0, 2.0)]
    tasks += [(lambda s=s: bfk.verify_discrete(s, cfg.n)) for s in range(cfg.seed, cfg.seed + 5)]
    return tasks


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.geometry == "disk" or cfg.geometry == "all":
        # warm the cache once so concurrent tasks only read it
        cache = cfg.cache()
        for m in ({cfg.m} if cfg.geometry == "disk" else {1.0, 2.0}):
            for bc in ("dirichlet", "neumann"):
                mg.disk_spectrum(mg.DiskModel(cfg.R if cfg.geometry == "disk" else 1.0, m), bc,
                                 m * m + (cfg.radial_limit / (cfg.R if cfg.geometry == "disk" else 1.0)) ** 2,
                                 cache=cache, audit=False)
    reports = bfk.run_suite(_verify_tasks(cfg), cfg.workers)
    if cfg.tolerance is not None:
        for r in reports:
            r.tolerance = cfg.tolerance
    if cfg.out:
        payload = reports[0].to_dict(cfg.timings) if len(reports) == 1 else {
            "schema_version": bfk.SCHEMA_VERSION, "reports": [r.to_dict(cfg.timings) for r in reports]}
        _write(cfg.out, json.dumps(payload, indent=2, sort_keys=True))
    if cfg.csv:
        _append_csv(cfg.csv, reports)
    print(_summary(reports))
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


def cmd_zeta(cfg: RunConfig) -> int:
    if cfg.geometry == "interval":
        source = bfk.interval_source(cfg.m, cfg.L, cfg.bc)
    elif cfg.geometry == "circle":
        source = bfk.circle_source(cfg.m, cfg.L)
    else:
        source = bfk.disk_source(cfg.m, cfg.R, cfg.bc, cfg.radial_limit, cfg.cache())
    result = ze.zeta_prime_zero(source)
    out = result.to_dict()
    out["schema_version"] = bfk.SCHEMA_VERSION
    if cfg.s is not None:
        v = ze.zeta(source, cfg.s)
        out["zeta_s"] = {"s": cfg.s, "value": float(np.real(v.value)), "error": float(v.error)}
    _write(cfg.out, json.dumps(out, indent=2, sort_keys=True))
    return EXIT_PASS


def _scan_operator(cfg: RunConfig):
    if cfg.geometry == "interval":
        return dm.DtNOperator("interval", cfg.m, cfg.L, potential=cfg.bump())
    if cfg.geometry == "cut-circle":
        return dm.DtNOperator("cut_circle", cfg.m, cfg.L)
    return dm.DtNOperator("disk", cfg.m, cfg.R, n_exact=cfg.n_exact)


def cmd_dtn_scan(cfg: RunConfig) -> int:
    grid = -np.geomspace(-cfg.x_max, -cfg.x_min, cfg.points)
    rows = dm.dtn_scan(_scan_operator(cfg), grid)
    if cfg.out:
        dm.write_dtn_scan(cfg.out, rows)
    else:
        buf = io.StringIO()
        buf.write("x,logdetq,err\n")
        for row in rows:
            buf.write(",".join(f"{v:.15g}" for v in row) + "\n")
        sys.stdout.write(buf.getvalue())
    return EXIT_PASS


def cmd_fit(cfg: RunConfig) -> int:
    if not cfg.input:
        raise ConfigInvalid("fit needs --input")
    try:
        samples = asy.SampleTable.from_csv(cfg.input)
    except (OSError, ValueError) as exc:
        raise ConfigInvalid(f"cannot use sample file {cfg.input}: {exc}") from exc
    try:
        fit = asy.fit_expansion(samples, cfg.d, cfg.j_max)
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from exc
    out = fit.to_dict()
    out["schema_version"] = bfk.SCHEMA_VERSION
    out["c"] = asy.local_constant(fit)
    _write(cfg.out, json.dumps(out, indent=2, sort_keys=True))
    return EXIT_PASS


def cmd_cache(cfg: RunConfig) -> int:
    cache = cfg.cache()
    if cfg.action == "clear":
        cache.clear()
        print(f"cleared {cache.path}")
        return EXIT_PASS
    if cfg.action == "info":
        print(json.dumps(cache.info(), indent=2))
        return EXIT_PASS
    limit = cfg.radial_limit
    if cfg.action == "build":
        for kind in ("J", "Jp"):
            n = 0
            while n < limit:
                if cache.get(kind, n, limit) is None:
                    cache.put(kind, n, limit, mg.bessel_zeros_below(n, limit, kind))
                n += 1
        cache.save()
        print(json.dumps(cache.info(), indent=2))
        return EXIT_PASS
    # verify: re-derive a random sample of stored zeros at high precision
    rng = np.random.default_rng(cfg.seed)
    worst, checked = 0.0, 0
    for kind, n, table_limit, zeros in cache.tables():
        if not zeros:
            continue
        if any(b <= a for a, b in zip(zeros, zeros[1:])) or zeros[-1] >= table_limit:
            print(f"FAIL {kind}:{n}: zeros not ascending or beyond the stored limit")
            return EXIT_FAIL
        count = int(rng.binomial(len(zeros), cfg.sample_fraction))
        if count:
            worst = max(worst, mg.verify_zero_table(n, kind, zeros, count, rng))
            checked += count
    ok = worst <= 1e-13
    print(f"{'PASS' if ok else 'FAIL'} checked {checked} zeros, worst relative error {worst:.2e} (limit 1e-13)")
    return EXIT_PASS if ok else EXIT_FAIL


COMMANDS = {"lab": cmd_lab, "verify": cmd_verify, "zeta": cmd_zeta, "dtn-scan": cmd_dtn_scan,
            "fit": cmd_fit, "cache": cmd_cache}


def run(cfg: RunConfig) -> int:
    return COMMANDS[cfg.command](cfg)


def main(argv=None) -> int:
    try:
        cfg, verbose = load_config(argv)
    except BFKError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    log.info("config %s", json.dumps(asdict(cfg), sort_keys=True))
    try:
        return run(cfg)
    except BFKError as exc:
        chain = []
        e = exc
        while e is not None:
            chain.append(f"{type(e).__name__}: {e}")
            e = e.__cause__
        print("error: " + " <- ".join(chain), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
