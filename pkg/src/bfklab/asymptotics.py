"""Large-|x| expansion of log det Q(x) on the negative axis.

log det Q(x) ~ sum_j pi_j |x|^{-j/2} + sum_j q_j |x|^{j/2} log|x|, with
j >= -(d-1) in the first sum and 0 <= j <= d-1 in the second. The constant
term pi_0 fixes the local constant c = exp(-pi_0).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dtn_models import DtNOperator, logdet_q, read_dtn_scan
from .errors import IllConditioned, ResidualTooLarge

RESIDUAL_LIMIT = {1: 1e-6, 2: 1e-4}
COND_LIMIT = 1e10


@dataclass
class SampleTable:
    x: np.ndarray
    value: np.ndarray
    err: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        self.err = np.asarray(self.err, dtype=float)
        if not (self.x.shape == self.value.shape == self.err.shape):
            raise ValueError("sample columns differ in length")

    def __len__(self):
        return self.x.size

    def rows(self):
        return list(zip(self.x.tolist(), self.value.tolist(), self.err.tolist()))

    @classmethod
    def from_rows(cls, rows):
        rows = list(rows)
        if not rows:
            raise ValueError("empty sample table")
        x, v, e = zip(*rows)
        return cls(np.array(x), np.array(v), np.array(e))

    @classmethod
    def from_csv(cls, path):
        return cls.from_rows(read_dtn_scan(path))

    def subset(self, mask):
        return SampleTable(self.x[mask], self.value[mask], self.err[mask])


@dataclass
class ExpansionFit:
    d: int
    j_max: int
    pi: dict
    q: dict
    residual: float
    condition_number: float
    x_range: tuple = (0.0, 0.0)
    n_samples: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def pi0(self) -> float:
        return self.pi[0]

    def evaluate(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        out = np.zeros_like(ax)
        for j, c in self.pi.items():
            out += c * ax ** (-j / 2)
        for j, c in self.q.items():
            out += c * ax ** (j / 2) * np.log(ax)
        return out

    def to_dict(self):
        return {
            "d": self.d,
            "j_max": self.j_max,
            "pi": {str(k): v for k, v in self.pi.items()},
            "q": {str(k): v for k, v in self.q.items()},
            "residual": self.residual,
            "cond": self.condition_number,
            "x_range": list(self.x_range),
            "n_samples": self.n_samples,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def sample_logdetq(dtn: DtNOperator, x_grid: Sequence[float]) -> SampleTable:
    """log det Q at each grid point (negative x), sorted descending."""
    xs = np.sort(np.asarray(list(x_grid), dtype=float))[::-1]
    if np.any(xs >= 0):
        raise ValueError("sample points must be negative")
    vals, errs = [], []
    for x in xs:
        r = logdet_q(dtn, x)
        vals.append(float(np.real(r.value)))
        errs.append(float(r.error_estimate))
    return SampleTable(xs, np.array(vals), np.array(errs))


def default_grid(d: int, n: int = 40, lo: float | None = None, hi: float | None = None) -> np.ndarray:
    """Geometric grid of negative x; d=1 spans |x| in [1e3, 1e7], d=2 [1e2, 1e5]."""
    if lo is None:
        lo = 1e3 if d == 1 else 1e2
    if hi is None:
        hi = 1e7 if d == 1 else 1e5
    return -np.geomspace(lo, hi, n)


def _basis(d, j_max):
    terms = [("pi", j) for j in range(-(d - 1), j_max + 1)]
    terms += [("q", j) for j in range(0, d)]
    return terms


def _column(term, ax):
    kind, j = term
    if kind == "pi":
        return ax ** (-j / 2)
    return ax ** (j / 2) * np.log(ax)


def fit_expansion(samples: SampleTable, d: int, j_max: int | None = None,
                  residual_limit: float | None = None) -> ExpansionFit:
    """Weighted least squares in the expansion basis.

    Weights are inverse per-sample error estimates (floored at roundoff of
    the sample value). Columns are scaled to unit max norm before solving; the
    reported condition number refers to the scaled, weighted design.
    """
    j_max = d + 3 if j_max is None else j_max
    ax = np.abs(samples.x)
    terms = _basis(d, j_max)
    if len(samples) < 3 * len(terms):
        raise ValueError(f"need at least {3 * len(terms)} samples for {len(terms)} coefficients, got {len(samples)}")
    if ax.max() / ax.min() < 1e3 * (1 - 1e-12):
        raise ValueError("sample grid must span at least three decades")
    design = np.column_stack([_column(t, ax) for t in terms])
    sigma = np.maximum(samples.err, 1e-15 * np.maximum(1.0, np.abs(samples.value)))
    w = 1.0 / sigma
    w = w / w.max()
    a = design * w[:, None]
    scale = np.max(np.abs(a), axis=0)
    a = a / scale
    coef, _, rank, sv = np.linalg.lstsq(a, samples.value * w, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if rank < len(terms) or cond > COND_LIMIT:
        raise IllConditioned(f"expansion design has condition number {cond:.3g}")
    coef = coef / scale
    fitted = design @ coef
    residual = float(np.max(np.abs(fitted - samples.value) / np.maximum(1.0, np.abs(samples.value))))
    limit = residual_limit if residual_limit is not None else RESIDUAL_LIMIT.get(d, 1e-4)
    pi = {j: float(c) for (kind, j), c in zip(terms, coef) if kind == "pi"}
    q = {j: float(c) for (kind, j), c in zip(terms, coef) if kind == "q"}
    fit = ExpansionFit(d, j_max, pi, q, residual, cond, (float(ax.min()), float(ax.max())), len(samples))
    if residual > limit:
        raise ResidualTooLarge(f"expansion residual {residual:.3g} exceeds {limit:.1g}; raise j_max or move the grid out")
    return fit


def local_constant(fit: ExpansionFit) -> float:
    return math.exp(-fit.pi[0])


def fit_from_dict(data: dict) -> ExpansionFit:
    return ExpansionFit(
        d=int(data["d"]), j_max=int(data["j_max"]),
        pi={int(k): float(v) for k, v in data["pi"].items()},
        q={int(k): float(v) for k, v in data["q"].items()},
        residual=float(data["residual"]), condition_number=float(data["cond"]),
        x_range=tuple(data.get("x_range", (0.0, 0.0))), n_samples=int(data.get("n_samples", 0)),
    )


@dataclass
class LocalityAudit:
    passed: bool
    delta_pi0: float
    delta_q0: float
    tolerance: float
    base: ExpansionFit
    perturbed: ExpansionFit
    logdetq_change_at_zero: float


def locality_audit(m: float, L: float, potential, x_grid=None, tolerance: float = 1e-4) -> LocalityAudit:
    """Compare interval expansions with and without an interior potential.

    pi_0 and q_0 must agree within ``tolerance``; the change of log det Q at
    z = 0 is reported to show that the potential is felt globally.
    """
    grid = default_grid(1, 40, 1e4, 1e8) if x_grid is None else x_grid
    base_op = DtNOperator("interval", m, L)
    pert_op = DtNOperator("interval", m, L, potential=potential)
    base = fit_expansion(sample_logdetq(base_op, grid), 1)
    pert = fit_expansion(sample_logdetq(pert_op, grid), 1, residual_limit=1e-5)
    dpi = abs(pert.pi[0] - base.pi[0])
    dq = abs(pert.q[0] - base.q[0])
    change = abs(logdet_q(pert_op, 0.0).value - logdet_q(base_op, 0.0).value)
    return LocalityAudit(bool(dpi < tolerance and dq < tolerance), dpi, dq, tolerance, base, pert, float(change))
