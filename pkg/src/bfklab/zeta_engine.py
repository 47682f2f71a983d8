"""Spectral zeta functions and zeta-regularized determinants.

For an enumerated spectrum the zeta function is continued by splitting the
Mellin integral of the heat trace at ``T``. On ``(0, T]`` the trace minus a
fitted small-time ladder ``sum c_a t^a`` is integrated numerically and the
ladder itself in closed form; on ``[T, inf)`` each eigenvalue contributes an
upper incomplete gamma function. The ladder is fitted to the enumerated trace
on ``[t_min, T]``, where ``t_min = 40 / cutoff`` keeps the missing part of the
spectrum below ``exp(-40)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import special

from . import kernels
from .errors import IllConditionedFit, InsufficientSpectrum, PoleHit

TRUNCATION_EXPONENT = 40.0


@dataclass
class HeatFit:
    exponents: np.ndarray
    coefficients: np.ndarray
    residual: float
    t_min: float
    t_max: float
    condition_number: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return (t[..., None] ** self.exponents) @ self.coefficients

    def pairs(self):
        return list(zip(self.exponents.tolist(), self.coefficients.tolist()))

    def coefficient(self, exponent):
        idx = np.nonzero(np.isclose(self.exponents, exponent))[0]
        return float(self.coefficients[idx[0]]) if idx.size else 0.0


@dataclass
class SpectrumSource:
    """Ascending eigenvalues with multiplicity, complete below ``cutoff``.

    ``cutoff=None`` marks a finite spectrum given in full; its zeta function is
    the plain finite sum. ``t_split`` is the Mellin split point T; it must be
    small enough that the heat trace has no exponentially small corrections
    beyond the power ladder on ``(0, T]`` (e.g. T = L^2/40 on an interval).
    """

    eigenvalues: np.ndarray
    dimension: int = 1
    order: int = 2
    cutoff: float | None = None
    t_split: float | None = None
    n_terms: int | None = None
    heat_coefficients: HeatFit | None = None
    label: str = ""

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.size == 0:
            raise InsufficientSpectrum("empty spectrum")
        if np.any(np.diff(lam) < 0):
            lam = np.sort(lam)
        if lam[0] <= 0:
            raise ValueError("eigenvalues must be positive")
        self.eigenvalues = lam
        if self.cutoff is not None and self.t_split is None:
            raise ValueError("an infinite spectrum needs a Mellin split point t_split")

    @classmethod
    def from_enumerator(cls, enumerator: Callable[[int], float], count: int, **kw):
        return cls(np.array([enumerator(i) for i in range(count)]), **kw)

    @property
    def finite(self) -> bool:
        return self.cutoff is None

    @property
    def t_min(self) -> float:
        return TRUNCATION_EXPONENT / self.cutoff

    def default_terms(self) -> int:
        return self.n_terms or (self.dimension + 8)

    def heat_trace(self, t):
        return kernels.heat_trace(self.eigenvalues, t)


@dataclass
class ZetaValue:
    value: complex
    error: float


@dataclass
class ZetaResult:
    zeta_prime_zero: float
    determinant: float
    error_estimate: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def log_determinant(self) -> float:
        return -self.zeta_prime_zero

    def to_dict(self):
        return {
            "zeta_prime_zero": self.zeta_prime_zero,
            "determinant": self.determinant,
            "error_estimate": self.error_estimate,
            "diagnostics": self.diagnostics,
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def _result(zp, err, diag):
    return ZetaResult(float(zp), float(math.exp(-zp)), float(err), diag)


# ---------------------------------------------------------------------------
# heat trace fit


def heat_fit(source, d: int | None = None, omega: int = 2, n_terms: int | None = None,
             t_min: float | None = None, t_max: float | None = None, n_grid: int = 240) -> HeatFit:
    """Least-squares fit of the heat trace against t^{(k-d)/omega}, k < n_terms.

    The fit minimizes relative deviations on a geometric grid in [t_min, t_max].
    The reported residual is the largest absolute deviation divided by the
    trace at t_min.
    """
    if not isinstance(source, SpectrumSource):
        raise TypeError("heat_fit expects a SpectrumSource")
    d = source.dimension if d is None else d
    n_terms = n_terms or source.default_terms()
    t_min = t_min or source.t_min
    t_max = t_max or source.t_split
    if not t_min < t_max:
        raise IllConditionedFit(f"fit window [{t_min:.3g}, {t_max:.3g}] is empty; raise the cutoff")
    exps = (np.arange(n_terms) - d) / omega
    ts = np.geomspace(t_min, t_max, n_grid)
    theta = source.heat_trace(ts)
    design = ts[:, None] ** exps[None, :] / theta[:, None]
    scale = np.max(np.abs(design), axis=0)
    design = design / scale
    coef, _, rank, sv = np.linalg.lstsq(design, np.ones_like(ts), rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if rank < n_terms or cond > 1e13:
        raise IllConditionedFit(f"heat-trace ladder design has condition {cond:.3g}")
    coef = coef / scale
    fit = (ts[:, None] ** exps[None, :]) @ coef
    residual = float(np.max(np.abs(fit - theta)) / theta[0])
    out = HeatFit(exps, coef, residual, t_min, t_max, cond)
    if residual > 1e-6:
        raise IllConditionedFit(f"heat-trace fit residual {residual:.3g} exceeds 1e-6")
    return out


# ---------------------------------------------------------------------------
# zeta function


def _upper_gamma(s: float, x: np.ndarray) -> np.ndarray:
    """Gamma(s, x) for real s and x > 0, by upward recurrence when s <= 0."""
    x = np.asarray(x, dtype=float)
    if s > 0:
        return special.gammaincc(s, x) * special.gamma(s)
    k = int(math.floor(-s)) + 1
    a = s + k
    if abs(a - round(a)) < 1e-15 and round(a) == 1 and abs(s - round(s)) < 1e-15:
        # s is a non-positive integer: start from E1 = Gamma(0, x)
        g = special.exp1(x)
        a, k = 0.0, k - 1
    else:
        g = special.gammaincc(a, x) * special.gamma(a)
    # Gamma(a - 1, x) = (Gamma(a, x) - x^(a-1) e^-x) / (a - 1)
    for _ in range(k):
        g = (g - x ** (a - 1) * np.exp(-x)) / (a - 1)
        a -= 1
    return g


def _gamma_tail(s, lam, T):
    """sum over lam of lam^{-s} Gamma(s, lam T)."""
    x = lam * T
    keep = x < 745.0
    lam, x = lam[keep], x[keep]
    if np.isreal(s):
        s = float(np.real(s))
        return float(np.sum(lam ** (-s) * _upper_gamma(s, x)))
    total = mpmath.mpf(0)
    for lv, xv in zip(lam, x):
        total += mpmath.power(lv, -s) * mpmath.gammainc(s, xv)
    return complex(total)


def _log_quadrature(t_min, t_max, nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    a, b = math.log(t_min), math.log(t_max)
    u = 0.5 * (b - a) * x + 0.5 * (b + a)
    return np.exp(u), 0.5 * (b - a) * w


def _mellin_pieces(source, fit, s, nodes):
    T = fit.t_max
    t, w = _log_quadrature(fit.t_min, T, nodes)
    diff = source.heat_trace(t) - fit(t)
    integral = np.sum(w * t**s * diff)
    return integral, _gamma_tail(s, source.eigenvalues, T)


def zeta(source: SpectrumSource, s, n_terms: int | None = None, nodes: int = 200) -> ZetaValue:
    """Analytically continued zeta function at s."""
    if source.finite:
        lam = source.eigenvalues.astype(complex) if not np.isreal(s) else source.eigenvalues
        return ZetaValue(complex(np.sum(lam ** (-s))), 0.0)
    vals = [_zeta_continued(source, s, n, nodes) for n in _term_variants(source, n_terms)]
    return ZetaValue(vals[0], float(max(abs(v - vals[0]) for v in vals[1:])))


def _term_variants(source, n_terms):
    n = n_terms or source.default_terms()
    return (n, n + 1, n - 1)


def _zeta_continued(source, s, n_terms, nodes, t_split=None):
    fit = heat_fit(source, n_terms=n_terms, t_max=t_split)
    T = fit.t_max
    integral, tail = _mellin_pieces(source, fit, s, nodes)
    s_c = complex(s)
    ladder = 0.0 + 0.0j
    singular = None
    for a, c in zip(fit.exponents, fit.coefficients):
        if abs(s_c + a) < 1e-12:
            singular = (a, c)
            continue
        ladder += c * T ** (s_c + a) / (s_c + a)
    rg = complex(special.rgamma(s_c)) if not np.isreal(s) else float(special.rgamma(float(np.real(s))))
    regular = rg * (integral + ladder + tail)
    if singular is None:
        return complex(regular)
    a, c = singular
    n = -s_c.real
    if abs(s_c.imag) < 1e-15 and abs(n - round(n)) < 1e-12 and round(n) >= 0:
        # 1/Gamma has a zero here: the limit of rgamma(s) c/(s + a) is c (-1)^n n!
        n = int(round(n))
        return complex(regular + c * (-1) ** n * math.factorial(n))
    raise PoleHit(f"s = {s} is a pole from the heat-trace exponent {a}",
                  regular_part=complex(regular + rg * c * math.log(T)))


# ---------------------------------------------------------------------------
# determinants


def _zeta_prime_continued(source, n_terms, nodes, t_split=None):
    fit = heat_fit(source, n_terms=n_terms, t_max=t_split)
    T = fit.t_max
    integral, tail = _mellin_pieces(source, fit, 0.0, nodes)
    # d/ds at s=0 of rgamma(s) F(s) equals F's finite part: rgamma(s) = s + gamma s^2 + ...
    total = integral + tail
    for a, c in zip(fit.exponents, fit.coefficients):
        if abs(a) < 1e-12:
            total += c * (np.euler_gamma + math.log(T))
        else:
            total += c * T**a / a
    return float(total), fit


def zeta_prime_zero(source: SpectrumSource, n_terms: int | None = None, nodes: int = 200) -> ZetaResult:
    """zeta'(0) and det = exp(-zeta'(0)).

    The error estimate is the largest change under the variants: ladder length
    +-1, Mellin split halved, quadrature nodes doubled.
    """
    if source.finite:
        zp = -kernels.compensated_sum(np.log(source.eigenvalues))
        return _result(zp, 0.0, {"finite": True, "count": int(source.eigenvalues.size)})
    n = n_terms or source.default_terms()
    base, fit = _zeta_prime_continued(source, n, nodes)
    variants = {
        "terms+1": _zeta_prime_continued(source, n + 1, nodes)[0],
        "terms-1": _zeta_prime_continued(source, n - 1, nodes)[0],
        "split/2": _zeta_prime_continued(source, n, nodes, t_split=0.5 * source.t_split)[0],
        "nodes*2": _zeta_prime_continued(source, n, 2 * nodes)[0],
    }
    err = max(abs(v - base) for v in variants.values())
    err = max(err, 1e-14 * abs(base))
    diag = {
        "t_split": fit.t_max,
        "t_min": fit.t_min,
        "n_terms": n,
        "fit_residual": fit.residual,
        "fit_condition": fit.condition_number,
        "heat_coefficients": fit.pairs(),
        "count": int(source.eigenvalues.size),
        "cutoff": source.cutoff,
        "variants": variants,
    }
    return _result(base, err, diag)


def zeta_prime_zero_perturbed(reference: ZetaResult, base_low: np.ndarray, perturbed_low: np.ndarray,
                              base_tail: np.ndarray, shift: float, tail_remainder: float = 0.0,
                              low_error: float = 0.0) -> ZetaResult:
    """zeta'(0) of a bounded perturbation of a reference operator.

    The zeta-regularized determinant ratio equals the convergent product of
    eigenvalue ratios. The first K ratios use the supplied perturbed and
    reference eigenvalues; beyond K each reference eigenvalue is shifted by the
    mean of the perturbation, which is its large-index limit. ``base_tail``
    holds reference eigenvalues K+1, K+2, ... and ``tail_remainder`` the sum of
    1/lambda over the reference eigenvalues past the end of ``base_tail``.
    """
    base_low = np.asarray(base_low, dtype=float)
    perturbed_low = np.asarray(perturbed_low, dtype=float)
    if base_low.shape != perturbed_low.shape:
        raise ValueError("reference and perturbed eigenvalue lists differ in length")
    log_ratio_low = kernels.compensated_sum(np.log(perturbed_low / base_low))
    log_ratio_tail = kernels.compensated_sum(np.log1p(shift / np.asarray(base_tail, dtype=float)))
    log_ratio_tail += shift * tail_remainder
    zp = reference.zeta_prime_zero - log_ratio_low - log_ratio_tail
    err = reference.error_estimate + low_error + abs(shift) ** 2 * tail_remainder / max(base_tail[-1], 1.0)
    diag = dict(reference.diagnostics)
    diag.update({"reference_zeta_prime_zero": reference.zeta_prime_zero, "low_count": int(base_low.size),
                 "log_ratio_low": log_ratio_low, "log_ratio_tail": log_ratio_tail, "shift": shift})
    return _result(zp, err, diag)


def union(*sources: SpectrumSource) -> SpectrumSource:
    """Disjoint union of spectra (finite sources only, or matching cutoffs)."""
    cut = [s.cutoff for s in sources]
    if any(c is None for c in cut) and not all(c is None for c in cut):
        raise ValueError("cannot mix finite and infinite spectra")
    lam = np.sort(np.concatenate([s.eigenvalues for s in sources]))
    if cut[0] is None:
        return SpectrumSource(lam, dimension=sources[0].dimension)
    return SpectrumSource(lam, dimension=sources[0].dimension, cutoff=min(cut),
                          t_split=min(s.t_split for s in sources), n_terms=sources[0].n_terms)


def direct_zeta(eigenvalues: Sequence[float], s) -> complex:
    """Plain sum of lambda^{-s} (for Re s beyond the convergence abscissa)."""
    lam = np.asarray(eigenvalues, dtype=float)
    return complex(np.sum(lam.astype(complex) ** (-s))) if not np.isreal(s) else float(np.sum(lam ** (-float(np.real(s)))))
