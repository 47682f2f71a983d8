"""Exactly solvable model geometries and the special functions they need.

Operators are ``-d^2/dx^2 + m^2 (+ V)`` on an interval, the Laplacian plus
``m^2`` on a circle, and on a disk of radius R. Boundary conditions use the
outward normal derivative, and the Robin family interpolates linearly between
Dirichlet (t=0) and Neumann (t=1): ``(1 - t) u + t du/dn = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import fft, special
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.optimize import brentq

from . import kernels
from .cache import BesselZeroCache
from .errors import BracketFailure, IncompleteEnumeration


# ---------------------------------------------------------------------------
# model types


@dataclass
class Potential:
    """Potential sampled on a uniform grid over [0, length], cubic-interpolated."""

    samples: np.ndarray
    length: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("potential samples must be finite")
        self._spline = CubicSpline(self.grid, self.samples)

    @property
    def grid(self):
        return np.linspace(0.0, self.length, self.samples.size)

    def __call__(self, x):
        return self._spline(x)

    def mean(self) -> float:
        """(1/L) times the integral of V."""
        return float(self._spline.integrate(0.0, self.length) / self.length)

    def cosine_coefficients(self, pmax: int, n_grid: int = 1 << 14) -> np.ndarray:
        """C(p) = (1/L) int_0^L V(x) cos(p pi x / L) dx for p = 0..pmax (trapezoid/DCT-I)."""
        x = np.linspace(0.0, self.length, n_grid + 1)
        y = fft.dct(self(x), type=1)
        return y[: pmax + 1] / (2 * n_grid)

    def supported_inside(self, tol: float = 0.0) -> bool:
        """True if the samples vanish at both ends (support away from the boundary)."""
        return abs(self.samples[0]) <= tol and abs(self.samples[-1]) <= tol


def bump_potential(length: float, height: float, center: float | None = None,
                   halfwidth: float | None = None, n_samples: int = 4001) -> Potential:
    """Smooth compactly supported bump, by default on [L/4, 3L/4]."""
    c = 0.5 * length if center is None else center
    w = 0.25 * length if halfwidth is None else halfwidth
    x = np.linspace(0.0, length, n_samples)
    y = np.zeros_like(x)
    inside = np.abs(x - c) < w
    r = (x[inside] - c) / w
    y[inside] = height * np.exp(1.0 - 1.0 / (1.0 - r * r))
    return Potential(y, length)


@dataclass
class BoundaryCondition:
    """Tagged boundary condition: dirichlet, neumann, robin(t) or transmission(tau)."""

    kind: str
    t: float | None = None
    tau: float | None = None

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann", "robin", "transmission"):
            raise ValueError(f"unknown boundary condition {self.kind!r}")
        if self.kind == "robin":
            if self.t is None or not 0.0 <= self.t <= 1.0:
                raise ValueError("Robin parameter must lie in [0, 1]")

    @property
    def robin_t(self) -> float:
        return {"dirichlet": 0.0, "neumann": 1.0}.get(self.kind, self.t)


DIRICHLET = BoundaryCondition("dirichlet")
NEUMANN = BoundaryCondition("neumann")


def robin(t: float) -> BoundaryCondition:
    return BoundaryCondition("robin", t=t)


def _bc(bc) -> BoundaryCondition:
    if isinstance(bc, BoundaryCondition):
        return bc
    return BoundaryCondition(str(bc).lower())


@dataclass
class IntervalModel:
    length: float = 1.0
    mass: float = 1.0
    potential: Potential | None = None

    def __post_init__(self):
        if self.length <= 0 or self.mass <= 0:
            raise ValueError("interval needs L > 0 and m > 0")
        if self.potential is not None and not math.isclose(self.potential.length, self.length):
            raise ValueError("potential grid does not span the interval")

    def to_dict(self):
        return {"type": "interval", "L": self.length, "m": self.mass,
                "V_samples": None if self.potential is None else self.potential.samples.tolist()}


@dataclass
class CircleModel:
    circumference: float = 2 * np.pi
    mass: float = 1.0

    def __post_init__(self):
        if self.circumference <= 0 or self.mass <= 0:
            raise ValueError("circle needs L > 0 and m > 0")

    def to_dict(self):
        return {"type": "circle", "L": self.circumference, "m": self.mass, "V_samples": None}


@dataclass
class DiskModel:
    radius: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.radius <= 0 or self.mass <= 0:
            raise ValueError("disk needs R > 0 and m > 0")

    def to_dict(self):
        return {"type": "disk", "R": self.radius, "m": self.mass, "V_samples": None}


def model_from_dict(data: dict):
    kind = data["type"]
    if kind == "interval":
        pot = data.get("V_samples")
        pot = None if pot is None else Potential(np.asarray(pot), data["L"])
        return IntervalModel(data["L"], data["m"], pot)
    if kind == "circle":
        return CircleModel(data["L"], data["m"])
    if kind == "disk":
        return DiskModel(data["R"], data["m"])
    raise ValueError(f"unknown model type {kind!r}")


# ---------------------------------------------------------------------------
# interval


def robin_wavenumbers(length: float, t: float, count: int) -> np.ndarray:
    """First ``count`` roots k > 0 of (k^2 - b^2) sin kL - 2 b k cos kL, b = (1-t)/t.

    The j-th root lies in ((j-1) pi/L, j pi/L): at the bracket ends the
    function reduces to +-2 b k with alternating signs.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("use the closed forms at t = 0 and t = 1")
    beta = (1.0 - t) / t

    def f(k):
        # divided by k so that the trivial root at 0 drops out
        return (k * k - beta * beta) * length * np.sinc(k * length / np.pi) - 2.0 * beta * np.cos(k * length)

    out = np.empty(count)
    for j in range(1, count + 1):
        lo, hi = (j - 1) * np.pi / length, j * np.pi / length
        flo, fhi = f(lo), f(hi)
        if flo * fhi > 0:
            raise BracketFailure(f"Robin root {j} not bracketed in ({lo}, {hi})")
        out[j - 1] = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return out


def interval_spectrum(model: IntervalModel, bc, count: int, method: str = "richardson",
                      n_cells: int | None = None) -> np.ndarray:
    """First ``count`` eigenvalues, ascending.

    With V = 0 the values come from closed forms or bracketed root finding.
    With a potential, ``method="richardson"`` uses two finite-difference
    meshes and eliminates the h^2 error term; ``method="galerkin"`` diagonalizes
    the operator in the sine (Dirichlet) or cosine (Neumann) eigenbasis of the
    unperturbed problem.
    """
    bc = _bc(bc)
    if count < 1:
        raise ValueError("count must be >= 1")
    L, m2 = model.length, model.mass**2
    t = bc.robin_t
    if model.potential is None:
        if t == 0.0:
            k = np.arange(1, count + 1) * np.pi / L
        elif t == 1.0:
            k = np.arange(0, count) * np.pi / L
        else:
            k = robin_wavenumbers(L, t, count)
        return m2 + k * k
    if method == "galerkin":
        return _interval_galerkin(model, t, count)
    if method != "richardson":
        raise ValueError(f"unknown method {method!r}")
    n = n_cells or max(4000, 100 * count)
    coarse = _interval_fd(model, t, count, n)
    fine = _interval_fd(model, t, count, 2 * n)
    return (4.0 * fine - coarse) / 3.0


def _interval_fd(model, t, count, n):
    """Vertex-centered second-order differences; Robin ends via ghost points."""
    L, h = model.length, model.length / n
    x = np.linspace(0.0, L, n + 1)
    pot = model.mass**2 + model.potential(x)
    if t == 0.0:
        diag = 2.0 / h**2 + pot[1:-1]
        off = np.full(n - 2, -1.0 / h**2)
    else:
        beta = (1.0 - t) / t
        diag = 2.0 / h**2 + pot
        diag[0] += 2.0 * beta / h
        diag[-1] += 2.0 * beta / h
        off = np.full(n, -1.0 / h**2)
        # ghost rows carry a factor 2 on the inward coupling; symmetrize with
        # trapezoid weights (1/2 at the ends)
        off[0] *= math.sqrt(2.0)
        off[-1] *= math.sqrt(2.0)
    return eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1), eigvals_only=True)


def _interval_galerkin(model, t, count, size=None):
    if t not in (0.0, 1.0):
        raise ValueError("Galerkin route supports Dirichlet and Neumann only")
    L, m2 = model.length, model.mass**2
    size = size or max(2 * count + 200, 400)
    c = model.potential.cosine_coefficients(2 * size + 2)
    if t == 0.0:
        k = np.arange(1, size + 1)
        vmat = c[np.abs(k[:, None] - k[None, :])] - c[k[:, None] + k[None, :]]
    else:
        k = np.arange(0, size)
        vmat = c[np.abs(k[:, None] - k[None, :])] + c[k[:, None] + k[None, :]]
        vmat[0, :] /= math.sqrt(2.0)
        vmat[:, 0] /= math.sqrt(2.0)
    mat = np.diag(m2 + (k * np.pi / L) ** 2) + vmat
    return eigh(mat, eigvals_only=True, subset_by_index=(0, count - 1))


# ---------------------------------------------------------------------------
# circle


def circle_spectrum(model: CircleModel, count: int) -> np.ndarray:
    """First ``count`` eigenvalues of the circle with multiplicity, ascending."""
    kmax = count // 2 + 1
    k = np.arange(0, kmax + 1)
    vals = model.mass**2 + (2 * np.pi * k / model.circumference) ** 2
    out = np.concatenate([vals[:1], np.repeat(vals[1:], 2)])
    return out[:count]


def circle_spectrum_below(model: CircleModel, cutoff: float) -> np.ndarray:
    kmax = int(math.floor(math.sqrt(max(cutoff - model.mass**2, 0.0)) * model.circumference / (2 * np.pi)))
    return circle_spectrum(model, 2 * kmax + 1)


# ---------------------------------------------------------------------------
# Bessel functions


def bessel_i_ratio(n: int, x: float) -> float:
    """I_n'(x)/I_n(x) by backward recurrence on the ratios I_{k+1}/I_k."""
    if x <= 0 or n < 0:
        raise ValueError("need x > 0 and n >= 0")
    return float(kernels.bessel_i_ratio_all(n, x)[n])


def bessel_i_ratios(nmax: int, x: float) -> np.ndarray:
    """I_n'(x)/I_n(x) for n = 0..nmax."""
    if x <= 0 or nmax < 0:
        raise ValueError("need x > 0 and nmax >= 0")
    return kernels.bessel_i_ratio_all(nmax, x)


def _zero_function(n, kind):
    """Return x -> (f(x), f'(x)) for f = J_n or f = J_n'."""
    def both(x):
        jn = special.jv(n, x)
        jd = special.jv(n - 1, x) - n / x * jn
        if kind == "J":
            return jn, jd
        # Bessel equation: J'' = -J'/x - (1 - n^2/x^2) J
        return jd, -jd / x - (1.0 - n * n / (x * x)) * jn
    return both


def _mcmahon(n, k, kind):
    mu = 4.0 * n * n
    if kind == "J":
        b = (k + 0.5 * n - 0.25) * np.pi
        return b - (mu - 1) / (8 * b)
    b = (k + 0.5 * n - 0.75) * np.pi
    return b - (mu + 3) / (8 * b)


def _refine(fn, lo, hi, guess):
    """Vectorized safeguarded Newton iteration inside sign-change brackets.

    Each zero stops updating on its own schedule (one step after its update
    falls below 1e-14 relative), so the result does not depend on which other
    zeros are refined in the same batch.
    """
    lo, hi = lo.copy(), hi.copy()
    flo = fn(lo)[0]
    x = np.where((guess > lo) & (guess < hi), guess, 0.5 * (lo + hi))
    small = np.zeros(x.shape, dtype=bool)
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(100):
        fx, dfx = fn(x)
        left = np.signbit(fx) == np.signbit(flo)
        lo = np.where(left, x, lo)
        flo = np.where(left, fx, flo)
        hi = np.where(left, hi, x)
        xn = x - fx / dfx
        bad = ~np.isfinite(xn) | (xn < lo) | (xn > hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        step_small = np.abs(xn - x) <= 1e-14 * np.abs(x)
        x = np.where(done, x, xn)
        done |= small
        small |= step_small
        if np.all(done):
            break
    return x


def verify_zero_table(n: int, kind: str, zeros, sample: int | None = None, rng=None, dps: int = 25):
    """Re-derive zeros with mpmath root polishing; return the worst relative error.

    ``sample`` picks that many indices at random (all when None). The float
    value only seeds the high-precision secant iteration.
    """
    import mpmath

    zeros = np.asarray(zeros, dtype=float)
    idx = np.arange(zeros.size)
    if sample is not None and sample < zeros.size:
        rng = np.random.default_rng(rng)
        idx = np.sort(rng.choice(zeros.size, size=sample, replace=False))
    worst = 0.0
    with mpmath.workdps(dps):
        f = (lambda x: mpmath.besselj(n, x)) if kind == "J" else (lambda x: mpmath.besselj(n, x, derivative=1))
        for i in idx:
            z = float(mpmath.findroot(f, mpmath.mpf(zeros[i])))
            worst = max(worst, abs(z - zeros[i]) / abs(z))
    return worst


def bessel_zeros_below(n: int, limit: float, kind: str = "J") -> np.ndarray:
    """All positive zeros of J_n (kind "J") or J_n' (kind "Jp") below ``limit``.

    Sign changes are located on a grid of spacing 0.5 starting at x = n (both
    functions have no zeros below n) and refined by safeguarded Newton steps
    from McMahon's asymptotic guess. Consecutive zeros are more than 0.5 apart,
    so each grid cell holds at most one.
    """
    if kind not in ("J", "Jp"):
        raise ValueError("kind must be 'J' or 'Jp'")
    start = max(float(n), 0.25)
    if kind == "Jp" and n == 0:
        start = 1.0  # skip the zero of J_0' at the origin
    if limit <= start:
        return np.empty(0)
    grid = np.arange(start, limit + 0.5, 0.5)
    fn = _zero_function(n, kind)
    vals = fn(grid)[0]
    idx = np.nonzero(np.signbit(vals[:-1]) != np.signbit(vals[1:]))[0]
    if idx.size == 0:
        return np.empty(0)
    lo, hi = grid[idx], grid[idx + 1]
    guess = _mcmahon(n, np.arange(1, idx.size + 1), kind)
    zeros = _refine(fn, lo, hi, guess)
    return zeros[zeros < limit]


def bessel_j_zero(n: int, k: int) -> float:
    """k-th positive zero of J_n."""
    return _kth_zero(n, k, "J")


def bessel_jp_zero(n: int, k: int) -> float:
    """k-th positive zero of J_n' (x = 0 excluded)."""
    return _kth_zero(n, k, "Jp")


def _kth_zero(n, k, kind):
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    limit = max(_mcmahon(n, k, kind), n) + 4.0 + 2 * n ** (1 / 3)
    while True:
        z = bessel_zeros_below(n, limit, kind)
        if z.size >= k:
            return float(z[k - 1])
        limit += np.pi * (k - z.size + 1)


# ---------------------------------------------------------------------------
# disk


def disk_spectrum(model: DiskModel, bc, cutoff: float, cache: BesselZeroCache | None = None,
                  audit: bool = True) -> np.ndarray:
    """All eigenvalues below ``cutoff`` with multiplicity, ascending.

    Dirichlet values are m^2 + (j_{n,k}/R)^2; Neumann values m^2 + (j'_{n,k}/R)^2
    plus the constant mode m^2. Angular index n >= 1 counts twice.
    """
    bc = _bc(bc)
    if bc.kind not in ("dirichlet", "neumann"):
        raise ValueError("disk supports Dirichlet and Neumann only")
    kind = "J" if bc.kind == "dirichlet" else "Jp"
    m2, R = model.mass**2, model.radius
    if cutoff <= m2:
        return np.empty(0)
    limit = R * math.sqrt(cutoff - m2)
    parts = [np.array([m2])] if kind == "Jp" else []
    n = 0
    while n < limit:
        zeros = None if cache is None else cache.get(kind, n, limit)
        if zeros is None:
            zeros = bessel_zeros_below(n, limit, kind)
            if cache is not None:
                cache.put(kind, n, limit, zeros)
        zeros = np.asarray(zeros)
        if zeros.size:
            vals = m2 + (zeros / R) ** 2
            parts.append(vals if n == 0 else np.repeat(vals, 2))
        n += 1
    if cache is not None:
        cache.save()
    lam = np.sort(np.concatenate(parts)) if parts else np.empty(0)
    if audit:
        res = weyl_audit(lam, 2, R * R / 4.0, shift=m2)
        if not res.passed:
            raise IncompleteEnumeration(
                f"Weyl audit failed: leading coefficient {res.coefficient:.5g} vs {res.expected:.5g}")
    return lam


# ---------------------------------------------------------------------------
# oracles


def gelfand_yaglom_det(model: IntervalModel, bc="dirichlet", rtol: float = 1e-12) -> float:
    """Dirichlet determinant 2 a(L) with a'' = (m^2 + V) a, a(0) = 0, a'(0) = 1."""
    if _bc(bc).kind != "dirichlet":
        raise ValueError("Gelfand-Yaglom oracle is normalized for Dirichlet only")
    m, L = model.mass, model.length
    if model.potential is None:
        return 2.0 * math.sinh(m * L) / m
    pot = model.potential

    def rhs(x, y):
        return [y[1], (m * m + pot(x)) * y[0]]

    sol = solve_ivp(rhs, (0.0, L), [0.0, 1.0], method="DOP853", rtol=rtol, atol=1e-14 * rtol)
    return 2.0 * float(sol.y[0, -1])


@dataclass
class WeylAudit:
    passed: bool
    coefficient: float
    expected: float
    deviation: float
    details: dict = field(default_factory=dict)


def weyl_audit(spectrum_list: Sequence[float], d: int, volume: float, shift: float = 0.0,
               tolerance: float = 0.05) -> WeylAudit:
    """Fit N(lam) = a (lam - shift)^{d/2} + b (lam - shift)^{(d-1)/2} over the upper
    three quarters of the enumerated range and compare a with ``volume``.

    ``volume`` is the expected leading coefficient: L/pi for intervals and
    circles, R^2/4 for a disk.
    """
    lam = np.sort(np.asarray(spectrum_list, dtype=float))
    if lam.size < 20:
        return WeylAudit(False, float("nan"), volume, float("inf"), {"reason": "too few eigenvalues"})
    top = lam[-1] - shift
    grid = shift + np.linspace(0.25 * top, top, 60)
    counts = np.searchsorted(lam, grid, side="right")
    x = grid - shift
    design = np.column_stack([x ** (d / 2), x ** ((d - 1) / 2)])
    coef, *_ = np.linalg.lstsq(design, counts, rcond=None)
    dev = abs(coef[0] - volume) / volume
    return WeylAudit(bool(dev < tolerance), float(coef[0]), float(volume), float(dev),
                     {"second": float(coef[1]), "count": int(lam.size)})
