"""Dirichlet-to-Neumann type operators Q(z) of the model geometries.

All normal derivatives point outward, which makes Q(z) positive on the
negative real axis. ``mu = sqrt(m^2 - z)`` uses the principal branch.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .errors import EigenvalueHit, TailModelMismatch
from .model_geometries import IntervalModel, Potential, bessel_i_ratios


def _mu(z, m):
    w = m * m - z
    if isinstance(w, complex) or np.iscomplexobj(w) or w < 0:
        return np.sqrt(complex(w))
    return math.sqrt(w)


# ---------------------------------------------------------------------------
# interval and cut circle


def dtn_interval(z, m: float, L: float) -> np.ndarray:
    """(mu / sinh mu L) [[cosh mu L, -1], [-1, cosh mu L]]."""
    mu = _mu(z, m)
    if abs(np.real(mu) * L) > 30:
        # coth and 1/sinh without overflow; no eigenvalues this far off the spectrum
        e = np.exp(-2 * mu * L)
        coth = (1 + e) / (1 - e)
        csch = 2 * np.exp(-mu * L) / (1 - e)
        return mu * np.array([[coth, -csch], [-csch, coth]])
    sh = np.sinh(mu * L)
    if abs(sh) < 1e-13 * max(1.0, abs(np.cosh(mu * L))):
        raise EigenvalueHit(f"z = {z} is a Dirichlet eigenvalue of the interval")
    return (mu / sh) * np.array([[np.cosh(mu * L), -1.0], [-1.0, np.cosh(mu * L)]])


def dtn_cut_circle(z, m: float, L: float):
    """2 mu tanh(mu L / 2): total outward flux response to a common boundary value."""
    mu = _mu(z, m)
    return 2.0 * mu * np.tanh(0.5 * mu * L)


def cut_circle_transmission_matrix(z, m: float, L: float) -> np.ndarray:
    """Transmission rows applied to the interval Poisson operator.

    Rows: trace jump u(0) - u(L) and summed outward normal derivatives.
    Columns: Dirichlet data at the two ends. Its determinant equals
    dtn_cut_circle(z).
    """
    q = dtn_interval(z, m, L)
    return np.vstack([[1.0, -1.0], q.sum(axis=0)])


def _interval_ode(z, model: IntervalModel, rtol=1e-11):
    """Boundary values (a(L), a'(L), b(L), b'(L)) of the fundamental solutions."""
    m, L, pot = model.mass, model.length, model.potential

    def rhs(x, y):
        q = m * m - z + (pot(x) if pot is not None else 0.0)
        return [y[1], q * y[0], y[3], q * y[2]]

    sol = solve_ivp(rhs, (0.0, L), [0.0, 1.0, 1.0, 0.0], method="DOP853", rtol=rtol, atol=1e-14)
    return sol.y[:, -1]


def dtn_interval_potential(z, model: IntervalModel) -> np.ndarray:
    """Q(z) = (1/a(L)) [[b(L), -1], [-1, a'(L)]] from initial-value solutions.

    a(0) = 0, a'(0) = 1 and b(0) = 1, b'(0) = 0 solve u'' = (m^2 + V - z) u.
    """
    a, ap, b, bp = _interval_ode(z, model)
    if abs(a) < 1e-13 * max(abs(ap), 1.0):
        raise EigenvalueHit(f"z = {z} is a Dirichlet eigenvalue of the interval")
    return np.array([[b, -1.0], [-1.0, ap]]) / a


def _support(pot: Potential, L: float):
    nz = np.nonzero(pot.samples)[0]
    if nz.size == 0:
        return None
    h = L / (pot.samples.size - 1)
    return max(0.0, (nz[0] - 1) * h), min(L, (nz[-1] + 1) * h)


def logdet_q_interval_potential(z: float, model: IntervalModel, rtol: float = 1e-11) -> float:
    """log det Q(z) = log b'(L) - log a(L) without exponential overflow.

    With sigma = b'/b and rho = a/a' (both Riccati equations stay bounded)
    log det Q = log sigma(L) - log rho(L) + integral of (sigma - q rho).
    Where V vanishes the three quantities propagate in closed form, so the
    ODE solver only runs across the support of the potential.
    """
    m, L, pot = model.mass, model.length, model.potential
    if z >= m * m:
        raise ValueError("Riccati form requires z < m^2")
    mu = math.sqrt(m * m - z)
    if pot is None:
        return math.log(mu * mu)
    supp = _support(pot, L)
    if supp is None:
        return math.log(mu * mu)
    x1, x2 = supp

    def free(state, length):
        sig, rho, dacc = state
        th = math.tanh(mu * length)
        sig_n = mu * (sig + mu * th) / (mu + sig * th)
        rho_n = (rho + th / mu) / (1.0 + mu * rho * th)
        dacc += math.log((1.0 + sig / mu * th) / (1.0 + mu * rho * th))
        return [sig_n, rho_n, dacc]

    state = free([0.0, 0.0, 0.0], x1)

    def rhs(x, y):
        q = mu * mu + pot(x)
        return [q - y[0] ** 2, 1.0 - q * y[1] ** 2, y[0] - q * y[1]]

    if x2 > x1:
        sol = solve_ivp(rhs, (x1, x2), state, method="DOP853", rtol=rtol, atol=1e-14)
        state = list(sol.y[:, -1])
    sig, rho, dacc = free(state, L - x2)
    return math.log(sig) - math.log(rho) + dacc


# ---------------------------------------------------------------------------
# disk


def dtn_disk_mode(n: int, z, m: float, R: float) -> float:
    """mu I_n'(mu R) / I_n(mu R)."""
    mu = _mu(z, m)
    if isinstance(mu, complex):
        raise ValueError("disk modes are evaluated for z < m^2")
    return float(mu * bessel_i_ratios(abs(int(n)), mu * R)[abs(int(n))])


def disk_modes(nmax: int, z, m: float, R: float) -> np.ndarray:
    mu = _mu(z, m)
    return mu * bessel_i_ratios(nmax, mu * R)


def _debye_log_ratio(n, nu):
    """log of R lambda_n / sqrt(n^2 + nu^2) from the uniform expansion (3 terms)."""
    n = np.asarray(n, dtype=float)
    p = n / np.sqrt(n * n + nu * nu)
    p2 = p * p
    u1 = p * (3 - 5 * p2) / 24
    u2 = p2 * (81 - 462 * p2 + 385 * p2 * p2) / 1152
    u3 = p**3 * (30375 - 369603 * p2 + 765765 * p2**2 - 425425 * p2**3) / 414720
    v1 = p * (-9 + 7 * p2) / 24
    v2 = p2 * (-135 + 594 * p2 - 455 * p2 * p2) / 1152
    v3 = p**3 * (-42525 + 451737 * p2 - 883575 * p2**2 + 475475 * p2**3) / 414720
    inv = 1.0 / n
    num = 1 + inv * (v1 + inv * (v2 + inv * v3))
    den = 1 + inv * (u1 + inv * (u2 + inv * u3))
    return np.log(num / den)


@dataclass
class RegularizedLogDet:
    value: float
    mode_cutoff: int
    tail_model: dict = field(default_factory=dict)
    error_estimate: float = 0.0


def _disk_sum(nu, n_exact, n_far, tail_nodes=64):
    """sum over n in Z of log(R lambda_n / sqrt(n^2 + nu^2)) with its pieces."""
    ratios = bessel_i_ratios(n_exact, nu)
    n = np.arange(n_exact + 1, dtype=float)
    delta = np.log(nu * ratios / np.sqrt(n * n + nu * nu))
    exact = delta[0] + 2.0 * kernels.compensated_sum(delta[1:])
    mid_n = np.arange(n_exact + 1, n_far + 1, dtype=float)
    mid = 2.0 * kernels.compensated_sum(_debye_log_ratio(mid_n, nu)) if mid_n.size else 0.0
    # sum over n > n_far ~ integral from n_far minus half the endpoint value
    x, w = np.polynomial.legendre.leggauss(tail_nodes)
    u = 0.5 * (x + 1.0)
    nn = n_far / u
    integral = np.sum(0.5 * w * _debye_log_ratio(nn, nu) * n_far / u**2)
    far = 2.0 * (integral - 0.5 * float(_debye_log_ratio(n_far, nu)))
    return exact, mid, far, delta


def _tail_audit(delta, nu, n_exact):
    """Remainder of exact modes after the Debye subtraction must decay.

    The uniform expansion is truncated after n^-3, so the remainder is
    O((n^2 + nu^2)^-2). Scaled by (n^2 + nu^2)^{3/2} it must not grow across
    the upper half of the exact range.
    """
    n = np.arange(max(8, n_exact // 4), n_exact + 1)
    rem = np.abs(delta[n] - _debye_log_ratio(n, nu))
    rho = np.sqrt(n * n + nu * nu)
    noise = 1e-14 * (1.0 + np.abs(delta[n])) * rho**3
    scaled = rem * rho**3
    half = n.size // 2
    lower, upper = np.max(scaled[:half] + noise[:half]), np.max(scaled[half:])
    growth = float(upper / lower) if lower > 0 else 0.0
    return {"scaled_growth": growth, "passed": bool(upper <= 2.0 * lower)}


def disk_logdet_q(z: float, m: float, R: float, n_exact: int = 200, n_far: int | None = None,
                  check: bool = True) -> RegularizedLogDet:
    """Zeta-regularized log det Q(z) for the disk.

    Each mode is written as sqrt(n^2 + nu^2)/R times a factor exp(delta_n)
    with delta_n = O(n^-3) (nu = mu R). The regularized determinant of the
    operator with modes sqrt(n^2 + nu^2)/R is 2 sinh(pi nu) (a circle
    determinant; its zeta function vanishes at 0, so R drops out), and the
    delta_n sum converges. Modes n <= n_exact are exact, then the three-term
    uniform expansion, then an integral tail.
    """
    if z >= m * m:
        raise ValueError("disk log det Q needs z < m^2")
    nu = R * math.sqrt(m * m - z)
    n_far = n_far or int(max(20000, 20 * nu))

    def total(ne):
        exact, mid, far, delta = _disk_sum(nu, ne, max(n_far, 2 * ne))
        base = math.pi * nu + math.log1p(-math.exp(-2 * math.pi * nu)) if nu > 0 else -math.inf
        return base + exact + mid + far, delta, (exact, mid, far)

    value, delta, parts = total(n_exact)
    value2, _, _ = total(2 * n_exact)
    audit = _tail_audit(delta, nu, n_exact)
    if check and not audit["passed"]:
        raise TailModelMismatch(
            f"mode remainder times (n^2+nu^2)^1.5 grows by {audit['scaled_growth']:.3g} over the exact range")
    err = abs(value2 - value) + 1e-15 * abs(value)
    tail = {"expansion": "uniform Debye, 3 terms", "n_far": n_far, "nu": nu,
            "exact_part": parts[0], "debye_part": parts[1], "integral_tail": parts[2],
            "remainder_growth": audit["scaled_growth"]}
    return RegularizedLogDet(float(value2), n_exact, tail, float(err))


def disk_logdet_q_derivative(z: float, m: float, R: float, n_exact: int = 200) -> float:
    """d/dz of disk_logdet_q, differentiating mode by mode.

    Exact modes use the Riccati identity for r = I_n'/I_n; the Debye and
    integral tails, which are tiny, are differentiated by central differences
    in nu.
    """
    nu = R * math.sqrt(m * m - z)
    n = np.arange(n_exact + 1, dtype=float)
    r = bessel_i_ratios(n_exact, nu)
    rp = 1.0 + n * n / nu**2 - r / nu - r * r
    ddelta = 1.0 / nu + rp / r - nu / (n * n + nu * nu)
    d_exact = ddelta[0] + 2.0 * kernels.compensated_sum(ddelta[1:])
    n_far = int(max(20000, 20 * nu))
    h = 1e-4 * nu

    def tails(x):
        _, mid, far, _ = _disk_sum(x, n_exact, n_far)
        return mid + far

    d_tail = (tails(nu + h) - tails(nu - h)) / (2 * h)
    d_base = math.pi / math.tanh(math.pi * nu)
    dnu_dz = -R * R / (2.0 * nu)
    return float((d_base + d_exact + d_tail) * dnu_dz)


def disk_scalar_mode_check(z: float, m: float, R: float, nmax: int = 200) -> float:
    """Largest |integral_0^1 (lam-1)/(1+t(lam-1)) dt - log lam| over disk modes |n| <= nmax.

    Each mode is an eigenvalue of Q(z), so this is the one-dimensional form of
    the interpolation identity for log Q.
    """
    from .discrete_lab import scalar_interpolation_integral

    lam = disk_modes(nmax, z, m, R)
    return float(max(abs(scalar_interpolation_integral(float(v)) - math.log(v)) for v in lam))


# ---------------------------------------------------------------------------
# common interface


@dataclass
class DtNOperator:
    """Q(z) of one model geometry.

    ``geometry`` is one of "interval", "cut_circle", "disk"; ``size`` is L for
    the first two and R for the disk. ``degenerate=True`` models the family
    with B1 = B0, whose Q is the identity.
    """

    geometry: str
    m: float
    size: float
    potential: Potential | None = None
    degenerate: bool = False
    n_exact: int = 200

    def __post_init__(self):
        if self.geometry not in ("interval", "cut_circle", "disk"):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.potential is not None and self.geometry != "interval":
            raise ValueError("potentials are supported on the interval only")

    @property
    def dimension(self) -> int:
        return 2 if self.geometry == "disk" else 1

    def matrix(self, z) -> np.ndarray:
        """Dense Q(z) for interval (2x2) and cut circle (1x1)."""
        if self.geometry == "disk":
            raise ValueError("the disk operator is a mode family; use modes()")
        if self.degenerate:
            return np.eye(2 if self.geometry == "interval" else 1)
        if self.geometry == "interval":
            if self.potential is None:
                return dtn_interval(z, self.m, self.size)
            return dtn_interval_potential(z, IntervalModel(self.size, self.m, self.potential))
        return np.array([[dtn_cut_circle(z, self.m, self.size)]])

    def modes(self, nmax: int, z) -> np.ndarray:
        if self.geometry != "disk":
            raise ValueError("modes() applies to the disk")
        if self.degenerate:
            return np.ones(nmax + 1)
        return disk_modes(nmax, z, self.m, self.size)

    def to_dict(self):
        return {"geometry": self.geometry, "m": self.m, "size": self.size,
                "degenerate": self.degenerate,
                "V_samples": None if self.potential is None else self.potential.samples.tolist()}


def logdet_q(dtn: DtNOperator, z) -> RegularizedLogDet:
    """log det Q(z): plain for the small matrices, zeta-regularized for the disk."""
    if dtn.degenerate:
        return RegularizedLogDet(0.0, 0, {}, 0.0)
    if dtn.geometry == "disk":
        return disk_logdet_q(z, dtn.m, dtn.size, n_exact=dtn.n_exact)
    if dtn.geometry == "interval":
        if dtn.potential is None:
            val = math.log(dtn.m**2 - z) if np.isreal(z) and z < dtn.m**2 else complex(np.log(complex(dtn.m**2 - z)))
            return RegularizedLogDet(val, 0, {}, 1e-16 * abs(val))
        val = logdet_q_interval_potential(float(z), IntervalModel(dtn.size, dtn.m, dtn.potential))
        return RegularizedLogDet(val, 0, {"method": "riccati"}, 1e-10 * max(1.0, abs(val)))
    mu = math.sqrt(dtn.m**2 - z)
    x = 0.5 * mu * dtn.size
    # log tanh x = -2x... computed as log1p(-e^{-2x}) - log1p(e^{-2x})
    val = math.log(2.0 * mu) + math.log1p(-math.exp(-2 * x)) - math.log1p(math.exp(-2 * x))
    return RegularizedLogDet(val, 0, {}, 1e-15 * max(1.0, abs(val)))


@dataclass
class AuditResult:
    passed: bool
    min_eigenvalue: float
    max_asymmetry: float
    points: int


def positivity_selfadjointness_audit(dtn: DtNOperator, z_grid: Iterable[float], nmax: int = 200) -> AuditResult:
    """Symmetry (matrix cases) and positivity of Q(z) over z in the grid (all z <= 0)."""
    zs = [float(z) for z in z_grid]
    if any(z > 0 for z in zs):
        raise ValueError("audit grid must lie on the non-positive real axis")
    min_eig, max_asym = math.inf, 0.0
    for z in zs:
        if dtn.geometry == "disk":
            vals = dtn.modes(nmax, z)
            min_eig = min(min_eig, float(np.min(vals)))
            continue
        q = dtn.matrix(z)
        norm = np.linalg.norm(q, 2)
        max_asym = max(max_asym, float(np.linalg.norm(q - q.T, 2) / norm))
        min_eig = min(min_eig, float(np.min(np.linalg.eigvalsh(0.5 * (q + q.T)))))
    passed = min_eig > 0 and max_asym <= 1e-12
    return AuditResult(bool(passed), float(min_eig), float(max_asym), len(zs))


# ---------------------------------------------------------------------------
# dtn-scan tables


def dtn_scan(dtn: DtNOperator, x_grid: Iterable[float]) -> list[tuple[float, float, float]]:
    """Rows (x, log det Q(x), error estimate), x < 0 sorted descending."""
    xs = sorted((float(x) for x in x_grid), reverse=True)
    if any(x >= 0 for x in xs):
        raise ValueError("scan points must be negative")
    rows = []
    for x in xs:
        r = logdet_q(dtn, x)
        rows.append((x, float(np.real(r.value)), float(r.error_estimate)))
    return rows


def write_dtn_scan(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "logdetq", "err"])
        for x, v, e in rows:
            w.writerow([f"{x:.15g}", f"{v:.15g}", f"{e:.15g}"])


def read_dtn_scan(path) -> list[tuple[float, float, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["x", "logdetq", "err"]:
            raise ValueError(f"{path}: expected header x,logdetq,err")
        return [(float(a), float(b), float(c)) for a, b, c in reader]
