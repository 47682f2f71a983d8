"""Contour quadrature for complex powers and zeta differences.

The keyhole contour around the negative real axis is handled in its collapsed
form: a weighted integral along the cut plus a small clockwise circle around
the origin. An explicit two-ray path at offset ``delta`` exists for validation.
Complex powers of finite matrices use a closed contour around the spectrum.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .errors import BranchJump, SpectrumNotEnclosed, TailBoundViolated


@dataclass
class ContourSpec:
    """Geometry and node budget of the keyhole contour.

    ``ray_nodes`` is the number of Gauss nodes per unit panel in the log-radius
    variable ``u = log(r / epsilon)``. ``r_max=None`` picks the truncation
    radius from the growth bound and ``tol``. The small circle is always
    traversed clockwise.
    """

    epsilon: float
    delta: float = 0.0
    r_max: float | None = None
    ray_nodes: int = 12
    circle_nodes: int = 64
    tol: float = 1e-13
    orientation: str = "clockwise"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.delta < 0 or self.delta >= self.epsilon:
            raise ValueError("delta must lie in [0, epsilon)")
        if self.orientation != "clockwise":
            raise ValueError("the small circle is traversed clockwise")

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass
class GrowthModel:
    """|g(-r)| <= C (1 + r)^beta (1 + log(1 + r))^log_power for r >= epsilon."""

    C: float
    beta: float = 0.0
    log_power: int = 1

    def bound(self, r):
        r = np.asarray(r, dtype=float)
        return self.C * (1.0 + r) ** self.beta * (1.0 + np.log1p(r)) ** self.log_power

    def tail(self, s, R):
        """Bound on |s sin(pi s)/pi| * integral_R^inf r^{-Re s - 1} bound(r) dr (R >= 1)."""
        alpha = s.real - self.beta
        if alpha <= 0:
            return math.inf
        pref = abs(s * np.sin(np.pi * s) / np.pi) * self.C * max(1.0, 2.0**self.beta)
        lead = R**-alpha
        if self.log_power == 0:
            return float(pref * lead / alpha)
        if self.log_power != 1:
            raise ValueError("only log_power 0 or 1 is supported")
        a = 1.0 + math.log(2.0)
        return float(pref * lead * (a / alpha + math.log(R) / alpha + 1.0 / alpha**2))


@dataclass
class QuadResult:
    value: complex
    error: float
    nodes: int
    tail_bound: float = 0.0
    r_max: float = 0.0

    def diagnostics(self):
        return {"nodes": self.nodes, "error": self.error, "tail_bound": self.tail_bound, "r_max": self.r_max}


def _as_array_fn(g):
    def call(z):
        out = np.asarray(g(np.asarray(z)))
        if out.shape != np.shape(z):
            out = np.broadcast_to(out, np.shape(z)).copy()
        return out
    return call


def track_branch(values, anchor):
    """Unwrap principal-branch logarithms along an ordered path.

    Each value is shifted by a multiple of 2*pi*i to stay closest to its
    predecessor, starting from ``anchor``. Steps larger than pi/2 after the
    correction mean the nodes are too sparse to follow the branch.
    """
    values = np.asarray(values, dtype=complex)
    out = np.empty_like(values)
    prev = complex(anchor)
    for k, v in enumerate(values):
        shift = np.round((prev.imag - v.imag) / (2 * np.pi))
        w = v + 2j * np.pi * shift
        if abs(w.imag - prev.imag) > np.pi / 2:
            raise BranchJump(f"log det jumps by {w.imag - prev.imag:.3f} rad between adjacent nodes")
        out[k] = w
        prev = w
    return out


def _panels(u_max, width, nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    n_pan = max(1, int(math.ceil(u_max / width)))
    edges = np.linspace(0.0, u_max, n_pan + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return u, wt


def _auto_rmax(s, spec, growth):
    if spec.r_max is not None:
        return float(spec.r_max)
    if growth is None:
        raise ValueError("r_max must be given when no growth model is supplied")
    r = max(10.0 * spec.epsilon, 10.0)
    while growth.tail(s, r) > spec.tol:
        r *= 10.0
        if r > 1e250:
            raise TailBoundViolated("growth model too weak for the requested tolerance at this s")
    return r


def collapsed_ray_integral(s, g: Callable, spec: ContourSpec, growth: GrowthModel | None = None,
                           track: bool = False) -> QuadResult:
    """(s/pi) sin(pi s) * integral over r in [eps, r_max] of r^{-s-1} g(-r) dr.

    The substitution r = eps * exp(u) turns the algebraic decay into an
    exponential one; composite Gauss-Legendre panels of unit width in u are
    compared against panels of double width for the error estimate.
    """
    s = complex(s)
    gf = _as_array_fn(g)
    eps = spec.epsilon
    r_max = _auto_rmax(s, spec, growth)
    u_max = math.log(r_max / eps)

    def integrate(width):
        u, wt = _panels(u_max, width, spec.ray_nodes)
        r = eps * np.exp(u)
        vals = gf(-r)
        if track:
            vals = track_branch(vals, gf(np.array([-eps]))[0])
        if growth is not None:
            bound = growth.bound(r)
            if np.any(np.abs(vals) > bound * (1 + 1e-9)):
                bad = int(np.argmax(np.abs(vals) - bound))
                raise TailBoundViolated(f"|g(-{r[bad]:.3g})| = {abs(vals[bad]):.3g} exceeds growth bound {bound[bad]:.3g}")
        return np.sum(wt * np.exp(-s * u) * vals) * eps**-s, u.size

    fine, n_fine = integrate(1.0)
    coarse, n_coarse = integrate(2.0)
    pref = s / np.pi * np.sin(np.pi * s)
    tail = growth.tail(s, r_max) if growth is not None else 0.0
    err = abs(pref * (fine - coarse)) + tail
    return QuadResult(complex(pref * fine), float(err), n_fine + n_coarse, float(tail), r_max)


def _circle_rule(n, rule):
    if rule == "gauss":
        x, w = np.polynomial.legendre.leggauss(n)
        theta, wt = np.pi * x[::-1], np.pi * w[::-1]
    elif rule == "trapezoid":
        theta = np.pi - 2 * np.pi * (np.arange(n) + 0.5) / n
        wt = np.full(n, 2 * np.pi / n)
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return theta, wt


def small_circle_integral(s, g: Callable, spec: ContourSpec, track: bool = False, rule: str = "gauss") -> QuadResult:
    """(s/2 pi i) times the clockwise integral of z^{-s-1} g(z) over |z| = eps.

    Nodes run clockwise from the upper side of the cut (theta = pi) to the
    lower side (theta = -pi). The integrand is smooth but not periodic in theta
    for non-integer s, so Gauss-Legendre is the default; ``rule="trapezoid"``
    gives the periodic rule, spectrally accurate only for integer s.
    """
    s = complex(s)
    gf = _as_array_fn(g)
    eps = spec.epsilon

    def integrate(n):
        theta, wt = _circle_rule(n, rule)
        z = eps * np.exp(1j * theta)
        vals = gf(z)
        if track:
            anchor = gf(np.array([-eps]))[0]
            vals = track_branch(vals, anchor)
            if abs(vals[-1] - anchor) > np.pi / 2:
                raise BranchJump("log det does not return to its value after encircling the origin")
        # dz = i z dtheta and the path runs from theta=pi down to -pi
        return -(s / (2 * np.pi)) * np.sum(wt * eps**-s * np.exp(-1j * s * theta) * vals)

    n = spec.circle_nodes
    fine = integrate(n)
    coarse = integrate(max(n // 2, 2))
    return QuadResult(complex(fine), float(abs(fine - coarse)), n + max(n // 2, 2))


def explicit_contour_integral(s, g: Callable, spec: ContourSpec, r_max: float) -> QuadResult:
    """(s/2 pi i) * integral of z^{-s-1} g(z) over the two-ray path at offset delta.

    The path comes in along Im z = +delta, follows the circle |z| = eps
    clockwise, and leaves along Im z = -delta. Validation use only.
    """
    s = complex(s)
    gf = _as_array_fn(g)
    d, eps = spec.delta, spec.epsilon
    if d <= 0:
        raise ValueError("explicit path needs delta > 0")
    r0 = math.sqrt(eps * eps - d * d)
    theta0 = math.pi - math.asin(d / eps)
    u, wt = _panels(math.log(r_max / r0), 0.5, 2 * spec.ray_nodes)
    r = r0 * np.exp(u)
    # inward along the upper ray, outward along the lower one; dz = -r du
    z_up, z_dn = -r + 1j * d, -r - 1j * d
    total = np.sum(wt * r * (z_up ** (-s - 1) * gf(z_up) - z_dn ** (-s - 1) * gf(z_dn)))
    x, w = np.polynomial.legendre.leggauss(4 * spec.circle_nodes)
    theta = theta0 * x[::-1]
    z = eps * np.exp(1j * theta)
    arc = -np.sum(theta0 * w * z ** (-s) * 1j * gf(z))
    total += arc
    return QuadResult(complex(s / (2j * np.pi) * total), 0.0, int(2 * u.size + x.size), r_max=r_max)


def prop41_rhs(s, logdetq: Callable, spec: ContourSpec, growth: GrowthModel | None = None,
               track_branch: bool = False) -> QuadResult:
    """Contour side of the zeta-difference formula: ray part plus circle part."""
    ray = collapsed_ray_integral(s, logdetq, spec, growth=growth, track=track_branch)
    circ = small_circle_integral(s, logdetq, spec, track=track_branch)
    return QuadResult(ray.value + circ.value, ray.error + circ.error, ray.nodes + circ.nodes,
                      ray.tail_bound, ray.r_max)


def discrete_logdetq_growth(g: Callable, epsilon: float) -> GrowthModel:
    """Logarithmic growth model sized from samples of g along the cut.

    The constant carries a factor-two margin; the integrator then checks every
    node against the model.
    """
    r = epsilon * np.logspace(0, 40, 41)
    vals = np.abs(np.asarray(g(-r)))
    bound_shape = 1.0 + np.log1p(r)
    return GrowthModel(C=2.0 * float(np.max(vals / bound_shape)) + 1e-300, beta=0.0, log_power=1)


def seeley_power_discrete(problem, t, s, spec: ContourSpec) -> np.ndarray:
    """A_t^{-s} on the reduced space by a closed contour around the spectrum.

    The contour is an ellipse in w = log z spanning [log epsilon, log r_max]
    with imaginary half-width below pi/2, so z^{-s} = exp(-s w) stays on the
    principal branch. The periodic trapezoid rule converges geometrically.
    """
    from .discrete_lab import reduced_operator

    a_red = reduced_operator(problem, t)
    n = a_red.shape[0]
    if s == 0:
        return np.eye(n)
    r_max = spec.r_max
    if r_max is None:
        raise ValueError("seeley_power_discrete needs a finite r_max")
    lam = np.linalg.eigvals(a_red)
    lo, hi = math.log(spec.epsilon), math.log(r_max)
    c, a, b = 0.5 * (lo + hi), 0.5 * (hi - lo), 1.0
    with np.errstate(divide="ignore"):
        w_lam = np.log(lam.astype(complex))
    inside = ((w_lam.real - c) / a) ** 2 + (w_lam.imag / b) ** 2
    if np.any(inside >= 1.0) or np.any(np.abs(lam) == 0):
        raise SpectrumNotEnclosed("spectrum of the reduced operator is not inside the contour")
    m = max(spec.circle_nodes, 16)
    phi = 2 * np.pi * np.arange(m) / m
    w = c + a * np.cos(phi) + 1j * b * np.sin(phi)
    dw = -a * np.sin(phi) + 1j * b * np.cos(phi)
    eye = np.eye(n)
    acc = np.zeros((n, n), dtype=complex)
    for wk, dwk in zip(w, dw):
        zk = np.exp(wk)
        acc += np.exp(-s * wk) * zk * dwk * np.linalg.solve(zk * eye - a_red, eye)
    return acc * (2 * np.pi / m) / (2j * np.pi)
