"""Finite-dimensional boundary problems.

A discrete boundary problem stores the interior equations of ``A - z`` as a
rectangular block ``interior_rows - z * interior_selector`` together with two
boundary functionals ``b0`` and ``b1``. Stacking the interior block on top of
the interpolated functional ``(1 - t) b0 + t b1`` gives a square system whose
inverse splits into the resolvent (interior data) and the Poisson operator
(boundary data). Every operator identity of the deformation argument holds
exactly here, so the module doubles as a laboratory for them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
import scipy.linalg as la
from scipy import integrate

from .errors import BranchCutHit, DefectiveReduction, NotSPD, SingularSystem

# reciprocal condition number below which a system counts as singular
RCOND_MIN = 1e3 * np.finfo(float).eps


@dataclass
class DiscreteBoundaryProblem:
    interior_rows: np.ndarray
    interior_selector: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    symmetric_flag: bool = False

    def __post_init__(self):
        self.interior_rows = np.atleast_2d(np.asarray(self.interior_rows))
        self.interior_selector = np.atleast_2d(np.asarray(self.interior_selector, dtype=float))
        self.b0 = np.atleast_2d(np.asarray(self.b0))
        self.b1 = np.atleast_2d(np.asarray(self.b1))
        n = self.interior_rows.shape[1]
        n_i = self.interior_rows.shape[0]
        if self.interior_selector.shape != (n_i, n):
            raise ValueError("interior_selector must match interior_rows in shape")
        if self.b0.shape != self.b1.shape or self.b0.shape[1] != n:
            raise ValueError("b0 and b1 must both have shape (n_bdy, n_total)")
        if n_i + self.b0.shape[0] != n:
            raise ValueError("interior rows plus boundary rows must equal n_total")
        stacked = np.vstack([self.b0, self.b1])
        if np.linalg.matrix_rank(stacked) < stacked.shape[0]:
            raise ValueError("boundary functionals are not complementary: [b0; b1] is rank deficient")

    @property
    def n_total(self) -> int:
        return self.interior_rows.shape[1]

    @property
    def n_bdy(self) -> int:
        return self.b0.shape[0]

    @property
    def n_interior(self) -> int:
        return self.interior_rows.shape[0]

    def boundary_block(self, t: float) -> np.ndarray:
        return (1.0 - t) * self.b0 + t * self.b1

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"n_total": self.n_total, "n_bdy": self.n_bdy}
        for key in ("interior_rows", "interior_selector", "b0", "b1"):
            arr = getattr(self, key)
            out[key] = np.real(arr).tolist()
            if np.iscomplexobj(arr):
                out[key + "_imag"] = np.imag(arr).tolist()
        out["symmetric_flag"] = bool(self.symmetric_flag)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteBoundaryProblem":
        arrays = {}
        for key in ("interior_rows", "interior_selector", "b0", "b1"):
            arr = np.asarray(data[key], dtype=float)
            if key + "_imag" in data:
                arr = arr + 1j * np.asarray(data[key + "_imag"], dtype=float)
            arrays[key] = arr
        problem = cls(symmetric_flag=bool(data.get("symmetric_flag", False)), **arrays)
        if problem.n_total != data["n_total"] or problem.n_bdy != data["n_bdy"]:
            raise ValueError("declared sizes disagree with the stored matrices")
        return problem

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DiscreteBoundaryProblem":
        return cls.from_dict(json.loads(text))


@dataclass
class AssembledSystem:
    t: float
    z: complex
    matrix: np.ndarray
    n_interior: int


@dataclass
class CheckRecord:
    """Machine-readable outcome of one check."""

    name: str
    inputs: dict
    value: float
    tolerance: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "inputs": self.inputs,
            "value": _jsonable(self.value),
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
        }
        if self.extra:
            out["extra"] = {k: _jsonable(v) for k, v in self.extra.items()}
        return out


def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(np.real(v)), float(np.imag(v))]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


# ---------------------------------------------------------------------------
# assembly and solves


def assemble(problem: DiscreteBoundaryProblem, t: float, z: complex) -> AssembledSystem:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"interpolation parameter t={t} outside [0, 1]")
    return AssembledSystem(t, z, _matrix(problem, t, z), problem.n_interior)


def _matrix(problem, t, z):
    top = problem.interior_rows - z * problem.interior_selector
    return np.vstack([top, problem.boundary_block(t)])


def _factor(problem, t, z):
    m = _matrix(problem, t, z)
    # row equilibration: interior rows grow like |z| far out on the cut
    d = 1.0 / np.max(np.abs(m), axis=1)
    ms = d[:, None] * m
    lu, piv = la.lu_factor(ms, check_finite=False)
    anorm = np.linalg.norm(ms, 1)
    if np.iscomplexobj(lu):
        rcond, _ = la.lapack.zgecon(lu, anorm)
    else:
        rcond, _ = la.lapack.dgecon(lu, anorm)
    if not rcond > RCOND_MIN:
        raise SingularSystem(
            f"system (A - z, B_t) singular at t={t}, z={z}: condition ~ {1.0 / max(rcond, 1e-300):.3g}",
            condition=1.0 / max(rcond, 1e-300),
        )
    return m, d, (lu, piv)


def _solve(problem, t, z, rhs):
    m, d, fac = _factor(problem, t, z)
    dr = d[:, None] if np.ndim(rhs) == 2 else d
    u = la.lu_solve(fac, dr * rhs, check_finite=False)
    # one refinement sweep keeps the residual at roundoff level
    u = u + la.lu_solve(fac, dr * (rhs - m @ u), check_finite=False)
    return u


def resolvent_matrix(problem, t, z) -> np.ndarray:
    """R_t(z) as an (n_total, n_interior) matrix."""
    rhs = np.zeros((problem.n_total, problem.n_interior))
    rhs[: problem.n_interior] = np.eye(problem.n_interior)
    return _solve(problem, t, z, rhs)


def poisson_matrix(problem, t, z) -> np.ndarray:
    """P_t(z) as an (n_total, n_bdy) matrix."""
    rhs = np.zeros((problem.n_total, problem.n_bdy))
    rhs[problem.n_interior:] = np.eye(problem.n_bdy)
    return _solve(problem, t, z, rhs)


def resolvent(problem, t, z, f) -> np.ndarray:
    """Solve (A - z) u = f in the interior with B_t u = 0."""
    f = np.asarray(f)
    rhs = np.concatenate([f, np.zeros(problem.n_bdy, dtype=f.dtype)])
    return _solve(problem, t, z, rhs)


def poisson(problem, t, z, g) -> np.ndarray:
    """Solve (A - z) u = 0 in the interior with B_t u = g."""
    g = np.asarray(g)
    rhs = np.concatenate([np.zeros(problem.n_interior, dtype=g.dtype), g])
    return _solve(problem, t, z, rhs)


def q_matrix(problem, z) -> np.ndarray:
    """Boundary correspondence operator Q(z) = b1 P_0(z)."""
    return problem.b1 @ poisson_matrix(problem, 0.0, z)


def logdet_q(problem, z) -> complex:
    """Principal-branch log det Q(z)."""
    sign, logabs = np.linalg.slogdet(q_matrix(problem, z))
    return complex(logabs, np.angle(sign))


# ---------------------------------------------------------------------------
# spectra


def reduced_operator(problem, t) -> np.ndarray:
    """A_t restricted to ker B_t, in an orthonormal basis of that kernel."""
    basis = _kernel_basis(problem, t)
    kn = problem.interior_rows @ basis
    sn = problem.interior_selector @ basis
    lu, piv = la.lu_factor(sn, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < 1e-12 * max(1.0, np.max(np.abs(np.diag(lu)))):
        raise DefectiveReduction("interior selector is singular on ker B_t")
    return la.lu_solve((lu, piv), kn, check_finite=False)


def _kernel_basis(problem, t):
    block = problem.boundary_block(t)
    s = la.svdvals(block)
    if s[-1] <= 1e-12 * s[0]:
        raise DefectiveReduction(f"boundary block B_t is rank deficient at t={t}")
    return la.null_space(block)


def spectrum(problem, t) -> np.ndarray:
    """Values of z where the assembled system is singular (with multiplicity)."""
    basis = _kernel_basis(problem, t)
    kn = problem.interior_rows @ basis
    sn = problem.interior_selector @ basis
    alpha, beta = la.eigvals(kn, sn, homogeneous_eigvals=True)
    if np.any(np.abs(beta) <= 1e-12 * np.abs(alpha)):
        raise DefectiveReduction("reduction has infinite eigenvalues")
    lam = alpha / beta
    if problem.symmetric_flag or np.max(np.abs(lam.imag)) <= 1e-10 * np.max(np.abs(lam)):
        lam = lam.real
        return np.sort(lam)
    return lam[np.lexsort((lam.imag, lam.real))]


def finite_zeta(problem, t, s) -> complex:
    """sum lambda_j^{-s} over spectrum(problem, t), principal branch."""
    lam = np.asarray(spectrum(problem, t), dtype=complex)
    on_cut = (lam.real <= 0) & (np.abs(lam.imag) <= 1e-12 * np.maximum(1.0, np.abs(lam)))
    if np.any(on_cut):
        raise BranchCutHit(f"eigenvalue on the branch cut: {lam[on_cut][0]}")
    return complex(np.sum(lam ** (-s)))


# ---------------------------------------------------------------------------
# identities


def schur_identity_check(problem, z) -> float:
    """Relative defect of det(A - z, B_1) = det(A - z, B_0) det Q(z)."""
    s1, l1 = np.linalg.slogdet(_factor(problem, 1.0, z)[0])
    s0, l0 = np.linalg.slogdet(_factor(problem, 0.0, z)[0])
    sq, lq = np.linalg.slogdet(q_matrix(problem, z))
    ratio = (s0 * sq / s1) * np.exp(l0 + lq - l1)
    return float(abs(1.0 - ratio))


def _fd_order(errors):
    if errors[0] == 0.0 and errors[1] == 0.0:
        return math.inf
    if errors[1] == 0.0:
        return math.inf
    return math.log2(errors[0] / errors[1])


def dt_resolvent_errors(problem, t, z, h):
    bprime = problem.b1 - problem.b0
    exact = -poisson_matrix(problem, t, z) @ bprime @ resolvent_matrix(problem, t, z)
    errs = []
    for step in (h, h / 2):
        fd = (resolvent_matrix(problem, t + step, z) - resolvent_matrix(problem, t - step, z)) / (2 * step)
        errs.append(float(np.linalg.norm(fd - exact, 2)))
    return errs


def dt_resolvent_check(problem, t, z, h=1e-3) -> float:
    """Empirical order of the centered t-difference of R_t(z) against -P_t B' R_t."""
    return _fd_order(dt_resolvent_errors(problem, t, z, h))


def dz_poisson_errors(problem, t, z, h):
    p = poisson_matrix(problem, t, z)
    exact = resolvent_matrix(problem, t, z) @ (problem.interior_selector @ p)
    errs = []
    for step in (h, h / 2):
        fd = (poisson_matrix(problem, t, z + step) - poisson_matrix(problem, t, z - step)) / (2 * step)
        errs.append(float(np.linalg.norm(fd - exact, 2)))
    return errs


def dz_poisson_check(problem, t, z, h=1e-3) -> float:
    """Empirical order of the centered z-difference of P_t(z) against R_t(z) P_t(z)."""
    return _fd_order(dz_poisson_errors(problem, t, z, h))


def matrix_log_spd(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    scale = np.linalg.norm(m, 2)
    if np.linalg.norm(m - m.conj().T, 2) > 1e-10 * max(scale, 1e-300):
        raise NotSPD("matrix is not symmetric")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    if w[0] <= 0:
        raise NotSPD(f"matrix has non-positive eigenvalue {w[0]:.3g}")
    out = (v * np.log(w)) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def t_integral_of_bprime_poisson(problem, z, node_count) -> np.ndarray:
    """Gauss-Legendre approximation of the integral over [0, 1] of B' P_t(z) dt."""
    x, w = np.polynomial.legendre.leggauss(node_count)
    ts = 0.5 * (x + 1.0)
    bprime = problem.b1 - problem.b0
    acc = np.zeros((problem.n_bdy, problem.n_bdy), dtype=np.result_type(problem.b0, complex(z)))
    for t, wt in zip(ts, 0.5 * w):
        acc = acc + wt * (bprime @ poisson_matrix(problem, t, z))
    return acc if np.iscomplexobj(problem.b0) or np.iscomplex(z) else acc.real


def interpolation_integral_check(problem, z, node_count=64) -> float:
    """Relative operator-norm gap between the t-integral of B'P_t(z) and log Q(z)."""
    z = float(np.real(z)) if np.isreal(z) else z
    log_q = matrix_log_spd(q_matrix(problem, z))
    integral = t_integral_of_bprime_poisson(problem, z, node_count)
    ref = np.linalg.norm(log_q, 2)
    gap = np.linalg.norm(integral - log_q, 2)
    return float(gap / ref) if ref > 0 else float(gap)


def scalar_interpolation_integral(lam: float, nodes: int | None = None) -> float:
    """Integral over [0, 1] of (lam - 1)/(1 + t (lam - 1)); equals log(lam) for lam > 0."""
    if lam <= 0:
        raise ValueError("mode value must be positive")

    def f(t):
        return (lam - 1.0) / (1.0 + t * (lam - 1.0))

    if nodes is None:
        val, _ = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
        return val
    x, w = np.polynomial.legendre.leggauss(nodes)
    return float(0.5 * np.sum(w * f(0.5 * (x + 1.0))))


def prop41_check(problem, s, contour=None) -> float:
    """Relative gap between zeta_1(s) - zeta_0(s) and the contour side."""
    from .contour import ContourSpec, discrete_logdetq_growth, prop41_rhs

    lhs = finite_zeta(problem, 1.0, s) - finite_zeta(problem, 0.0, s)
    lam_min = min(np.min(np.abs(spectrum(problem, 0.0))), np.min(np.abs(spectrum(problem, 1.0))))
    if contour is None:
        contour = ContourSpec(epsilon=0.25 * lam_min)
    elif contour.epsilon >= lam_min:
        raise ValueError("small circle must lie inside the spectral gap at the origin")

    def g(z):
        return np.array([logdet_q(problem, zz) for zz in np.atleast_1d(z)])

    growth = discrete_logdetq_growth(g, contour.epsilon)
    rhs = prop41_rhs(s, g, contour, growth=growth, track_branch=True)
    scale = max(abs(lhs), 1e-300)
    return float(abs(lhs - rhs.value) / scale)


def resolvent_pole_profile(problem, t, eigenvalue, distances, direction=1.0) -> np.ndarray:
    """||R_t(z)|| * |z - eigenvalue| for z approaching the eigenvalue along a ray."""
    out = []
    for d in distances:
        z = eigenvalue + d * direction
        out.append(np.linalg.norm(resolvent_matrix(problem, t, z), 2) * abs(d))
    return np.array(out)


# ---------------------------------------------------------------------------
# problem builders


def interval_problem(n_cells: int, m: float = 1.0, length: float = 1.0,
                     potential: Callable | None = None, stencil: str = "two_point") -> DiscreteBoundaryProblem:
    """Three-point discretization of -u'' + (m^2 + V) u on [0, length].

    Nodes are ordered left to right; b0 holds the Dirichlet trace rows and b1
    the outward normal-derivative rows at both endpoints. ``stencil`` selects a
    first-order two-point quotient (symmetric Q) or the second-order
    three-point one-sided quotient.
    """
    n = n_cells + 1
    h = length / n_cells
    x = np.linspace(0.0, length, n)
    pot = m * m + (np.zeros(n) if potential is None else np.asarray(potential(x), dtype=float))
    rows = np.zeros((n - 2, n))
    sel = np.zeros((n - 2, n))
    for i in range(1, n - 1):
        rows[i - 1, i - 1] = -1.0 / h**2
        rows[i - 1, i] = 2.0 / h**2 + pot[i]
        rows[i - 1, i + 1] = -1.0 / h**2
        sel[i - 1, i] = 1.0
    b0 = np.zeros((2, n))
    b0[0, 0] = b0[1, -1] = 1.0
    b1 = np.zeros((2, n))
    if stencil == "two_point":
        b1[0, 0], b1[0, 1] = 1.0 / h, -1.0 / h
        b1[1, -1], b1[1, -2] = 1.0 / h, -1.0 / h
    elif stencil == "three_point":
        b1[0, :3] = np.array([3.0, -4.0, 1.0]) / (2 * h)
        b1[1, -3:] = np.array([1.0, -4.0, 3.0]) / (2 * h)
    else:
        raise ValueError(f"unknown stencil {stencil!r}")
    return DiscreteBoundaryProblem(rows, sel, b0, b1, symmetric_flag=(stencil == "two_point"))


def cut_circle_problem(n_cells: int, m: float = 1.0, length: float = 2 * np.pi,
                       stencil: str = "two_point") -> DiscreteBoundaryProblem:
    """Periodic grid of ``n_cells`` nodes with the cut at node 0.

    b0 is the trace at the cut and b1 the sum of the two outward difference
    quotients there (the derivative jump), so ker b1 glues the two sides back
    together and Q(z) is the 1x1 discrete jump operator.
    """
    if n_cells < 6:
        raise ValueError("need at least 6 cells")
    n = n_cells
    h = length / n_cells
    rows = np.zeros((n - 1, n))
    sel = np.zeros((n - 1, n))
    for i in range(1, n):
        rows[i - 1, (i - 1) % n] += -1.0 / h**2
        rows[i - 1, i] += 2.0 / h**2 + m * m
        rows[i - 1, (i + 1) % n] += -1.0 / h**2
        sel[i - 1, i] = 1.0
    b0 = np.zeros((1, n))
    b0[0, 0] = 1.0
    b1 = np.zeros((1, n))
    if stencil == "two_point":
        b1[0, 0], b1[0, 1], b1[0, n - 1] = 2.0 / h, -1.0 / h, -1.0 / h
    elif stencil == "three_point":
        b1[0, 0] = 3.0 / h
        b1[0, 1] = b1[0, n - 1] = -2.0 / h
        b1[0, 2] = b1[0, n - 2] = 0.5 / h
    else:
        raise ValueError(f"unknown stencil {stencil!r}")
    return DiscreteBoundaryProblem(rows, sel, b0, b1, symmetric_flag=True)


def grid2d_problem(nx: int, ny: int, h: float, potential: np.ndarray | float = 1.0) -> DiscreteBoundaryProblem:
    """Five-point grid on an nx-by-ny node rectangle.

    Edge nodes are the rectangle's boundary nodes minus the corners and their
    immediate neighbours, so every edge node has its own inward neighbour and
    [b0; b1] keeps full rank. Each edge node carries one Dirichlet trace row
    (b0) and one outward difference-quotient row against the inward neighbour
    (b1). Interior stencil entries that would reach a dropped node are omitted,
    which amounts to a zero Dirichlet value there.
    """
    if nx < 5 or ny < 5:
        raise ValueError("grid needs at least 5 nodes per side")
    index = {}
    interior = [(i, j) for i in range(1, nx - 1) for j in range(1, ny - 1)]
    for key in interior:
        index[key] = len(index)
    edge = ([(0, j) for j in range(2, ny - 2)] + [(nx - 1, j) for j in range(2, ny - 2)]
            + [(i, 0) for i in range(2, nx - 2)] + [(i, ny - 1) for i in range(2, nx - 2)])
    for key in edge:
        index[key] = len(index)
    n = len(index)
    pot = np.broadcast_to(np.asarray(potential, dtype=float), (len(interior),))
    rows = np.zeros((len(interior), n))
    sel = np.zeros((len(interior), n))
    for r, (i, j) in enumerate(interior):
        c = index[(i, j)]
        rows[r, c] = 4.0 / h**2 + pot[r]
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nb = index.get((i + di, j + dj))
            if nb is not None:
                rows[r, nb] = -1.0 / h**2
        sel[r, c] = 1.0
    b0 = np.zeros((len(edge), n))
    b1 = np.zeros((len(edge), n))
    for r, (i, j) in enumerate(edge):
        c = index[(i, j)]
        ii = min(max(i, 1), nx - 2)
        jj = min(max(j, 1), ny - 2)
        b0[r, c] = 1.0
        b1[r, c] = 1.0 / h
        b1[r, index[(ii, jj)]] = -1.0 / h
    return DiscreteBoundaryProblem(rows, sel, b0, b1, symmetric_flag=True)


def random_symmetric_problem(seed: int, n_max: int = 200) -> DiscreteBoundaryProblem:
    """Seeded symmetric grid problem with a positive random potential.

    Grid spacings are drawn in [0.05, 0.3] so the difference-quotient rows keep
    Q(z) well scaled regardless of the node count.
    """
    rng = np.random.default_rng(seed)
    if n_max >= 20 and rng.random() < 0.35:
        side_max = int(min(12, math.isqrt(n_max)))
        nx = int(rng.integers(5, side_max + 1))
        ny = int(rng.integers(5, side_max + 1))
        h = float(rng.uniform(0.1, 0.3))
        pot = rng.uniform(0.5, 2.0, size=(nx - 2) * (ny - 2))
        return grid2d_problem(nx, ny, h, pot)
    n_cells = int(rng.integers(6, max(7, n_max)))
    h = float(rng.uniform(0.05, 0.2))
    pot_nodes = rng.uniform(0.5, 2.0, size=n_cells + 1)
    prob = interval_problem(n_cells, m=0.0, length=h * n_cells, potential=lambda x: pot_nodes)
    return prob


def lab_checks(problem: DiscreteBoundaryProblem, z_values: Sequence[float] = (-0.5, -1.0, -5.0),
               s_values: Sequence[float] = (0.5, 1.0, 2.0)) -> list[CheckRecord]:
    """Run every discrete-lab property check on one problem."""
    recs: list[CheckRecord] = []
    for z in z_values:
        err = schur_identity_check(problem, z)
        recs.append(CheckRecord("schur_identity", {"z": z}, err, 1e-10, err < 1e-10))
    if problem.symmetric_flag:
        for z in z_values:
            q = q_matrix(problem, z)
            asym = float(np.linalg.norm(q - q.T, 2) / np.linalg.norm(q, 2))
            wmin = float(np.linalg.eigvalsh(0.5 * (q + q.T))[0])
            recs.append(CheckRecord("q_symmetric", {"z": z}, asym, 1e-12, asym <= 1e-12))
            recs.append(CheckRecord("q_positive", {"z": z}, wmin, 0.0, wmin > 0))
            lq = matrix_log_spd(q)
            ld = np.linalg.slogdet(q)[1]
            gap = abs(np.trace(lq) - ld) / max(1.0, abs(ld))
            recs.append(CheckRecord("trace_log_equals_logdet", {"z": z}, gap, 1e-12, gap < 1e-12))
            err = interpolation_integral_check(problem, z, 64)
            recs.append(CheckRecord("interpolation_integral", {"z": z, "nodes": 64}, err, 1e-8, err < 1e-8))
        for t in (0.0, 1.0):
            lam = spectrum(problem, t)
            recs.append(CheckRecord("spectrum_positive", {"t": t}, float(np.min(lam)), 0.0, bool(np.min(lam) > 0)))
    for t, z in ((0.3, -1.0), (0.5, -2.0)):
        order = dt_resolvent_check(problem, t, z, 1e-3)
        recs.append(CheckRecord("dt_resolvent_order", {"t": t, "z": z, "h": 1e-3}, order, 1.9, order >= 1.9))
        order = dz_poisson_check(problem, t, z, 1e-3)
        recs.append(CheckRecord("dz_poisson_order", {"t": t, "z": z, "h": 1e-3}, order, 1.9, order >= 1.9))
    for s in s_values:
        err = prop41_check(problem, s)
        recs.append(CheckRecord("prop41_finite", {"s": s}, err, 1e-6, err < 1e-6))
    return recs
