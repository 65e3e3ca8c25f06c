"""Nodal solutions on deformed annuli Omega_t = {x + t sigma(x) : x in A}, N = 2.

The problem on Omega_t is pulled back to the fixed annulus, where it reads

    int_A (M grad v) . grad phi - det J |v|^(p-1) v phi = 0,
    J = I + t D sigma,  M = det J J^-1 J^-T,

and is discretized on a polar grid through a discrete energy: radial
differences on half-radii, staggered Fourier differentiation in the angle
(exact for every resolvable angular mode, which matters because Morse
indices of nodal solutions involve angular orders well above 10), and
lumped nodal quadrature for the nonlinearity.  Jacobians are therefore
symmetric, and Morse indices are matrix inertias.

Continuation in t starts from the radial profile.  The discrete residual
is defect-corrected by its value at (t = 0, radial profile), so t = 0
reproduces the radial solution exactly and the t-dependence is resolved
to second order in the radial step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, sparse
from scipy.interpolate import CubicSpline
from scipy.sparse import csgraph
from scipy.sparse.linalg import splu

from .errors import (ConvergenceError, DegenerateExponentError,
                     DegenerateLinearizationError, FoldError)
from .radial import RadialProfile

__all__ = [
    "DeformationSpec",
    "PolarGrid",
    "DeformationFields",
    "PerturbedSolution",
    "safety_bound",
    "build_deformation",
    "newton_solve",
    "nodal_count_2d",
    "morse_index_2d",
    "shape_compare",
]

MAX_NEWTON = 25
PIVOT_RATIO = 1e-12
SAFETY_DET = 0.2


@dataclass(frozen=True)
class DeformationSpec:
    """Radial displacement sigma(x) = f(r, theta) x/|x| on the annulus (a, b).

    ``inner`` and ``outer`` list (k, c_k, d_k) triples of the boundary
    trigonometric polynomials sum c_k cos(k theta) + d_k sin(k theta);
    f interpolates them linearly in r.
    """

    a: float
    b: float
    inner: tuple = ()
    outer: tuple = ()

    def __post_init__(self):
        if not 0 < self.a < self.b:
            raise ValueError(f"radii must satisfy 0 < a < b, got a={self.a!r}, b={self.b!r}")
        for name in ("inner", "outer"):
            terms = tuple((int(k), float(c), float(d)) for k, c, d in getattr(self, name))
            for k, c, d in terms:
                if k < 0 or not (math.isfinite(c) and math.isfinite(d)):
                    raise ValueError(f"{name} term {(k, c, d)} must have k >= 0 and finite coefficients")
            object.__setattr__(self, name, terms)

    @classmethod
    def dilation(cls, a, b):
        """sigma(x) = x."""
        return cls(a, b, inner=((0, a, 0.0),), outer=((0, b, 0.0),))

    @classmethod
    def one_mode(cls, a, b, k, amplitude, boundary="outer"):
        terms = ((k, amplitude, 0.0),)
        return cls(a, b, **{boundary: terms})

    def rotated(self, angle):
        """Deformation composed with a rotation by ``angle``."""
        def rot(terms):
            return tuple((k, c * math.cos(k * angle) - d * math.sin(k * angle),
                          c * math.sin(k * angle) + d * math.cos(k * angle)) for k, c, d in terms)
        return DeformationSpec(self.a, self.b, rot(self.inner), rot(self.outer))

    @staticmethod
    def _trig(terms, theta):
        g = np.zeros_like(theta)
        dg = np.zeros_like(theta)
        for k, c, d in terms:
            g += c * np.cos(k * theta) + d * np.sin(k * theta)
            dg += k * (d * np.cos(k * theta) - c * np.sin(k * theta))
        return g, dg

    def radial_field(self, r, theta):
        """f, df/dr and df/dtheta."""
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        g_in, dg_in = self._trig(self.inner, theta)
        g_out, dg_out = self._trig(self.outer, theta)
        w = self.b - self.a
        f = ((self.b - r) * g_in + (r - self.a) * g_out) / w
        f_r = (g_out - g_in) / w
        f_t = ((self.b - r) * dg_in + (r - self.a) * dg_out) / w
        return f, f_r, f_t

    def polar_jacobian(self, r, theta, t):
        """J = I + t D sigma in the (e_r, e_theta) frame: (J_rr, J_rt, J_tt); J_tr = 0."""
        f, f_r, f_t = self.radial_field(r, theta)
        return 1.0 + t * f_r, t * f_t / r, 1.0 + t * f / r


@dataclass(frozen=True)
class PolarGrid:
    """Tensor grid on the annulus; nodes on r = a and r = b are Dirichlet."""

    a: float
    b: float
    n_r: int = 64
    n_theta: int = 64

    def __post_init__(self):
        if self.n_theta < 8 or self.n_theta % 2:
            raise ValueError(f"n_theta must be even and >= 8, got {self.n_theta}")
        if self.n_r < 16:
            raise ValueError(f"n_r must be >= 16, got {self.n_r}")
        if not 0 < self.a < self.b:
            raise ValueError("radii must satisfy 0 < a < b")

    @property
    def radii(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n_r + 1)

    @property
    def angles(self) -> np.ndarray:
        return np.arange(self.n_theta) * (2.0 * np.pi / self.n_theta)

    @property
    def h_r(self) -> float:
        return (self.b - self.a) / self.n_r

    @property
    def h_theta(self) -> float:
        return 2.0 * np.pi / self.n_theta

    @property
    def dirichlet(self) -> np.ndarray:
        mask = np.zeros((self.n_r + 1, self.n_theta), dtype=bool)
        mask[0] = mask[-1] = True
        return mask

    @property
    def n_unknowns(self) -> int:
        return (self.n_r - 1) * self.n_theta


@dataclass(frozen=True, eq=False)
class DeformationFields:
    """Nodal fields of the map x -> x + t sigma(x), arrays shaped (n_r+1, n_theta, ...)."""

    t: float
    sigma: np.ndarray
    dsigma: np.ndarray
    jacobian: np.ndarray
    det: np.ndarray
    coefficient: np.ndarray


@dataclass(frozen=True, eq=False)
class PerturbedSolution:
    """Pullback v of a nodal solution on Omega_t, sampled on a polar grid.

    ``shape`` is v / S with S the sup norm of the radial profile the
    continuation started from; ``log_scale`` = log S.
    """

    grid: PolarGrid
    deformation: DeformationSpec
    t: float
    p: float
    m: int
    shape: np.ndarray
    log_scale: float
    jacobian: np.ndarray
    det_j: np.ndarray
    residual_norm: float
    newton_iterations: list
    residual_history: list = field(default_factory=list)
    safety: float = float("inf")
    _operator: object = field(default=None, repr=False)

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return math.exp(self.log_scale) * self.shape if self.log_scale < 700 else np.inf * self.shape

    @property
    def sup_norm(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_scale) * np.max(np.abs(self.shape)))

    def flipped(self) -> "PerturbedSolution":
        """The solution -v (also a solution, same nodal structure and Morse index)."""
        return _replace(self, shape=-self.shape)


def _replace(sol, **changes):
    from dataclasses import replace
    return replace(sol, **changes)


# -- deformation --------------------------------------------------------------

def safety_bound(deformation: DeformationSpec, probe: int = 256, det_min: float = SAFETY_DET) -> float:
    """Largest |t| with det J >= det_min on a fine probe grid.

    det J = (1 + t f_r)(1 + t f/r) is a quadratic in t equal to 1 at t = 0;
    the bound is the first root of det J = det_min over both signs of t.
    """
    r = np.linspace(deformation.a, deformation.b, probe + 1)
    theta = np.linspace(0.0, 2.0 * np.pi, 4 * probe, endpoint=False)
    R, T = np.meshgrid(r, theta, indexing="ij")
    f, f_r, _ = deformation.radial_field(R, T)
    alpha = f_r.ravel()
    beta = (f / R).ravel()
    best = np.inf
    for sgn in (1.0, -1.0):
        qa, qb, qc = alpha * beta, sgn * (alpha + beta), 1.0 - det_min
        roots = []
        lin = np.abs(qa) < 1e-300
        with np.errstate(divide="ignore", invalid="ignore"):
            r_lin = np.where(lin & (qb < 0), -qc / qb, np.inf)
            disc = qb * qb - 4 * qa * qc
            sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
            r1 = (-qb - sq) / (2 * qa)
            r2 = (-qb + sq) / (2 * qa)
        for cand in (r_lin, np.where(lin, np.inf, r1), np.where(lin, np.inf, r2)):
            cand = np.where(np.isfinite(cand) & (cand > 0), cand, np.inf)
            roots.append(cand)
        best = min(best, float(np.min(np.minimum.reduce(roots))))
    return best


def _polar_coefficients(deformation, r, theta, t):
    """det J and P = det J J^-1 J^-T in the (e_r, e_theta) frame."""
    jrr, jrt, jtt = deformation.polar_jacobian(r, theta, t)
    det = jrr * jtt
    # J^-1 = [[1/jrr, -jrt/(jrr jtt)], [0, 1/jtt]]
    i00, i01, i11 = 1.0 / jrr, -jrt / det, 1.0 / jtt
    p_rr = det * (i00 * i00 + i01 * i01)
    p_rt = det * (i01 * i11)
    p_tt = det * (i11 * i11)
    return det, p_rr, p_rt, p_tt


def build_deformation(deformation: DeformationSpec, grid: PolarGrid, t: float,
                      safety: float | None = None) -> DeformationFields:
    """sigma, D sigma, J, det J and M = det J J^-1 J^-T at the grid nodes (Cartesian).

    Raises
    ------
    ValueError
        |t| exceeds the safety bound.
    FoldError
        det J <= 0 at some node.
    """
    bound = safety_bound(deformation) if safety is None else safety
    if abs(t) > bound:
        raise ValueError(f"|t| = {abs(t):g} exceeds the safety bound {bound:g} for this deformation")
    R, T = np.meshgrid(grid.radii, grid.angles, indexing="ij")
    f, f_r, f_t = deformation.radial_field(R, T)
    c, s = np.cos(T), np.sin(T)
    rot = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    zero = np.zeros_like(R)
    ds_polar = np.stack([np.stack([f_r, f_t / R], -1), np.stack([zero, f / R], -1)], -2)
    dsigma = rot @ ds_polar @ np.swapaxes(rot, -1, -2)
    sigma = np.stack([f * c, f * s], -1)
    eye = np.eye(2)
    jac = eye + t * dsigma
    det = np.linalg.det(jac)
    if np.any(det <= 0):
        raise FoldError(f"det J <= 0 at {int(np.sum(det <= 0))} nodes: t = {t:g} folds the annulus")
    inv = np.linalg.inv(jac)
    coef = det[..., None, None] * inv @ np.swapaxes(inv, -1, -2)
    return DeformationFields(t=t, sigma=sigma, dsigma=dsigma, jacobian=jac, det=det, coefficient=coef)


# -- discrete operator ----------------------------------------------------------

def _stagger_derivative(n):
    """Trigonometric-interpolant derivative from nodes theta_k to theta_{k+1/2}."""
    k = np.arange(n)
    d = k[:, None] - k[None, :]
    x = (d + 0.5) * (2.0 * np.pi / n)
    return -((-1.0) ** d) / (2.0 * n * np.sin(0.5 * x) ** 2)


class _Operator:
    """Quadratic part K (sparse, interior unknowns) and lumped mass for fixed (grid, sigma, t)."""

    def __init__(self, grid: PolarGrid, deformation: DeformationSpec, t: float):
        nr, nt = grid.n_r, grid.n_theta
        hr, ht = grid.h_r, grid.h_theta
        radii, angles = grid.radii, grid.angles
        r_half = 0.5 * (radii[:-1] + radii[1:])
        a_half = angles + 0.5 * ht
        n_nodes = (nr + 1) * nt

        eye_t = sparse.identity(nt, format="csr")
        # radial difference: nodes -> (r_{i+1/2}, theta_k)
        d1 = sparse.diags([-np.ones(nr), np.ones(nr)], [0, 1], shape=(nr, nr + 1)) / hr
        Dr = sparse.kron(d1, eye_t, format="csr")
        # angular staggered derivative: nodes -> (r_i, theta_{k+1/2})
        Dt = sparse.kron(sparse.identity(nr + 1), sparse.csr_matrix(_stagger_derivative(nt)), format="csr")
        # averages onto cell centres (r_{i+1/2}, theta_{k+1/2})
        avg_r = sparse.kron(sparse.diags([0.5 * np.ones(nr), 0.5 * np.ones(nr)], [0, 1], shape=(nr, nr + 1)),
                            eye_t, format="csr")
        shift = sparse.csr_matrix((0.5 * np.ones(2 * nt),
                                   (np.r_[np.arange(nt), np.arange(nt)],
                                    np.r_[np.arange(nt), (np.arange(nt) + 1) % nt])), shape=(nt, nt))
        avg_t = sparse.kron(sparse.identity(nr), shift, format="csr")

        Rh, Tn = np.meshgrid(r_half, angles, indexing="ij")
        Rn, Th = np.meshgrid(radii, a_half, indexing="ij")
        Rc, Tc = np.meshgrid(r_half, a_half, indexing="ij")
        _, p_rr, _, _ = _polar_coefficients(deformation, Rh, Tn, t)
        _, _, _, p_tt = _polar_coefficients(deformation, Rn, Th, t)
        _, _, p_rt, _ = _polar_coefficients(deformation, Rc, Tc, t)
        w_rr = sparse.diags((hr * ht * Rh * p_rr).ravel())
        w_tt = sparse.diags((hr * ht * p_tt / Rn).ravel())
        w_rt = sparse.diags((hr * ht * p_rt).ravel())
        cross = avg_t @ Dr
        tang = avg_r @ Dt
        K = Dr.T @ w_rr @ Dr + Dt.T @ w_tt @ Dt + cross.T @ w_rt @ tang + tang.T @ w_rt @ cross

        interior = np.arange(nt, n_nodes - nt)
        self.K = sparse.csc_matrix(K[interior][:, interior])
        self.K = 0.5 * (self.K + self.K.T)
        Rn2, Tn2 = np.meshgrid(radii[1:-1], angles, indexing="ij")
        det, *_ = _polar_coefficients(deformation, Rn2, Tn2, t)
        self.mass = (hr * ht * Rn2).ravel()
        self.det = det.ravel()
        self.shape = (nr - 1, nt)


def _residual(op, v, coef, p, defect):
    return op.K @ v - coef * op.mass * op.det * np.abs(v) ** (p - 1.0) * v - defect


def _jacobian(op, v, coef, p):
    return (op.K - sparse.diags(coef * p * op.mass * op.det * np.abs(v) ** (p - 1.0))).tocsc()


def newton_solve(radial: RadialProfile, deformation: DeformationSpec, grid: PolarGrid,
                 t_target: float, steps: int = 5, known_degeneracies=(),
                 tol: float = 1e-8, max_iter: int = MAX_NEWTON,
                 safety: float | None = None) -> PerturbedSolution:
    """Continue the radial solution to Omega_t by Newton's method in t.

    ``steps`` equal increments of t; full Newton steps with up to four
    residual-halving backtracks.  Converged when the mass-normalized
    residual is at most tol (1 + sup|v|^p).

    Raises
    ------
    ValueError
        N != 2, p within 1e-4 of a known degeneracy exponent, or |t| above
        the safety bound.
    ConvergenceError
        Newton needs more than ``max_iter`` iterations at a step.
    DegenerateExponentError
        The Newton matrix is numerically singular.
    """
    if radial.spec.N != 2:
        raise ValueError("deformed-domain solves are implemented for N = 2 only")
    if (grid.a, grid.b) != (radial.spec.a, radial.spec.b) or \
            (deformation.a, deformation.b) != (radial.spec.a, radial.spec.b):
        raise ValueError("grid, deformation and radial profile must share the annulus")
    for pk in known_degeneracies:
        if abs(radial.p - pk) < 1e-4:
            raise ValueError(f"p = {radial.p} is within 1e-4 of the degeneracy exponent {pk}")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    bound = safety_bound(deformation) if safety is None else safety
    if abs(t_target) > bound:
        raise ValueError(f"|t| = {abs(t_target):g} exceeds the safety bound {bound:g}")

    p = radial.p
    log_s = radial.log_sup_norm
    coef = radial.supnorm_pow(p - 1.0)
    radii = grid.radii
    v0 = np.repeat(radial.shape_at(radii[1:-1]), grid.n_theta)
    op0 = _Operator(grid, deformation, 0.0)
    defect = _residual(op0, v0, coef, p, 0.0)

    def converged(res, v):
        scale = math.exp(-log_s) if log_s > -700 else np.inf
        return res <= tol * (scale + coef * np.max(np.abs(v)) ** p)

    v = v0.copy()
    iterations, history = [], []
    op = op0
    res_norm = 0.0
    if t_target != 0.0:
        for s in range(1, steps + 1):
            t = t_target * s / steps
            op = _Operator(grid, deformation, t)
            g = _residual(op, v, coef, p, defect)
            res_norm = float(np.max(np.abs(g / op.mass)))
            trace = [res_norm]
            it = 0
            while not converged(res_norm, v):
                if it >= max_iter:
                    raise ConvergenceError(f"Newton exceeded {max_iter} iterations at t = {t:g}")
                lu = splu(_jacobian(op, v, coef, p))
                udiag = np.abs(lu.U.diagonal())
                if udiag.min() < PIVOT_RATIO * udiag.max():
                    raise DegenerateExponentError(
                        f"Newton matrix nearly singular at t = {t:g} (pivot ratio {udiag.min() / udiag.max():.2e})")
                delta = lu.solve(-g)
                lam = 1.0
                for _ in range(5):
                    trial = v + lam * delta
                    g_trial = _residual(op, trial, coef, p, defect)
                    r_trial = float(np.max(np.abs(g_trial / op.mass)))
                    if r_trial < res_norm:
                        break
                    lam *= 0.5
                v, g, res_norm = trial, g_trial, r_trial
                trace.append(res_norm)
                it += 1
            iterations.append(it)
            history.append(trace)
    R, T = np.meshgrid(radii, grid.angles, indexing="ij")
    jrr, jrt, jtt = deformation.polar_jacobian(R, T, t_target)
    fields = build_deformation(deformation, grid, t_target, safety=bound)
    shape = np.zeros((grid.n_r + 1, grid.n_theta))
    shape[1:-1] = v.reshape(op.shape)
    return PerturbedSolution(
        grid=grid, deformation=deformation, t=float(t_target), p=p, m=radial.m,
        shape=shape, log_scale=log_s, jacobian=fields.jacobian, det_j=jrr * jtt,
        residual_norm=res_norm, newton_iterations=iterations, residual_history=history,
        safety=bound, _operator=(op, coef))


def nodal_count_2d(solution: PerturbedSolution, threshold: float = 1e-10) -> int:
    """Connected components of {v > 0} and {v < 0} on the grid graph.

    4-neighbour connectivity, periodic in theta; nodes with |v| below
    threshold * sup|v| are ignored.
    """
    v = solution.shape
    nr1, nt = v.shape
    sign = np.sign(v) * (np.abs(v) >= threshold * np.max(np.abs(v)))
    idx = np.arange(v.size).reshape(v.shape)
    rows, cols = [], []
    same_r = (sign[:-1] == sign[1:]) & (sign[:-1] != 0)
    rows.append(idx[:-1][same_r])
    cols.append(idx[1:][same_r])
    nxt = np.roll(idx, -1, axis=1)
    same_t = (sign == np.roll(sign, -1, axis=1)) & (sign != 0)
    rows.append(idx[same_t])
    cols.append(nxt[same_t])
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    graph = sparse.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(v.size, v.size))
    _, labels = csgraph.connected_components(graph, directed=False)
    active = sign.ravel() != 0
    return int(np.unique(labels[active]).size)


def _inertia(matrix):
    """(negative, zero, positive) counts of a dense symmetric matrix via Bunch-Kaufman LDL^T."""
    _, d, _ = linalg.ldl(matrix, lower=True, hermitian=True)
    n = d.shape[0]
    neg = zero = pos = 0
    i = 0
    while i < n:
        if i + 1 < n and d[i + 1, i] != 0.0:
            ev = np.linalg.eigvalsh(d[i:i + 2, i:i + 2])
            for e in ev:
                neg += e < 0
                pos += e > 0
                zero += e == 0
            i += 2
        else:
            neg += d[i, i] < 0
            pos += d[i, i] > 0
            zero += d[i, i] == 0
            i += 1
    return int(neg), int(zero), int(pos)


def morse_index_2d(solution: PerturbedSolution, shift: float = 0.0) -> int:
    """Negative eigenvalue count of the discrete second variation at ``solution``.

    The quadratic form int (M grad phi) . grad phi - p det J |v|^(p-1) phi^2
    is assembled on the interior nodes and its inertia is read off an LDL^T
    factorization; the lumped mass is positive, so this is also the count
    for the weighted eigenproblem.  ``shift`` adds shift * (mass * det J)
    to the form.

    Raises
    ------
    DegenerateLinearizationError
        An exactly zero pivot (the solution sits at a degeneracy).
    """
    op, coef = solution._operator
    v = solution.shape[1:-1].ravel()
    jac = _jacobian(op, v, coef, solution.p)
    if shift:
        jac = jac + sparse.diags(shift * op.mass * op.det)
    neg, zero, _ = _inertia(jac.toarray())
    if zero:
        raise DegenerateLinearizationError("zero pivot in the LDL^T factorization")
    return neg


def shape_compare(solution: PerturbedSolution, reference) -> float:
    """Sup distance between v / max|v| and a radial reference on the grid.

    ``reference`` is a RadialProfile or a LaplaceEigenpair; it is sampled
    at the grid radii and normalized by its own grid maximum.  The sign of
    v is resolved by the slope convention at r = a (mean over the first
    ring), so the result is invariant under v -> -v.
    """
    radii = solution.grid.radii
    if isinstance(reference, RadialProfile):
        ref = reference.shape_at(radii)
    else:
        ref = CubicSpline(reference.radii, reference.psi)(radii)
    ref = ref / np.max(np.abs(ref))
    v = solution.shape / np.max(np.abs(solution.shape))
    if np.mean(v[1]) * ref[1] < 0:
        v = -v
    return float(np.max(np.abs(v - ref[:, None])))
