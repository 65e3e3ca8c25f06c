"""Radial nodal solutions of -Δv = |v|^(p-1) v on an annulus.

Everything is computed in unit-slope form: w solves

    w'' + (N-1)/r w' + mu |w|^(p-1) w = 0,    w(a) = 0,  w'(a) = 1,

and the solution with initial slope alpha is v = alpha * w, alpha**(p-1) = mu.
Shooting on mu rather than alpha keeps all quantities finite as p -> 1,
where sup|v| behaves like lambda_m**(1/(p-1)) and overflows double
precision.  Profiles therefore store the normalized shape v / sup|v| and
the logarithm of sup|v|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import optimize
from scipy.integrate import simpson
from scipy.interpolate import BPoly, CubicHermiteSpline

from . import _kernels
from .errors import BlowUpError, BracketError, ConvergenceError, InvalidPlacementError

__all__ = [
    "AnnulusSpec",
    "Trajectory",
    "RadialProfile",
    "NodalZoneReport",
    "NehariResult",
    "integrate_radial_ivp",
    "shoot_nodal",
    "nehari_minimize",
    "nehari_report",
    "ode_residual",
]

DEFAULT_POINTS = 2049
RTOL = 1e-11
ATOL = 1e-13
MAX_STEPS = 5_000_000
MU_RANGE = (1e-8, 1e40)
ZERO_TOL = 1e-12
BOUNDARY_TOL = 1e-8


@dataclass(frozen=True)
class AnnulusSpec:
    """Annulus {a < |x| < b} in R^N."""

    a: float
    b: float
    N: int = 2

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not 0 < self.a < self.b:
            raise ValueError(f"radii must satisfy 0 < a < b, got a={self.a!r}, b={self.b!r}")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"dimension N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def width(self) -> float:
        return self.b - self.a

    def grid(self, n_points: int = DEFAULT_POINTS) -> np.ndarray:
        return np.linspace(self.a, self.b, n_points)

    def scaled(self, factor: float) -> "AnnulusSpec":
        return AnnulusSpec(self.a * factor, self.b * factor, self.N)


def check_exponent(p: float) -> float:
    if not math.isfinite(p) or p <= 1.0:
        raise ValueError(f"exponent p must satisfy p > 1, got p={p!r}")
    return float(p)


def check_zones(m: int) -> int:
    if int(m) != m or m < 1:
        raise ValueError(f"zone count m must be an integer >= 1, got m={m!r}")
    return int(m)


@dataclass(frozen=True)
class Trajectory:
    """Solution of the initial value problem v(a) = 0, v'(a) = alpha."""

    grid: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    zeros: np.ndarray
    alpha: float


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Sampled radial solution with m nodal zones and v'(a) > 0.

    ``shape`` and ``shape_slopes`` hold v / sup|v| and v' / sup|v|;
    ``log_sup_norm`` is log(sup|v|).  The physical ``values``/``slopes``
    are derived and overflow to inf for p very close to 1.
    """

    spec: AnnulusSpec
    p: float
    m: int
    grid: np.ndarray
    shape: np.ndarray
    shape_slopes: np.ndarray
    log_sup_norm: float
    zeros: np.ndarray
    log_alpha: float
    boundary_residual: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def sup_norm(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_sup_norm))

    @property
    def alpha_star(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_alpha))

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return self.sup_norm * self.shape

    @property
    def slopes(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return self.sup_norm * self.shape_slopes

    def supnorm_pow(self, q: float) -> float:
        """sup|v| ** q, computed from the stored logarithm."""
        with np.errstate(over="ignore"):
            return float(np.exp(q * self.log_sup_norm))

    def shape_curvature(self, r=None, shape=None, slopes=None) -> np.ndarray:
        """(v / sup|v|)'' recovered from the ODE."""
        if r is None:
            r, shape, slopes = self.grid, self.shape, self.shape_slopes
        coef = self.supnorm_pow(self.p - 1.0)
        return -(self.spec.N - 1) / r * slopes - coef * np.abs(shape) ** (self.p - 1.0) * shape

    @cached_property
    def _shape_spline(self):
        return CubicHermiteSpline(self.grid, self.shape, self.shape_slopes)

    @cached_property
    def _slope_spline(self):
        return CubicHermiteSpline(self.grid, self.shape_slopes, self.shape_curvature())

    def shape_at(self, r) -> np.ndarray:
        """v / sup|v| at arbitrary radii (cubic Hermite through values and slopes)."""
        return self._shape_spline(np.asarray(r, dtype=float))

    def shape_slope_at(self, r) -> np.ndarray:
        return self._slope_spline(np.asarray(r, dtype=float))

    def potential(self, r=None) -> np.ndarray:
        """|v|^(p-1) at the grid (or at the radii r)."""
        shape = self.shape if r is None else self.shape_at(r)
        return self.supnorm_pow(self.p - 1.0) * np.abs(shape) ** (self.p - 1.0)

    def resampled(self, n_points: int) -> "RadialProfile":
        """The same solution on a different uniform grid."""
        grid = self.spec.grid(n_points)
        return RadialProfile(
            spec=self.spec, p=self.p, m=self.m, grid=grid,
            shape=self.shape_at(grid), shape_slopes=self.shape_slope_at(grid),
            log_sup_norm=self.log_sup_norm, zeros=self.zeros, log_alpha=self.log_alpha,
            boundary_residual=self.boundary_residual, meta=dict(self.meta))


@dataclass(frozen=True)
class NodalZoneReport:
    """Per-zone Nehari diagnostics; arrays are indexed by zone."""

    intervals: np.ndarray
    gradient: np.ndarray
    power: np.ndarray
    energy: np.ndarray
    nehari_residual: np.ndarray
    flagged: tuple
    tolerance: float

    @property
    def total_energy(self) -> float:
        return float(np.sum(self.energy))


@dataclass(frozen=True)
class NehariResult:
    """Outcome of the nested Nehari minimization."""

    profile: RadialProfile
    placement: np.ndarray
    zone_energies: np.ndarray
    value: float
    sweeps: int
    slope_mismatch: float


# -- integration helpers ----------------------------------------------------

def _unit_solve(a, N, p, mu, r_out, rtol=RTOL, w0=0.0, z0=1.0):
    w, z, changes, status, r_last = _kernels.integrate_radial(
        float(a), float(w0), float(z0), np.ascontiguousarray(r_out, dtype=float),
        float(N - 1), float(p), float(mu), float(rtol), ATOL * abs(z0 if z0 else 1.0), MAX_STEPS)
    if status == _kernels.STATUS_NONFINITE:
        raise BlowUpError(r_last)
    if status == _kernels.STATUS_MAXSTEPS:
        raise ConvergenceError(f"integrator exceeded {MAX_STEPS} steps at r = {r_last:.17g}")
    return w, z, changes


def _refine_zeros(grid, w, z, N, p, mu, rtol=RTOL, tol=ZERO_TOL):
    """Interior zeros of w from sign changes on the grid, refined by bisection."""
    zeros = []
    n = grid.size
    for i in range(1, n - 1):
        if w[i] == 0.0:
            zeros.append(grid[i])
    s = np.sign(w[1:n - 1])
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0] + 1
    for i in idx:
        lo, hi = grid[i], grid[i + 1]
        w_lo, z_lo = w[i], z[i]
        sign_lo = np.sign(w_lo)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            wm, zm, _ = _unit_solve(lo, N, p, mu, np.array([mid]), rtol, w_lo, z_lo)
            if np.sign(wm[0]) == sign_lo:
                lo, w_lo, z_lo = mid, wm[0], zm[0]
            else:
                hi = mid
        zeros.append(0.5 * (lo + hi))
    return np.array(sorted(zeros))


def integrate_radial_ivp(spec: AnnulusSpec, p: float, alpha: float,
                         n_points: int = DEFAULT_POINTS, rtol: float = RTOL) -> Trajectory:
    """Solve v'' + (N-1)/r v' + |v|^(p-1) v = 0 with v(a) = 0, v'(a) = alpha."""
    p = check_exponent(p)
    if alpha == 0 or not math.isfinite(alpha):
        raise ValueError("initial slope alpha must be finite and nonzero (alpha = 0 gives v = 0)")
    mu = abs(alpha) ** (p - 1.0)
    grid = spec.grid(n_points)
    w, z, _ = _unit_solve(spec.a, spec.N, p, mu, grid, rtol)
    zeros = _refine_zeros(grid, w, z, spec.N, p, mu, rtol)
    return Trajectory(grid=grid, values=alpha * w, slopes=alpha * z, zeros=zeros, alpha=float(alpha))


def _end_state(a, b, N, p, log_mu, rtol):
    w, z, changes = _unit_solve(a, N, p, math.exp(log_mu), np.array([b]), rtol)
    return changes, w[0], z[0]


def _shoot_unit(a, b, N, p, m, mu_range=MU_RANGE, rtol=RTOL):
    """log(mu) of the unit-slope trajectory with m-1 interior zeros and w(b) = 0.

    Returns (log_mu, w'(b)).
    """
    x_min, x_max = math.log(mu_range[0]), math.log(mu_range[1])
    step = math.log(4.0)
    x0 = min(max(2.0 * math.log(m * math.pi / (b - a)), x_min), x_max)

    def count(x):
        return _end_state(a, b, N, p, x, rtol)[0]

    c0 = count(x0)
    if c0 >= m:
        hi, c_hi = x0, c0
        lo, c_lo = x0, c0
        while c_lo >= m:
            hi, c_hi = lo, c_lo
            if lo <= x_min:
                raise BracketError(f"no slope with fewer than {m} zeros above mu={mu_range[0]:g}")
            lo = max(lo - step, x_min)
            c_lo = count(lo)
    else:
        lo, c_lo = x0, c0
        hi, c_hi = x0, c0
        while c_hi < m:
            lo, c_lo = hi, c_hi
            if hi >= x_max:
                raise BracketError(f"no slope with {m} zeros below mu={mu_range[1]:g}")
            hi = min(hi + step, x_max)
            c_hi = count(hi)

    for _ in range(300):
        if c_lo == m - 1 and c_hi == m:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            raise ConvergenceError(f"zero count jumps past {m - 1} -> {m}; bracket collapsed")
        c = count(mid)
        if c >= m:
            hi, c_hi = mid, c
        else:
            lo, c_lo = mid, c
    else:
        raise ConvergenceError("zero-count bisection did not isolate the nodal bracket")

    def end_value(x):
        return _end_state(a, b, N, p, x, rtol)[1]

    x_star = optimize.brentq(end_value, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=300)
    _, _, zb = _end_state(a, b, N, p, x_star, rtol)
    return x_star, zb


def _make_profile(spec, p, m, grid, shape_raw, slope_raw, log_scale, zeros, boundary_residual, meta):
    peak = float(np.max(np.abs(shape_raw)))
    return RadialProfile(
        spec=spec, p=p, m=m, grid=grid,
        shape=shape_raw / peak, shape_slopes=slope_raw / peak,
        log_sup_norm=log_scale + math.log(peak), zeros=np.asarray(zeros, dtype=float),
        log_alpha=log_scale, boundary_residual=boundary_residual, meta=meta)


def shoot_nodal(spec: AnnulusSpec, p: float, m: int, n_points: int = DEFAULT_POINTS,
                rtol: float = RTOL, mu_range=MU_RANGE) -> RadialProfile:
    """The radial solution with exactly m nodal zones and v'(a) > 0, by shooting.

    The zero count of the unit-slope trajectory is nondecreasing in mu; the
    nodal bracket is isolated on that integer count and the boundary value
    w(b) is then driven to zero by Brent's method.

    Raises
    ------
    BracketError
        No bracket inside ``mu_range``; widen it.
    ConvergenceError
        The refined trajectory misses v(b) = 0 or has the wrong zero count.
    """
    p = check_exponent(p)
    m = check_zones(m)
    log_mu, _ = _shoot_unit(spec.a, spec.b, spec.N, p, m, mu_range, rtol)
    mu = math.exp(log_mu)
    grid = spec.grid(n_points)
    w, z, _ = _unit_solve(spec.a, spec.N, p, mu, grid, rtol)
    peak = float(np.max(np.abs(w)))
    residual = abs(w[-1]) / peak
    if residual > BOUNDARY_TOL:
        raise ConvergenceError(f"boundary residual |v(b)|/sup|v| = {residual:.3e} above {BOUNDARY_TOL:g}")
    w = w.copy()
    w[-1] = 0.0
    zeros = _refine_zeros(grid, w, z, spec.N, p, mu, rtol)
    if zeros.size != m - 1:
        raise ConvergenceError(f"expected {m - 1} interior zeros, found {zeros.size}")
    return _make_profile(spec, p, m, grid, w, z, log_mu / (p - 1.0), zeros, residual,
                         {"method": "shooting", "log_mu": log_mu})


def ode_residual(profile: RadialProfile) -> float:
    """Relative residual of the ODE in flux form on the profile grid.

    Checks r^(N-1) v'(r) - a^(N-1) v'(a) + int_a^r s^(N-1) |v|^(p-1) v ds = 0
    at every grid point; normalized by max r^(N-1) |v'|.  Cells holding
    an interior zero are split there (the integrand is only C^1 across a
    zero when p < 2) and every piece gets 5-point Gauss-Legendre on the
    quintic Hermite interpolant of (v, v', v''), with v'' from the ODE at
    the nodes.
    """
    r = profile.grid
    n1 = profile.spec.N - 1
    coef = profile.supnorm_pow(profile.p - 1.0)
    knots = np.union1d(r, profile.zeros)
    nodes, weights = np.polynomial.legendre.leggauss(5)
    h = np.diff(knots)
    s = knots[:-1, None] + 0.5 * h[:, None] * (nodes[None, :] + 1.0)
    quintic = BPoly.from_derivatives(
        r, np.column_stack([profile.shape, profile.shape_slopes, profile.shape_curvature()]))
    u = quintic(s.ravel()).reshape(s.shape)
    g = s ** n1 * coef * np.abs(u) ** (profile.p - 1.0) * u
    pieces = 0.5 * h * (g @ weights)
    integral = np.concatenate(([0.0], np.cumsum(pieces)))[np.searchsorted(knots, r)]
    flux = r ** n1 * profile.shape_slopes
    res = flux - flux[0] + integral
    return float(np.max(np.abs(res)) / np.max(np.abs(flux)))


# -- Nehari diagnostics --------------------------------------------------------

def _zone_bounds(profile):
    return np.concatenate(([profile.spec.a], profile.zeros, [profile.spec.b]))


def nehari_report(profile: RadialProfile, tol: float = 1e-5, n_sub: int = 1024) -> NodalZoneReport:
    """Gradient/power integrals and energies of each nodal piece u_i.

    Each zone is resampled on its own uniform grid by cubic Hermite
    interpolation (values with slopes, slopes with the ODE curvature) and
    integrated by composite Simpson.
    """
    bounds = _zone_bounds(profile)
    p, n1 = profile.p, profile.spec.N - 1
    scale2 = profile.supnorm_pow(2.0)
    coef = profile.supnorm_pow(p - 1.0)
    grad, power = [], []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        r = np.linspace(lo, hi, n_sub + 1)
        u = profile.shape_at(r)
        du = profile.shape_slope_at(r)
        grad.append(simpson(r ** n1 * du ** 2, x=r))
        power.append(coef * simpson(r ** n1 * np.abs(u) ** (p + 1.0), x=r))
    grad = np.array(grad)
    power = np.array(power)
    residual = np.abs(grad - power) / grad
    with np.errstate(over="ignore"):
        energy = (0.5 - 1.0 / (p + 1.0)) * scale2 * grad
        return NodalZoneReport(
            intervals=np.column_stack([bounds[:-1], bounds[1:]]),
            gradient=scale2 * grad, power=scale2 * power, energy=energy,
            nehari_residual=residual,
            flagged=tuple(int(i) for i in np.nonzero(residual > tol)[0]),
            tolerance=tol)


def nehari_minimize(spec: AnnulusSpec, p: float, m: int, initial=None,
                    n_points: int = DEFAULT_POINTS, rtol: float = RTOL,
                    tol: float = 1e-11, max_sweeps: int = 60) -> NehariResult:
    """Nodal solution as the minimizer of the sum of one-zone Nehari energies.

    The placement a < r_1 < ... < r_{m-1} < b is optimized by coordinate
    descent from the equispaced placement (or ``initial``).  Moving r_i
    changes the total energy at the rate r_i^(N-1) (u_{i+1}'(r_i)^2 -
    u_i'(r_i)^2) / 2, so each coordinate minimization is a root of the
    slope mismatch; once the sweeps settle, the stationarity system is
    polished with a Powell hybrid solve.  The pieces are positive one-zone
    solutions from :func:`shoot_nodal` glued with alternating signs.
    """
    p = check_exponent(p)
    m = check_zones(m)
    if m == 1:
        profile = shoot_nodal(spec, p, 1, n_points, rtol)
        energy = nehari_report(profile).energy
        return NehariResult(profile, np.array([]), energy, float(energy.sum()), 0, 0.0)

    a, b, N = spec.a, spec.b, spec.N
    if initial is None:
        r = np.linspace(a, b, m + 1)[1:-1]
    else:
        r = np.asarray(initial, dtype=float).copy()
        _check_placement(r, a, b, m)

    cache = {}

    def zone(lo, hi):
        key = (lo, hi)
        if key not in cache:
            log_mu, zb = _shoot_unit(lo, hi, N, p, 1, rtol=rtol)
            log_alpha = log_mu / (p - 1.0)
            cache[key] = (log_alpha, log_alpha + math.log(abs(zb)))
        return cache[key]

    def mismatch(full, i):
        # log|u_{i+1}'(r_i)| - log|u_i'(r_i)|; increasing in r_i
        return zone(full[i], full[i + 1])[0] - zone(full[i - 1], full[i])[1]

    def full_of(inner):
        return np.concatenate(([a], inner, [b]))

    width = b - a
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        full = full_of(r)
        move = 0.0
        for i in range(1, m):
            left, right = full[i - 1], full[i + 1]
            span = right - left

            def g(x, i=i):
                trial = full.copy()
                trial[i] = x
                return mismatch(trial, i)

            delta = 0.02 * span
            while g(left + delta) > 0 or g(right - delta) < 0:
                delta *= 0.25
                if delta < 1e-8 * span:
                    raise InvalidPlacementError(f"slope mismatch has no root for zero {i}")
            x = optimize.brentq(g, left + delta, right - delta, xtol=1e-10 * span)
            move = max(move, abs(x - full[i]))
            full[i] = x
        r = full[1:-1]
        if move < 1e-4 * width or m == 2:
            break

    if m > 2:
        sol = optimize.root(lambda x: [mismatch(full_of(x), i) for i in range(1, m)],
                            r, method="hybr", options={"xtol": 1e-14})
        _check_placement(sol.x, a, b, m)
        r = sol.x
    full = full_of(r)
    residual = max(abs(mismatch(full, i)) for i in range(1, m))
    if residual > tol and m == 2:
        # single coordinate: finish with a tight Brent solve
        g = lambda x: mismatch(full_of(np.array([x])), 1)
        r = np.array([optimize.brentq(g, r[0] - 1e-6 * width, r[0] + 1e-6 * width,
                                      xtol=1e-15, rtol=1e-15)])
        full = full_of(r)
        residual = abs(mismatch(full, 1))
    if residual > tol:
        raise ConvergenceError(f"placement stationarity residual {residual:.3e} above {tol:g}")

    profile, energies = _glue(spec, p, m, full, zone, n_points, rtol)
    slope_mismatch = float(np.expm1(residual))
    return NehariResult(profile=profile, placement=full[1:-1].copy(), zone_energies=energies,
                        value=float(np.sum(energies)), sweeps=sweeps, slope_mismatch=slope_mismatch)


def _check_placement(r, a, b, m):
    if r.shape != (m - 1,) or not np.all(np.isfinite(r)):
        raise InvalidPlacementError(f"placement must hold {m - 1} finite radii")
    full = np.concatenate(([a], r, [b]))
    if not np.all(np.diff(full) > 0):
        raise InvalidPlacementError(f"placement {r.tolist()} is not ordered inside ({a}, {b})")


def _glue(spec, p, m, full, zone, n_points, rtol, n_energy=2048):
    grid = spec.grid(n_points)
    N = spec.N
    log_w = np.full(grid.size, -np.inf)
    sign = np.zeros(grid.size)
    log_dw = np.full(grid.size, -np.inf)
    dsign = np.zeros(grid.size)
    energies = np.empty(m)
    coef = 0.5 - 1.0 / (p + 1.0)
    for i in range(m):
        lo, hi = full[i], full[i + 1]
        log_alpha = zone(lo, hi)[0]
        mu = math.exp(log_alpha * (p - 1.0))
        s = 1.0 if i % 2 == 0 else -1.0
        inside = np.nonzero((grid > lo) & (grid < hi))[0]
        r_out = np.concatenate(([lo], grid[inside], [hi]))
        w, z, _ = _unit_solve(lo, N, p, mu, r_out, rtol)
        with np.errstate(divide="ignore"):
            log_w[inside] = log_alpha + np.log(np.abs(w[1:-1]))
            log_dw[inside] = log_alpha + np.log(np.abs(z[1:-1]))
        sign[inside] = s * np.sign(w[1:-1])
        dsign[inside] = s * np.sign(z[1:-1])
        for end, zval in ((lo, z[0]), (hi, z[-1])):
            at = np.nonzero(grid == end)[0]
            if at.size:
                log_dw[at] = log_alpha + math.log(abs(zval))
                dsign[at] = s * np.sign(zval)
        r_e = np.linspace(lo, hi, n_energy + 1)
        _, z_e, _ = _unit_solve(lo, N, p, mu, r_e, rtol)
        with np.errstate(over="ignore"):
            energies[i] = coef * math.exp(2.0 * log_alpha) * simpson(r_e ** (N - 1) * z_e ** 2, x=r_e) \
                if 2.0 * log_alpha < 700 else np.inf
    top = float(np.max(log_w))
    shape = sign * np.exp(log_w - top)
    slopes = dsign * np.exp(log_dw - top)
    log_alpha0 = zone(full[0], full[1])[0]
    profile = RadialProfile(
        spec=spec, p=p, m=m, grid=grid, shape=shape, shape_slopes=slopes,
        log_sup_norm=top, zeros=full[1:-1].copy(), log_alpha=log_alpha0,
        boundary_residual=0.0, meta={"method": "nehari"})
    return profile, energies
