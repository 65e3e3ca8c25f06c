"""Weighted Sturm-Liouville spectrum of the linearization at a radial solution.

The eigenvalue problem

    -(r^(N-1) phi')' - p r^(N-1) |v|^(p-1) phi = nu r^(N-3) phi,  phi(a) = phi(b) = 0

is discretized in flux form by central differences on a uniform grid,
giving a symmetric tridiagonal stiffness matrix and a positive diagonal
weight.  The pencil is reduced to a standard tridiagonal problem by the
congruence B^(-1/2) A B^(-1/2), whose lowest eigenvalues come from Sturm
sequence bisection and whose eigenvectors come from inverse iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded

from . import _kernels
from .errors import ClusteredSpectrumError
from .radial import AnnulusSpec, RadialProfile, check_zones, shoot_nodal

__all__ = [
    "SLPencil",
    "SpectrumSlice",
    "AuxiliaryReport",
    "sl_pencil",
    "assemble_pencil",
    "eigen_smallest",
    "radial_spectrum",
    "rayleigh",
    "auxiliary_diagnostics",
    "sign_changes",
]

DEFAULT_INTERVALS = 4096
BISECTION_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class SLPencil:
    """Discrete pencil (A, B) on the interior nodes of a uniform radial grid.

    ``diag``/``off`` are the diagonal and first off-diagonal of A,
    ``weight`` the diagonal of B.  ``radii`` includes both endpoints.
    """

    spec: AnnulusSpec
    radii: np.ndarray
    diag: np.ndarray
    off: np.ndarray
    weight: np.ndarray
    potential: np.ndarray
    p: float = float("nan")
    m: int = 0

    @property
    def grid(self) -> np.ndarray:
        return self.radii[1:-1]

    @property
    def h(self) -> float:
        return float(self.radii[1] - self.radii[0])

    @property
    def stiffness(self) -> sparse.csr_matrix:
        return sparse.diags([self.off, self.diag, self.off], [-1, 0, 1], format="csr")

    @property
    def weight_matrix(self) -> sparse.csr_matrix:
        return sparse.diags(self.weight, format="csr")

    def with_potential(self, potential) -> "SLPencil":
        """Same pencil with the potential term replaced (None removes it)."""
        return sl_pencil(self.spec, self.radii.size - 1, potential,
                         weight_exponent=None, _weight=self.weight, p=self.p, m=self.m)


@dataclass(frozen=True, eq=False)
class SpectrumSlice:
    """Lowest eigenpairs of a pencil; eigenfunctions include the zero endpoints."""

    p: float
    m: int
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    radii: np.ndarray
    pencil: SLPencil

    @property
    def negative_count(self) -> int:
        return int(np.sum(self.eigenvalues < 0))


@dataclass(frozen=True)
class AuxiliaryReport:
    """Sign changes of z = r v' + 2 v / (p-1) and of zeta = v'."""

    z_zeros: np.ndarray
    zeta_zeros: np.ndarray

    @property
    def z_count(self) -> int:
        return int(self.z_zeros.size)

    @property
    def zeta_count(self) -> int:
        return int(self.zeta_zeros.size)


def sl_pencil(spec: AnnulusSpec, intervals: int = DEFAULT_INTERVALS, potential=None,
              weight_exponent=None, *, _weight=None, p=float("nan"), m=0) -> SLPencil:
    """Flux-form pencil for -(r^(N-1) phi')' - r^(N-1) q phi = nu r^k phi.

    ``potential`` is q sampled on the interior nodes (or a callable of r,
    or None for q = 0); ``weight_exponent`` is k, default N - 3.
    """
    radii = np.linspace(spec.a, spec.b, intervals + 1)
    h = radii[1] - radii[0]
    r = radii[1:-1]
    n1 = spec.N - 1
    flux = (0.5 * (radii[:-1] + radii[1:])) ** n1 / h ** 2
    if potential is None:
        q = np.zeros_like(r)
    elif callable(potential):
        q = np.asarray(potential(r), dtype=float)
    else:
        q = np.asarray(potential, dtype=float)
    diag = flux[:-1] + flux[1:] - r ** n1 * q
    off = -flux[1:-1]
    if _weight is None:
        k = spec.N - 3 if weight_exponent is None else weight_exponent
        weight = r ** k
    else:
        weight = _weight
    return SLPencil(spec=spec, radii=radii, diag=diag, off=off, weight=weight,
                    potential=q, p=p, m=m)


def assemble_pencil(profile: RadialProfile, intervals: int = DEFAULT_INTERVALS) -> SLPencil:
    """Pencil of the linearization at ``profile``.

    The potential p |v|^(p-1) is evaluated between profile samples through
    the cubic Hermite interpolant of (v, v').
    """
    radii = np.linspace(profile.spec.a, profile.spec.b, intervals + 1)
    q = profile.p * profile.potential(radii[1:-1])
    return sl_pencil(profile.spec, intervals, q, p=profile.p, m=profile.m)


def _standard_form(pencil):
    s = np.sqrt(pencil.weight)
    return pencil.diag / pencil.weight, pencil.off / (s[:-1] * s[1:]), s


def eigen_smallest(pencil: SLPencil, L: int, rtol: float = BISECTION_RTOL) -> SpectrumSlice:
    """The L algebraically smallest eigenpairs of the pencil.

    Eigenfunctions are scaled to sup norm 1 with a positive slope at r = a.

    Raises
    ------
    ClusteredSpectrumError
        Two computed eigenvalues coincide at the bisection tolerance.
    """
    L = check_zones(L)
    d, e, s = _standard_form(pencil)
    if L > d.size // 4:
        raise ValueError(f"L={L} is not small compared to the {d.size} unknowns")
    radius = np.zeros_like(d)
    radius[:-1] += np.abs(e)
    radius[1:] += np.abs(e)
    lo = float(np.min(d - radius))
    hi = float(np.max(d + radius))
    span = hi - lo
    lo -= 1e-9 * span + 1.0
    hi += 1e-9 * span + 1.0
    e2 = e * e
    nu = _kernels.bisect_lowest(d, e2, L, lo, hi, rtol)
    gaps = np.diff(nu)
    if np.any(gaps <= 2 * rtol * np.maximum(1.0, np.abs(nu[1:]))):
        raise ClusteredSpectrumError(f"eigenvalues not separated: {nu.tolist()}")

    n = d.size
    phis = np.zeros((L, n + 2))
    ab = np.zeros((3, n))
    ab[0, 1:] = e
    ab[2, :-1] = e
    start = 1.0 + np.linspace(0.0, 1.0, n) ** 2
    for l in range(L):
        shift = nu[l] - 1e-12 * max(1.0, abs(nu[l]))
        ab[1] = d - shift
        y = start / np.linalg.norm(start)
        for _ in range(3):
            y = solve_banded((1, 1), ab, y)
            y /= np.linalg.norm(y)
        phi = y / s
        phi /= np.max(np.abs(phi))
        if phi[0] < 0:
            phi = -phi
        phis[l, 1:-1] = phi
    return SpectrumSlice(p=pencil.p, m=pencil.m, eigenvalues=nu, eigenfunctions=phis,
                         radii=pencil.radii, pencil=pencil)


def radial_spectrum(spec: AnnulusSpec, p: float, m: int, L: int | None = None,
                    intervals: int = DEFAULT_INTERVALS, profile: RadialProfile | None = None,
                    **shoot_kw) -> SpectrumSlice:
    """Solve the radial problem and return the lowest L (default m + 1) eigenpairs."""
    if profile is None:
        profile = shoot_nodal(spec, p, m, **shoot_kw)
    return eigen_smallest(assemble_pencil(profile, intervals), L or m + 1)


def rayleigh(profile: RadialProfile, phi) -> float:
    """Rayleigh quotient of the linearization for a test function phi.

    ``phi`` is sampled on a uniform grid over [a, b] (endpoints included)
    and must vanish at both ends.  Derivatives are taken on intervals and
    the remaining integrals by the trapezoid rule, which is the quadrature
    the discrete pencil is built on.
    """
    phi = np.asarray(phi, dtype=float)
    scale = np.max(np.abs(phi)) if phi.size else 0.0
    if phi.size < 3:
        raise ValueError("test function needs at least three samples")
    if scale > 0 and max(abs(phi[0]), abs(phi[-1])) > 1e-12 * scale:
        raise ValueError("test function must vanish at r = a and r = b")
    spec = profile.spec
    radii = np.linspace(spec.a, spec.b, phi.size)
    h = radii[1] - radii[0]
    n1 = spec.N - 1
    r = radii[1:-1]
    mid = 0.5 * (radii[:-1] + radii[1:])
    den = np.sum(r ** (n1 - 2) * phi[1:-1] ** 2) * h
    if den == 0.0:
        raise ValueError("null test function: zero denominator")
    grad = np.sum(mid ** n1 * np.diff(phi) ** 2) / h
    pot = np.sum(r ** n1 * profile.p * profile.potential(r) * phi[1:-1] ** 2) * h
    return float((grad - pot) / den)


def sign_changes(values, x=None) -> np.ndarray:
    """Locations of strict sign changes of a sampled function.

    A change between adjacent samples is located by linear interpolation;
    one that passes through a run of exact zeros is placed at the middle
    of the run.  Locations are indices when x is None.
    """
    values = np.asarray(values, dtype=float)
    idx = np.nonzero(values != 0.0)[0]
    v = values[idx]
    flips = np.nonzero(v[:-1] * v[1:] < 0)[0]
    i0, i1 = idx[flips], idx[flips + 1]
    if x is None:
        x = np.arange(values.size, dtype=float)
    x = np.asarray(x, dtype=float)
    t = values[i0] / (values[i0] - values[i1])
    interp = x[i0] + t * (x[i1] - x[i0])
    through = 0.5 * (x[np.minimum(i0 + 1, x.size - 1)] + x[np.maximum(i1 - 1, 0)])
    return np.where(i1 - i0 > 1, through, interp)


def auxiliary_diagnostics(profile: RadialProfile) -> AuxiliaryReport:
    """Interior zeros of z = r v' + 2 v / (p-1) and of zeta = v'."""
    r = profile.grid
    z = r * profile.shape_slopes + 2.0 / (profile.p - 1.0) * profile.shape
    zeta = profile.shape_slopes
    return AuxiliaryReport(z_zeros=sign_changes(z, r), zeta_zeros=sign_changes(zeta, r))
