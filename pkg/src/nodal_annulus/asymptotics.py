"""Limits of the radial solutions and their spectra as p -> 1 and p -> infinity.

As p -> 1 the normalized profile v_p / |v_p|_inf tends to the m-th radial
Dirichlet eigenfunction psi_m of the Laplacian, |v_p|_inf^(p-1) tends to
its eigenvalue lambda_m, and nu_m(p) tends to 0.  For large p the
eigenvalues dive below the linear bound (1 - p) a^2 lambda_1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .radial import AnnulusSpec, check_exponent, check_zones, shoot_nodal
from .spectrum import (DEFAULT_INTERVALS, assemble_pencil, eigen_smallest,
                       sign_changes, sl_pencil)

__all__ = [
    "LaplaceEigenpair",
    "AsymptoticRow",
    "BoundRow",
    "laplace_radial_eigen",
    "p_to_1_diagnostics",
    "large_p_bound_check",
]


@dataclass(frozen=True, eq=False)
class LaplaceEigenpair:
    """m-th radial Dirichlet eigenpair; psi has sup norm 1 and psi'(a) > 0."""

    spec: AnnulusSpec
    m: int
    lambda_m: float
    radii: np.ndarray
    psi: np.ndarray

    @property
    def zeros(self) -> np.ndarray:
        return sign_changes(self.psi[1:-1], self.radii[1:-1])

    def residual(self) -> float:
        """Max of |psi'' + (N-1)/r psi' + lambda psi| at interior nodes, by central differences."""
        r, psi = self.radii, self.psi
        h = r[1] - r[0]
        d2 = (psi[2:] - 2 * psi[1:-1] + psi[:-2]) / h ** 2
        d1 = (psi[2:] - psi[:-2]) / (2 * h)
        return float(np.max(np.abs(d2 + (self.spec.N - 1) / r[1:-1] * d1 + self.lambda_m * psi[1:-1])))


@dataclass(frozen=True)
class AsymptoticRow:
    p: float
    supnorm_pow: float
    lambda_m: float
    err_profile: float
    err_slope: float
    nu_m: float


@dataclass(frozen=True)
class BoundRow:
    p: float
    nu_m: float
    bound: float

    @property
    def margin(self) -> float:
        """bound - nu_m; nonnegative when the inequality nu_m <= bound holds."""
        return self.bound - self.nu_m


def laplace_radial_eigen(spec: AnnulusSpec, m: int,
                         intervals: int = DEFAULT_INTERVALS) -> LaplaceEigenpair:
    """lambda_m and psi_m from the radial pencil with zero potential and weight r^(N-1)."""
    m = check_zones(m)
    pencil = sl_pencil(spec, intervals, None, weight_exponent=spec.N - 1)
    sl = eigen_smallest(pencil, m)
    return LaplaceEigenpair(spec=spec, m=m, lambda_m=float(sl.eigenvalues[m - 1]),
                            radii=sl.radii, psi=sl.eigenfunctions[m - 1].copy())


def p_to_1_diagnostics(spec: AnnulusSpec, m: int, p_list,
                       intervals: int = DEFAULT_INTERVALS) -> list[AsymptoticRow]:
    """Distance of (|v_p|^(p-1), v_p/|v_p|, nu_m) from their p -> 1 limits, per p.

    Profile and slope errors are sup distances on the eigenfunction grid;
    the slope error compares v_p'/|v_p| with psi_m' scaled the same way.
    """
    m = check_zones(m)
    p_list = [check_exponent(p) for p in p_list]
    for p in p_list:
        if p > 2:
            raise ValueError(f"p = {p} outside (1, 2]")
    if any(q >= p for p, q in zip(p_list, p_list[1:])):
        raise ValueError("p_list must decrease toward 1")
    eig = laplace_radial_eigen(spec, m, intervals)
    r = eig.radii
    h = r[1] - r[0]
    dpsi = np.gradient(eig.psi, h, edge_order=2)
    rows = []
    for p in p_list:
        prof = shoot_nodal(spec, p, m)
        shape = prof.shape_at(r)
        slope = prof.shape_slope_at(r)
        sign = 1.0 if slope[0] * dpsi[0] > 0 else -1.0
        sl = eigen_smallest(assemble_pencil(prof, intervals), m + 1)
        rows.append(AsymptoticRow(
            p=p,
            supnorm_pow=prof.supnorm_pow(p - 1.0),
            lambda_m=eig.lambda_m,
            err_profile=float(np.max(np.abs(sign * shape - eig.psi))),
            err_slope=float(np.max(np.abs(sign * slope - dpsi))),
            nu_m=float(sl.eigenvalues[m - 1]),
        ))
    return rows


def large_p_bound_check(spec: AnnulusSpec, m: int, p_list,
                        intervals: int = DEFAULT_INTERVALS) -> list[BoundRow]:
    """nu_m(p) next to the bound (1 - p) a^2 lambda_1 for each p."""
    m = check_zones(m)
    p_list = [check_exponent(p) for p in p_list]
    lam1 = laplace_radial_eigen(spec, 1, intervals).lambda_m
    rows = []
    for p in p_list:
        prof = shoot_nodal(spec, p, m)
        nu = eigen_smallest(assemble_pencil(prof, intervals), m + 1).eigenvalues[m - 1]
        rows.append(BoundRow(p=p, nu_m=float(nu), bound=(1.0 - p) * spec.a ** 2 * lam1))
    return rows
