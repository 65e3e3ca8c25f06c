import numpy as np
import pytest
from scipy.integrate import simpson
from scipy.linalg import eigh

from conftest import bessel_cross_roots
from nodal_annulus import (AnnulusSpec, laplace_radial_eigen, large_p_bound_check, nu_curve,
                           p_to_1_diagnostics, shoot_nodal, sl_pencil)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_laplace_eigenvalue_matches_bessel(unit_annulus, m):
    lam = bessel_cross_roots(1.0, 2.0, 3)
    eig = laplace_radial_eigen(unit_annulus, m)
    assert eig.lambda_m == pytest.approx(lam[m - 1], rel=1e-6)


def test_thin_annulus_limit():
    lam = laplace_radial_eigen(AnnulusSpec(100.0, 101.0, 2), 1).lambda_m
    assert lam == pytest.approx(np.pi ** 2, rel=1e-2)


def test_eigenvalues_increase(unit_annulus):
    lam = [laplace_radial_eigen(unit_annulus, m).lambda_m for m in range(1, 5)]
    assert all(a < b for a, b in zip(lam, lam[1:]))


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("m", [1, 2, 4])
def test_eigenfunction_invariants(N, m):
    eig = laplace_radial_eigen(AnnulusSpec(1.0, 2.0, N), m)
    assert eig.psi[0] == 0.0 and eig.psi[-1] == 0.0
    assert eig.psi[1] > 0
    assert np.max(np.abs(eig.psi)) == pytest.approx(1.0)
    assert eig.zeros.size == m - 1
    assert eig.residual() <= 1e-5 * eig.lambda_m


def test_shared_machinery_against_dense_solver():
    spec = AnnulusSpec(1.0, 3.0, 3)
    pen = sl_pencil(spec, 256, None, weight_exponent=spec.N - 1)
    ref = eigh(pen.stiffness.toarray(), np.diag(pen.weight), eigvals_only=True)
    for m in (1, 2, 3):
        assert laplace_radial_eigen(spec, m, intervals=256).lambda_m == pytest.approx(ref[m - 1], rel=1e-9)


def test_three_dimensional_closed_form():
    # N = 3: psi = sin(k (r - a)) / r, lambda = (m pi / (b - a))^2
    spec = AnnulusSpec(1.0, 2.0, 3)
    for m in (1, 2):
        assert laplace_radial_eigen(spec, m).lambda_m == pytest.approx((m * np.pi) ** 2, rel=1e-6)


@pytest.fixture(scope="module")
def small_p_rows(unit_annulus):
    return p_to_1_diagnostics(unit_annulus, 2, [1.1, 1.01, 1.001])


def test_p_to_1_trends(small_p_rows):
    lam_err = [abs(r.supnorm_pow - r.lambda_m) for r in small_p_rows]
    prof_err = [r.err_profile for r in small_p_rows]
    slope_err = [r.err_slope for r in small_p_rows]
    nu = [abs(r.nu_m) for r in small_p_rows]
    for seq in (lam_err, prof_err, slope_err, nu):
        assert all(a > b for a, b in zip(seq, seq[1:]))
    assert prof_err[-1] <= 0.05


def test_p_to_1_validation(unit_annulus):
    with pytest.raises(ValueError):
        p_to_1_diagnostics(unit_annulus, 2, [1.01, 1.1])
    with pytest.raises(ValueError):
        p_to_1_diagnostics(unit_annulus, 2, [2.5])


@pytest.mark.parametrize("m", [1, 2])
def test_large_p_bound(unit_annulus, m):
    rows = large_p_bound_check(unit_annulus, m, [2.0, 5.0, 10.0])
    assert all(r.nu_m <= r.bound for r in rows)
    margins = [r.margin for r in rows]
    assert all(a < b for a, b in zip(margins, margins[1:]))


def test_bound_and_nu_near_zero_close_to_one(unit_annulus):
    row = large_p_bound_check(unit_annulus, 1, [1.01])[0]
    assert abs(row.bound) < 0.5 and abs(row.nu_m) < 0.5


def test_nu_1_bounded_below_near_one(unit_annulus):
    grid = [1.001, 1.01, 1.05, 1.1, 1.25, 1.5]
    nu1 = nu_curve(unit_annulus, 2, 1, grid)
    c = max(p * shoot_nodal(unit_annulus, p, 2).supnorm_pow(p - 1.0) for p in grid)
    assert np.min(nu1) >= -c * unit_annulus.b ** 2


@pytest.mark.parametrize("m", [1, 2])
def test_nu_m_first_order_slope(unit_annulus, m):
    # first-order perturbation of the Laplace eigenpair: with |v_p|^(p-1) ~ lambda_m,
    # nu_m(p) / (p - 1) -> -lambda_m int r psi^2 / int psi^2 / r
    eig = laplace_radial_eigen(unit_annulus, m)
    r, psi = eig.radii, eig.psi
    slope = -eig.lambda_m * simpson(r * psi ** 2, x=r) / simpson(psi ** 2 / r, x=r)
    nu = nu_curve(unit_annulus, m, m, [1.001])[0]
    assert nu / 0.001 == pytest.approx(slope, rel=1e-3)
