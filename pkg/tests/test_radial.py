import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import simpson, solve_ivp

from nodal_annulus import (AnnulusSpec, BracketError, InvalidPlacementError, integrate_radial_ivp,
                           nehari_minimize, nehari_report, ode_residual, shoot_nodal)


def sign_intervals(v):
    s = np.sign(v[1:-1])
    s = s[s != 0]
    return 1 + int(np.sum(s[:-1] != s[1:]))


# -- validation ----------------------------------------------------------------

@pytest.mark.parametrize("a,b,N", [(2.0, 1.0, 2), (0.0, 1.0, 2), (1.0, 1.0, 2), (1.0, 2.0, 1), (1.0, 2.0, 2.5)])
def test_annulus_rejects_bad_geometry(a, b, N):
    with pytest.raises(ValueError):
        AnnulusSpec(a, b, N)


@pytest.mark.parametrize("p", [1.0, 0.5, float("nan"), float("inf")])
def test_shoot_rejects_bad_exponent(unit_annulus, p):
    with pytest.raises(ValueError):
        shoot_nodal(unit_annulus, p, 1)


@pytest.mark.parametrize("m", [0, -1, 1.5])
def test_shoot_rejects_bad_zone_count(unit_annulus, m):
    with pytest.raises(ValueError):
        shoot_nodal(unit_annulus, 3.0, m)


# -- initial value problem -----------------------------------------------------

def test_ivp_rejects_zero_slope(unit_annulus):
    with pytest.raises(ValueError):
        integrate_radial_ivp(unit_annulus, 3.0, 0.0)


def test_ivp_is_odd_in_alpha(unit_annulus):
    up = integrate_radial_ivp(unit_annulus, 3.0, 7.5)
    dn = integrate_radial_ivp(unit_annulus, 3.0, -7.5)
    np.testing.assert_array_equal(up.values, -dn.values)
    np.testing.assert_array_equal(up.slopes, -dn.slopes)
    np.testing.assert_allclose(up.zeros, dn.zeros, rtol=0, atol=1e-12)


@pytest.mark.parametrize("p,alpha,N", [(3.0, 10.0, 2), (1.5, 4.0, 3), (5.0, 2.0, 2), (1.01, 1.0, 2)])
def test_ivp_matches_solve_ivp(p, alpha, N):
    spec = AnnulusSpec(1.0, 2.0, N)
    traj = integrate_radial_ivp(spec, p, alpha)

    def rhs(r, y):
        return [y[1], -(N - 1) / r * y[1] - np.abs(y[0]) ** (p - 1) * y[0]]

    ref = solve_ivp(rhs, (1.0, 2.0), [0.0, alpha], method="DOP853", t_eval=traj.grid,
                    rtol=1e-13, atol=1e-14)
    scale = np.max(np.abs(ref.y[0]))
    assert np.max(np.abs(traj.values - ref.y[0])) <= 1e-8 * scale
    assert np.max(np.abs(traj.slopes - ref.y[1])) <= 1e-8 * np.max(np.abs(ref.y[1]))


def test_ivp_zero_count_grows_with_alpha(unit_annulus):
    alphas = np.geomspace(1e-3, 1e3, 40)
    counts = [integrate_radial_ivp(unit_annulus, 3.0, al, n_points=513).zeros.size for al in alphas]
    assert counts[0] == 0
    assert integrate_radial_ivp(unit_annulus, 3.0, alphas[0]).values[-1] > 0
    assert counts[-1] >= 1
    assert all(c1 <= c2 for c1, c2 in zip(counts, counts[1:]))


def test_ivp_zeros_are_refined(unit_annulus):
    traj = integrate_radial_ivp(unit_annulus, 3.0, 30.0)
    assert traj.zeros.size >= 1
    for z in traj.zeros:
        # the zero is bracketed to 1e-12; re-integrating to it gives ~0
        t = integrate_radial_ivp(AnnulusSpec(1.0, float(z), 2), 3.0, 30.0, n_points=3)
        assert abs(t.values[-1]) <= 1e-9 * np.max(np.abs(traj.values))


# -- shooting -------------------------------------------------------------------

def test_positive_solution_single_bump(profile):
    prof = profile(1.0, 2.0, 2, 3.0, 1)
    v = prof.values
    assert prof.zeros.size == 0
    assert np.all(v[1:-1] > 0)
    dv = np.diff(v)
    assert np.sum(np.diff(np.sign(dv)) != 0) == 1


@pytest.mark.parametrize("mu", [2.0, 0.5])
def test_scaling_law(profile, mu):
    p, m = 3.0, 2
    base = profile(1.0, 2.0, 2, p, m)
    big = profile(mu, 2.0 * mu, 2, p, m)
    r = big.grid
    predicted = mu ** (-2.0 / (p - 1.0)) * base.sup_norm * base.shape_at(r / mu)
    assert np.max(np.abs(big.values - predicted)) <= 1e-8 * big.sup_norm
    np.testing.assert_allclose(big.zeros, mu * base.zeros, rtol=1e-10)


@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_profile_invariants(profile, N, m):
    prof = profile(1.0, 2.0, N, 2.5, m)
    v = prof.values
    assert v[0] == 0.0 and v[-1] == 0.0
    assert prof.slopes[0] > 0
    assert prof.zeros.size == m - 1
    assert sign_intervals(v) == m
    assert np.all(np.diff(prof.zeros) > 0)
    i = np.argmax(np.abs(v))
    assert 0 < i < v.size - 1
    assert prof.sup_norm == pytest.approx(np.max(np.abs(v)), rel=1e-14)
    # the slope at a zero is bounded away from 0
    assert np.all(np.abs(prof.shape_slope_at(prof.zeros)) > 1e-3)
    # sign alternates across zeros
    mids = 0.5 * (np.r_[1.0, prof.zeros] + np.r_[prof.zeros, 2.0])
    s = np.sign(prof.shape_at(mids))
    assert np.all(s[:-1] == -s[1:])
    assert ode_residual(prof) <= 1e-8


def test_bracket_failure_is_reported(unit_annulus):
    with pytest.raises(BracketError):
        shoot_nodal(unit_annulus, 3.0, 3, mu_range=(1e-8, 1e-6))


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0.5, 3.0), width=st.floats(0.3, 2.5), N=st.integers(2, 4),
       p=st.floats(1.1, 6.0), m=st.integers(1, 4))
def test_shooting_properties(a, width, N, p, m):
    prof = shoot_nodal(AnnulusSpec(a, a + width, N), p, m)
    assert prof.zeros.size == m - 1
    assert sign_intervals(prof.shape) == m
    assert prof.shape_slopes[0] > 0
    assert ode_residual(prof) <= 1e-8


# -- Nehari oracle ----------------------------------------------------------------

def test_nehari_matches_shooting(profile):
    shot = profile(1.0, 2.0, 2, 3.0, 2)
    neh = nehari_minimize(AnnulusSpec(1.0, 2.0, 2), 3.0, 2)
    assert neh.profile.zeros[0] == pytest.approx(shot.zeros[0], rel=1e-6)
    assert neh.profile.sup_norm == pytest.approx(shot.sup_norm, rel=1e-6)
    assert np.max(np.abs(neh.profile.values - shot.values)) <= 1e-6 * shot.sup_norm


def test_nehari_gluing_is_c1():
    res = nehari_minimize(AnnulusSpec(1.0, 2.0, 2), 3.0, 2)
    assert np.all(res.zone_energies > 0)
    prof = res.profile
    r1 = prof.zeros[0]
    h = 1e-7
    left = prof.shape_slope_at(r1 - h)
    right = prof.shape_slope_at(r1 + h)
    assert abs(left - right) <= 1e-6 * abs(left)
    assert res.slope_mismatch <= 1e-6


def test_nehari_value_independent_of_start():
    spec = AnnulusSpec(1.0, 2.0, 2)
    v1 = nehari_minimize(spec, 3.0, 2, initial=[1.2]).value
    v2 = nehari_minimize(spec, 3.0, 2, initial=[1.85]).value
    assert v1 == pytest.approx(v2, rel=1e-6)
    v3 = nehari_minimize(spec, 3.0, 3, initial=[1.1, 1.3]).value
    v4 = nehari_minimize(spec, 3.0, 3).value
    assert v3 == pytest.approx(v4, rel=1e-6)


def test_nehari_rejects_unordered_placement():
    with pytest.raises(InvalidPlacementError):
        nehari_minimize(AnnulusSpec(1.0, 2.0, 2), 3.0, 3, initial=[1.6, 1.3])
    with pytest.raises(InvalidPlacementError):
        nehari_minimize(AnnulusSpec(1.0, 2.0, 2), 3.0, 2, initial=[2.5])


def test_nehari_single_zone_delegates(profile):
    res = nehari_minimize(AnnulusSpec(1.0, 2.0, 2), 3.0, 1)
    assert res.profile.sup_norm == pytest.approx(profile(1.0, 2.0, 2, 3.0, 1).sup_norm, rel=1e-12)


@pytest.mark.parametrize("N,p,m", [(2, 3.0, 2), (3, 1.5, 3), (2, 5.0, 1), (4, 2.0, 2)])
def test_nehari_report_identities(profile, N, p, m):
    rep = nehari_report(profile(1.0, 2.0, N, p, m))
    assert rep.flagged == ()
    assert np.all(rep.nehari_residual <= 1e-5)
    assert np.all(rep.energy > 0)
    np.testing.assert_allclose(rep.energy, (0.5 - 1.0 / (p + 1.0)) * rep.gradient, rtol=1e-14)


def test_nehari_report_total_matches_minimum(profile):
    rep = nehari_report(profile(1.0, 2.0, 2, 3.0, 2))
    res = nehari_minimize(AnnulusSpec(1.0, 2.0, 2), 3.0, 2)
    assert rep.total_energy == pytest.approx(res.value, rel=1e-6)


def test_nehari_report_flags_non_solutions(profile):
    # a profile whose amplitude is off by 10% violates the Nehari identity
    from dataclasses import replace
    prof = profile(1.0, 2.0, 2, 3.0, 2)
    fake = replace(prof, log_sup_norm=prof.log_sup_norm + np.log(1.1))
    assert nehari_report(fake).flagged == (0, 1)


def test_nehari_energy_by_independent_quadrature(profile):
    prof = profile(1.0, 2.0, 3, 3.0, 2)
    rep = nehari_report(prof)
    # v' is smooth across the zero, so plain Simpson on the stored grid
    # gives the sum of the zone gradient terms
    r, dv = prof.grid, prof.slopes
    total = simpson(r ** 2 * dv ** 2, x=r)
    assert total == pytest.approx(rep.gradient.sum(), rel=1e-8)
