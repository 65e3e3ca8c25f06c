"""Acceptance criteria 1-10, one test each, one printed PASS/FAIL line each."""
import time
import warnings

import numpy as np
import pytest

from conftest import bessel_cross_roots
from nodal_annulus import (AnnulusSpec, DeformationSpec, PolarGrid, assemble_pencil,
                           auxiliary_diagnostics, eigen_smallest, find_degeneracies,
                           laplace_radial_eigen, large_p_bound_check, morse_index_2d,
                           morse_index_at, nehari_minimize, newton_solve, nodal_count_2d,
                           nu_curve, ode_residual, p_to_1_diagnostics, rayleigh, shoot_nodal,
                           sign_changes, spherical_multiplicity)
from nodal_annulus.cli import main
from nodal_annulus.degeneracy import DegeneracyWarning, level

CASES = [(N, p, m) for N in (2, 3) for p in (1.5, 3.0, 5.0) for m in (1, 2, 3)]


@pytest.fixture
def report(capsys):
    def emit(n, checks, elapsed, limit=None):
        failed = [name for name, ok in checks if not ok]
        if limit is not None and elapsed >= limit:
            failed.append(f"runtime {elapsed:.1f}s >= {limit:g}s")
        status = "PASS" if not failed else "FAIL"
        detail = f"{len(checks)} checks, {elapsed:.1f}s"
        if failed:
            detail += "; failed: " + ", ".join(failed[:5])
        with capsys.disabled():
            print(f"\ncriterion {n}: {status} ({detail})")
        assert not failed, failed
    return emit


def test_criterion_1_radial_construction(report):
    t0 = time.perf_counter()
    checks = []
    for N, p, m in CASES:
        spec = AnnulusSpec(1.0, 2.0, N)
        shot = shoot_nodal(spec, p, m)
        neh = nehari_minimize(spec, p, m).profile
        tag = f"N={N} p={p} m={m}"
        diff = np.max(np.abs(neh.values - shot.values)) / shot.sup_norm
        checks.append((f"{tag} nehari {diff:.1e}", diff <= 1e-6))
        res = ode_residual(shot)
        checks.append((f"{tag} residual {res:.1e}", res <= 1e-8))
        checks.append((f"{tag} zeros", shot.zeros.size == m - 1))
    report(1, checks, time.perf_counter() - t0, 10.0)


def test_criterion_2_scaling(report):
    t0 = time.perf_counter()
    checks = []
    for N, p, m in [(2, 3.0, 2), (3, 1.5, 3), (2, 5.0, 1)]:
        base = shoot_nodal(AnnulusSpec(1.0, 2.0, N), p, m)
        big = shoot_nodal(AnnulusSpec(2.0, 4.0, N), p, m)
        predicted = 2.0 ** (-2.0 / (p - 1.0)) * base.sup_norm * base.shape_at(big.grid / 2.0)
        err = np.max(np.abs(big.values - predicted)) / big.sup_norm
        checks.append((f"N={N} p={p} m={m} {err:.1e}", err <= 1e-8))
    report(2, checks, time.perf_counter() - t0, 2.0)


def test_criterion_3_spectrum_structure(report):
    t0 = time.perf_counter()
    checks = []
    for N, p, m in CASES:
        prof = shoot_nodal(AnnulusSpec(1.0, 2.0, N), p, m)
        sl = eigen_smallest(assemble_pencil(prof), m + 1)
        nu = sl.eigenvalues
        tag = f"N={N} p={p} m={m}"
        checks.append((f"{tag} negatives", int(np.sum(nu < 0)) == m))
        checks.append((f"{tag} nu_m+1 > 0", nu[m] > 0))
        checks.append((f"{tag} below -(N-1)", bool(np.all(nu[: m - 1] < -(N - 1)))))
        for l, phi in enumerate(sl.eigenfunctions, start=1):
            checks.append((f"{tag} phi_{l} zeros", sign_changes(phi[1:-1]).size == l - 1))
            q = rayleigh(prof, phi)
            checks.append((f"{tag} rayleigh_{l}", abs(q - nu[l - 1]) <= 1e-8 * max(1.0, abs(nu[l - 1]))))
    report(3, checks, time.perf_counter() - t0, 30.0)


def test_criterion_4_auxiliary(report):
    t0 = time.perf_counter()
    checks = []
    for N, p, m in CASES:
        rep = auxiliary_diagnostics(shoot_nodal(AnnulusSpec(1.0, 2.0, N), p, m))
        tag = f"N={N} p={p} m={m}"
        checks.append((f"{tag} z={rep.z_count}", rep.z_count == m))
        checks.append((f"{tag} zeta={rep.zeta_count}", rep.zeta_count >= m))
    report(4, checks, time.perf_counter() - t0)


@pytest.fixture(scope="module")
def scans():
    spec = AnnulusSpec(1.0, 2.0, 2)
    out = {}
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        # j = 1 for m = 1 crosses just below p = 1.05
        warnings.simplefilter("ignore", DegeneracyWarning)
        for m in (1, 2):
            coarse = find_degeneracies(spec, m, (1.05, 20.0), 3, samples=64)
            refined = find_degeneracies(spec, m, (1.05, 20.0), 3, samples=64, refine=True)
            out[m] = (coarse, refined)
    return out, time.perf_counter() - t0


def test_criterion_5_degeneracy_scan(report, scans):
    found, elapsed = scans
    checks = []
    for m, (coarse, refined) in found.items():
        checks.append((f"m={m} found roots", len(refined) > 0))
        checks.append((f"m={m} stable after one refinement", refined.refinements == 1))
        checks.append((f"m={m} counts 64 vs 127", coarse.sign_changes == refined.sign_changes))
        for q in refined:
            nu = nu_curve(AnnulusSpec(1.0, 2.0, 2), m, q.l, [q.p_k])[0]
            err = abs(nu - level(2, q.j))
            checks.append((f"m={m} (l={q.l},j={q.j}) residual {err:.1e}", err <= 1e-6))
        ps = np.array([q.p_k for q in refined])
        for i, q in enumerate(refined):
            gap = np.min(np.abs(np.delete(ps, i) - q.p_k)) if ps.size > 1 else np.inf
            checks.append((f"m={m} isolation p={q.p_k:.5f}", gap > 1e-4 or q.near_collision))
    report(5, checks, elapsed, 300.0)


def test_criterion_6_morse_index(report, scans):
    t0 = time.perf_counter()
    checks = []
    for N, p, m in CASES:
        rep = morse_index_at(AnnulusSpec(1.0, 2.0, N), p, m)
        checks.append((f"N={N} p={p} m={m} bound", rep.morse_index >= (m - 1) * (N + 1) + 1))
    spec = AnnulusSpec(1.0, 2.0, 2)
    for m, (_, refined) in scans[0].items():
        for q in refined:
            below = morse_index_at(spec, q.p_k - 1e-5, m).morse_index
            above = morse_index_at(spec, q.p_k + 1e-5, m).morse_index
            checks.append((f"m={m} jump at {q.p_k:.5f}", above - below == spherical_multiplicity(2, q.j)))
    # shares the criterion 5 budget
    report(6, checks, time.perf_counter() - t0 + scans[1], 300.0)


def test_criterion_7_p_to_1(report):
    t0 = time.perf_counter()
    spec = AnnulusSpec(1.0, 2.0, 2)
    rows = p_to_1_diagnostics(spec, 2, [1.1, 1.01, 1.001])
    checks = []
    seqs = {"lambda": [abs(r.supnorm_pow - r.lambda_m) for r in rows],
            "profile": [r.err_profile for r in rows],
            "nu_m": [abs(r.nu_m) for r in rows]}
    for name, seq in seqs.items():
        checks.append((f"{name} decreasing", all(a > b for a, b in zip(seq, seq[1:]))))
    checks.append((f"final profile error {rows[-1].err_profile:.3f}", rows[-1].err_profile <= 0.05))
    lam = laplace_radial_eigen(spec, 2).lambda_m
    oracle = bessel_cross_roots(1.0, 2.0, 2)[1]
    checks.append((f"bessel {abs(lam / oracle - 1):.1e}", abs(lam / oracle - 1) <= 1e-6))
    report(7, checks, time.perf_counter() - t0, 20.0)


def test_criterion_8_large_p(report):
    t0 = time.perf_counter()
    spec = AnnulusSpec(1.0, 2.0, 2)
    checks = []
    for m in (1, 2):
        for row in large_p_bound_check(spec, m, [2.0, 5.0, 10.0]):
            checks.append((f"m={m} p={row.p} bound", row.nu_m <= row.bound))
        for l in range(1, m + 1):
            nu = nu_curve(spec, m, l, [2.0, 5.0, 10.0, 20.0])
            checks.append((f"m={m} nu_{l} decreasing", bool(np.all(np.diff(nu) < 0))))
    report(8, checks, time.perf_counter() - t0, 60.0)


def test_criterion_9_perturbed(report):
    t0 = time.perf_counter()
    spec = AnnulusSpec(1.0, 2.0, 2)
    radial = shoot_nodal(spec, 3.0, 2)
    deform = DeformationSpec.one_mode(1.0, 2.0, 2, 0.1)
    grid = PolarGrid(1.0, 2.0, 64, 64)
    v0 = radial.shape_at(grid.radii)[:, None]
    checks = []

    sol0 = newton_solve(radial, deform, grid, 0.0)
    err0 = np.max(np.abs(sol0.shape - v0))
    checks.append((f"t=0 {err0:.1e}", err0 <= 1e-8))

    sol = newton_solve(radial, deform, grid, 0.05)
    checks.append((f"iterations {max(sol.newton_iterations)}", max(sol.newton_iterations) <= 10))
    checks.append((f"residual {sol.residual_norm:.1e}", sol.residual_norm <= 1e-8))
    checks.append(("nodal count", nodal_count_2d(sol) == 2))
    expected = morse_index_at(spec, 3.0, 2).morse_index
    checks.append((f"morse index vs {expected}", morse_index_2d(sol) == expected))

    ratios = [np.max(np.abs(newton_solve(radial, deform, grid, t).shape - v0)) / t
              for t in (0.04, 0.02, 0.01)]
    checks.append((f"response ratios {ratios}", max(ratios) <= 1.25 * min(ratios)))

    t, p, errors = 0.1, 3.0, []
    for n in (16, 32, 64):
        g = PolarGrid(1.0, 2.0, n, 8)
        s = newton_solve(radial, DeformationSpec.dilation(1.0, 2.0), g, t)
        exact = (1 + t) ** (-2.0 / (p - 1.0)) * radial.shape_at(g.radii)
        errors.append(np.max(np.abs(s.shape - exact[:, None])))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    checks.append((f"dilation orders {np.round(orders, 2)}", bool(np.all(orders > 1.8))))
    report(9, checks, time.perf_counter() - t0, 180.0)


RUNS = [
    ["solve-radial", "--p", "3", "--m", "2"],
    ["spectrum", "--p", "1.5", "3", "5", "--m", "3"],
    ["scan-degeneracy", "--m", "2", "--p-min", "1.05", "--p-max", "20", "--j-max", "3"],
    ["morse", "--p", "1.5", "3", "5", "--m", "3", "--N", "3"],
    ["asymptotics", "--m", "2"],
    ["perturb", "--t", "0.05", "--n-r", "32", "--n-theta", "32", "--skip-morse"],
]


def test_criterion_10_determinism(report, tmp_path):
    t0 = time.perf_counter()
    checks = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        for i, args in enumerate(RUNS):
            dirs = [tmp_path / f"{i}_{k}" for k in range(2)]
            codes = [main([*args, "--out", str(d)]) for d in dirs]
            checks.append((f"{args[0]} exit", codes == [0, 0]))
            files = sorted(f.relative_to(dirs[0]) for f in dirs[0].rglob("*.csv"))
            checks.append((f"{args[0]} has csv", len(files) > 0))
            for f in files:
                same = (dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes()
                checks.append((f"{args[0]} {f}", same))
    report(10, checks, time.perf_counter() - t0)
