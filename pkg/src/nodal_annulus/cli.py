"""Command-line front end.

    python -m nodal_annulus solve-radial --a 1 --b 2 --N 2 --p 3 --m 2

Every subcommand accepts ``--config FILE`` (a JSON object keyed by the
long option names); flags given on the command line override it.  Output
goes to ``--out``, else $NODAL_ANNULUS_OUT, else ./nodal_out.  Exit codes:
0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .asymptotics import large_p_bound_check, p_to_1_diagnostics
from .degeneracy import DegeneracyWarning, find_degeneracies, morse_index
from .errors import SolverError
from .perturbed import (PolarGrid, morse_index_2d, newton_solve, nodal_count_2d,
                        safety_bound)
from .radial import AnnulusSpec, check_exponent, check_zones, nehari_minimize, shoot_nodal
from .spectrum import DEFAULT_INTERVALS, assemble_pencil, auxiliary_diagnostics, eigen_smallest

ENV_OUT = "NODAL_ANNULUS_OUT"
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

COMMON = {"a": 1.0, "b": 2.0, "N": 2, "m": 2, "jobs": 1, "intervals": DEFAULT_INTERVALS,
          "points": 2049}
DEFAULTS = {
    "solve-radial": {"p": 3.0, "method": "shooting"},
    "spectrum": {"p": [3.0], "L": None},
    "scan-degeneracy": {"p_min": 1.05, "p_max": 20.0, "j_max": 3, "samples": 64, "refine": False},
    "morse": {"p": [3.0]},
    "asymptotics": {"p_small": [1.1, 1.01, 1.001], "p_large": [2.0, 5.0, 10.0]},
    "perturb": {"p": 3.0, "t": 0.05, "steps": 5, "n_r": 64, "n_theta": 64,
                "inner": [], "outer": [[2, 0.1, 0.0]], "known_degeneracies": [],
                "skip_morse": False},
}


class InputError(ValueError):
    pass


def _parser():
    top = argparse.ArgumentParser(prog="nodal-annulus", description=__doc__.split("\n")[0])
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=Path, help="JSON file of parameters")
        sp.add_argument("--out", type=Path, help=f"output directory (default ${ENV_OUT} or ./nodal_out)")
        sp.add_argument("--a", type=float)
        sp.add_argument("--b", type=float)
        sp.add_argument("--N", type=int)
        sp.add_argument("--m", type=int)
        sp.add_argument("--jobs", type=int, help="worker processes for independent p samples")
        sp.add_argument("--intervals", type=int, help="radial intervals of the eigenvalue grid")
        sp.add_argument("--points", type=int, help="profile samples")
        return sp

    sp = add("solve-radial", "radial nodal solution")
    sp.add_argument("--p", type=float)
    sp.add_argument("--method", choices=["shooting", "nehari"])

    sp = add("spectrum", "lowest eigenvalues of the radial linearization")
    sp.add_argument("--p", type=float, nargs="+")
    sp.add_argument("--L", type=int)

    sp = add("scan-degeneracy", "degeneracy exponents p_k")
    sp.add_argument("--p-min", type=float)
    sp.add_argument("--p-max", type=float)
    sp.add_argument("--j-max", type=int)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--refine", action="store_true", default=None)

    sp = add("morse", "Morse index table")
    sp.add_argument("--p", type=float, nargs="+")

    sp = add("asymptotics", "p -> 1 diagnostics and large-p bound")
    sp.add_argument("--p-small", type=float, nargs="+")
    sp.add_argument("--p-large", type=float, nargs="+")

    sp = add("perturb", "continuation onto a deformed annulus (N = 2)")
    sp.add_argument("--p", type=float)
    sp.add_argument("--t", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--n-r", type=int)
    sp.add_argument("--n-theta", type=int)
    sp.add_argument("--inner", type=float, nargs=3, action="append", metavar=("K", "C", "D"))
    sp.add_argument("--outer", type=float, nargs=3, action="append", metavar=("K", "C", "D"))
    sp.add_argument("--known-degeneracies", type=float, nargs="*")
    sp.add_argument("--skip-morse", action="store_true", default=None)
    return top


def resolve_config(args) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[args.command])
    if args.config is not None:
        try:
            cfg.update(io.load_config(args.config))
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
    for key, value in vars(args).items():
        if key in ("command", "config", "out") or value is None:
            continue
        cfg[key] = value
    out = args.out or cfg.pop("out", None) or os.environ.get(ENV_OUT) or "nodal_out"
    cfg.pop("out", None)
    cfg["command"] = args.command
    return cfg, Path(out)


def _spec(cfg):
    try:
        a, b, N, m = float(cfg["a"]), float(cfg["b"]), cfg["N"], cfg["m"]
        if N != int(N):
            raise ValueError(f"N must be an integer >= 2, got {N!r}")
        spec = AnnulusSpec(a, b, int(N))
        check_zones(m)
        for key in ("p", "p_min"):
            if key in cfg:
                for p in np.atleast_1d(cfg[key]):
                    check_exponent(float(p))
        if int(cfg["jobs"]) < 1:
            raise ValueError("jobs must be >= 1")
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    return spec


def _listed(x):
    return [float(v) for v in np.atleast_1d(x)]


def cmd_solve_radial(cfg, out, spec):
    p, m = float(cfg["p"]), int(cfg["m"])
    if cfg["method"] == "nehari":
        prof = nehari_minimize(spec, p, m, n_points=int(cfg["points"])).profile
    else:
        prof = shoot_nodal(spec, p, m, n_points=int(cfg["points"]))
    files = list(io.export_profile(prof, out, cfg))
    files.append(io.write_plot(out, "profile.dat", prof.grid, prof.values))
    files.append(io.write_plot(out, "profile_shape.dat", prof.grid, prof.shape))
    print(f"solved: m={m} zones, zeros=[{', '.join(f'{z:.12g}' for z in prof.zeros)}], sup_norm={prof.sup_norm:.12g}")
    return files


def cmd_spectrum(cfg, out, spec):
    m = int(cfg["m"])
    L = int(cfg["L"] or m + 1)
    slices, aux = [], []
    for p in _listed(cfg["p"]):
        prof = shoot_nodal(spec, p, m, n_points=int(cfg["points"]))
        slices.append(eigen_smallest(assemble_pencil(prof, int(cfg["intervals"])), L))
        rep = auxiliary_diagnostics(prof)
        aux.append({"p": p, "z_zeros": rep.z_zeros, "zeta_zeros": rep.zeta_zeros})
    files = io.export_spectrum(slices, out, cfg)
    files.append(io.write_json(out / "auxiliary.json", {"config": cfg, "auxiliary": aux}))
    for l in range(L):
        files.append(io.write_plot(out, f"nu_{l + 1}.dat", [s.p for s in slices],
                                   [s.eigenvalues[l] for s in slices]))
        files.append(io.write_plot(out, f"phi_{l + 1}.dat", slices[0].radii, slices[0].eigenfunctions[l]))
    for s in slices:
        print(f"p={s.p:g}: nu = {', '.join(f'{x:.10g}' for x in s.eigenvalues)}")
    return files


def cmd_scan_degeneracy(cfg, out, spec):
    m = int(cfg["m"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegeneracyWarning)
        scan = find_degeneracies(spec, m, (float(cfg["p_min"]), float(cfg["p_max"])), int(cfg["j_max"]),
                                 samples=int(cfg["samples"]), refine=bool(cfg["refine"]),
                                 intervals=int(cfg["intervals"]), jobs=int(cfg["jobs"]))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    files = list(io.export_degeneracies(scan, out, cfg))
    for l in range(m):
        files.append(io.write_plot(out, f"nu_{l + 1}.dat", scan.p_grid, scan.nu[:, l]))
    files.append(io.write_plot(out, "p_k.dat", [q.p_k for q in scan], [q.target for q in scan]))
    for k, q in enumerate(scan, start=1):
        flag = " (near collision)" if q.near_collision else ""
        print(f"p_{k} = {q.p_k:.12g}  l={q.l} j={q.j} target={q.target:g}{flag}")
    if not scan.points:
        print("no degeneracy exponents in range")
    return files


def cmd_morse(cfg, out, spec):
    m = int(cfg["m"])
    reports = []
    for p in _listed(cfg["p"]):
        prof = shoot_nodal(spec, p, m, n_points=int(cfg["points"]))
        sl = eigen_smallest(assemble_pencil(prof, int(cfg["intervals"])), m + 1)
        reports.append(morse_index(sl, spec))
    files = list(io.export_morse(reports, out, cfg))
    files.append(io.write_plot(out, "morse.dat", [r.p for r in reports], [r.morse_index for r in reports]))
    for r in reports:
        print(f"p={r.p:g}: morse_index={r.morse_index} (lower bound {r.lower_bound})"
              + (" [degenerate boundary]" if r.degenerate_boundary else ""))
    return files


def cmd_asymptotics(cfg, out, spec):
    m = int(cfg["m"])
    rows = p_to_1_diagnostics(spec, m, _listed(cfg["p_small"]), intervals=int(cfg["intervals"]))
    bounds = large_p_bound_check(spec, m, _listed(cfg["p_large"]), intervals=int(cfg["intervals"]))
    files = list(io.export_diagnostics(rows, out, cfg)) + list(io.export_bounds(bounds, out, cfg))
    files.append(io.write_plot(out, "supnorm_pow.dat", [r.p for r in rows], [r.supnorm_pow for r in rows]))
    files.append(io.write_plot(out, "err_profile.dat", [r.p for r in rows], [r.err_profile for r in rows]))
    files.append(io.write_plot(out, "nu_m_small_p.dat", [r.p for r in rows], [r.nu_m for r in rows]))
    files.append(io.write_plot(out, "nu_m_large_p.dat", [r.p for r in bounds], [r.nu_m for r in bounds]))
    files.append(io.write_plot(out, "bound_large_p.dat", [r.p for r in bounds], [r.bound for r in bounds]))
    for r in rows:
        print(f"p={r.p:g}: |v|^(p-1)={r.supnorm_pow:.10g} lambda_m={r.lambda_m:.10g} "
              f"err={r.err_profile:.3e} nu_m={r.nu_m:.6g}")
    for r in bounds:
        print(f"p={r.p:g}: nu_m={r.nu_m:.8g} <= {r.bound:.8g}: {r.nu_m <= r.bound}")
    return files


def cmd_perturb(cfg, out, spec):
    if spec.N != 2:
        raise InputError("perturb is implemented for N = 2 only")
    p, m = float(cfg["p"]), int(cfg["m"])
    try:
        grid = PolarGrid(spec.a, spec.b, int(cfg["n_r"]), int(cfg["n_theta"]))
        deform = io.deformation_from_config({**cfg, "a": spec.a, "b": spec.b})
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad deformation config: {exc}") from exc
    bound = safety_bound(deform)
    t = float(cfg["t"])
    if abs(t) > bound:
        raise InputError(f"|t| = {abs(t):g} exceeds the safety bound {bound:g}")
    prof = shoot_nodal(spec, p, m, n_points=int(cfg["points"]))
    sol = newton_solve(prof, deform, grid, t, steps=int(cfg["steps"]),
                       known_degeneracies=_listed(cfg["known_degeneracies"] or []), safety=bound)
    extra = {"nodal_count": nodal_count_2d(sol)}
    if not cfg["skip_morse"]:
        extra["morse_index"] = morse_index_2d(sol)
    files = list(io.export_solution(sol, out, cfg, extra))
    files.append(io.write_plot(out, "trace_theta0.dat", grid.radii, sol.values[:, 0]))
    k = grid.n_theta // 4
    files.append(io.write_plot(out, "trace_theta_quarter.dat", grid.radii, sol.values[:, k]))
    files.append(io.write_plot(out, "radial_reference.dat", prof.grid, prof.values))
    print(f"t={t:g}: iterations per step {sol.newton_iterations}, residual {sol.residual_norm:.3e}, "
          f"nodal regions {extra['nodal_count']}"
          + (f", morse index {extra['morse_index']}" if "morse_index" in extra else ""))
    return files


COMMANDS = {
    "solve-radial": cmd_solve_radial,
    "spectrum": cmd_spectrum,
    "scan-degeneracy": cmd_scan_degeneracy,
    "morse": cmd_morse,
    "asymptotics": cmd_asymptotics,
    "perturb": cmd_perturb,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg, out = resolve_config(args)
        spec = _spec(cfg)
        files = COMMANDS[args.command](cfg, out, spec)
    except InputError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
