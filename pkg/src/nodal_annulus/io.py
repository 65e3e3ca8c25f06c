"""CSV / JSON artifacts.

Numbers are written with 17 significant digits in a fixed column order so
identical runs give byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "FLOAT_FMT",
    "write_csv",
    "write_json",
    "write_plot",
    "read_csv",
    "load_config",
    "profile_record",
    "export_profile",
    "export_spectrum",
    "export_degeneracies",
    "export_morse",
    "export_diagnostics",
    "export_bounds",
    "export_solution",
    "deformation_from_config",
    "DEFORMATION_KEYS",
]

FLOAT_FMT = "%.17g"
DEFORMATION_KEYS = ("a", "b", "p", "m", "t", "steps", "n_r", "n_theta", "inner", "outer")


def _fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return FLOAT_FMT % float(x)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """(header, float array) of a file written by write_csv."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_plot(outdir, name, x, y) -> Path:
    """Two-column whitespace-separated file under ``outdir/plot``."""
    path = Path(outdir) / "plot" / name
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{FLOAT_FMT % xi} {FLOAT_FMT % yi}" for xi, yi in zip(np.asarray(x, float), np.asarray(y, float))]
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return path


def load_config(path) -> dict:
    """JSON object of run parameters; keys use the long option names with underscores."""
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"config {path} must contain a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def profile_record(profile) -> dict:
    s = profile.spec
    return {"a": s.a, "b": s.b, "N": s.N, "p": profile.p, "m": profile.m,
            "zeros": list(profile.zeros), "sup_norm": profile.sup_norm,
            "log_sup_norm": profile.log_sup_norm, "alpha_star": profile.alpha_star,
            "boundary_residual": profile.boundary_residual}


def export_profile(profile, outdir, config=None, name="profile"):
    outdir = Path(outdir)
    rows = zip(profile.grid, profile.values, profile.slopes)
    csv = write_csv(outdir / f"{name}.csv", ["r", "v", "dv"], rows)
    sidecar = profile_record(profile)
    sidecar["config"] = config or {}
    js = write_json(outdir / f"{name}.json", sidecar)
    return csv, js


def export_spectrum(slices, outdir, config=None, eigenfunctions=True):
    outdir = Path(outdir)
    rows = [(s.p, l + 1, nu) for s in slices for l, nu in enumerate(s.eigenvalues)]
    out = [write_csv(outdir / "spectrum.csv", ["p", "l", "nu"], rows)]
    if eigenfunctions:
        for s in slices:
            L = len(s.eigenvalues)
            name = "eigenfunctions.csv" if len(slices) == 1 else f"eigenfunctions_p{_fmt(s.p)}.csv"
            cols = np.column_stack([s.radii, s.eigenfunctions.T])
            out.append(write_csv(outdir / name, ["r"] + [f"phi_{l}" for l in range(1, L + 1)], cols))
    out.append(write_json(outdir / "spectrum.json", {"config": config or {}}))
    return out


def export_degeneracies(scan, outdir, config=None):
    outdir = Path(outdir)
    rows = [(k, q.p_k, q.l, q.j, q.target, q.residual) for k, q in enumerate(scan.points, start=1)]
    csv = write_csv(outdir / "degeneracy.csv", ["k", "p_k", "l", "j", "target", "residual"], rows)
    js = write_json(outdir / "degeneracy.json", {
        "config": config or {},
        "near_collision": [q.near_collision for q in scan.points],
        "sign_changes": {f"{l},{j}": c for (l, j), c in sorted(scan.sign_changes.items())},
        "missing": [list(x) for x in scan.missing],
        "samples": int(scan.p_grid.size),
        "refinements": scan.refinements,
    })
    return csv, js


def export_morse(reports, outdir, config=None):
    outdir = Path(outdir)
    m = max(r.m for r in reports)
    rows = [(r.p, r.morse_index, *r.J_values, *([float("nan")] * (m - len(r.J_values)))) for r in reports]
    csv = write_csv(outdir / "morse.csv", ["p", "morse_index"] + [f"J_{l}" for l in range(1, m + 1)], rows)
    js = write_json(outdir / "morse.json", {
        "config": config or {},
        "lower_bound": [r.lower_bound for r in reports],
        "degenerate_boundary": [r.degenerate_boundary for r in reports],
    })
    return csv, js


def export_diagnostics(rows, outdir, config=None):
    outdir = Path(outdir)
    csv = write_csv(outdir / "diagnostics.csv", ["p", "supnorm_pow", "lambda_m", "err_profile", "nu_m"],
                    [(r.p, r.supnorm_pow, r.lambda_m, r.err_profile, r.nu_m) for r in rows])
    js = write_json(outdir / "diagnostics.json", {"config": config or {},
                                                 "err_slope": [r.err_slope for r in rows]})
    return csv, js


def export_bounds(rows, outdir, config=None):
    outdir = Path(outdir)
    csv = write_csv(outdir / "large_p.csv", ["p", "nu_m", "bound", "margin"],
                    [(r.p, r.nu_m, r.bound, r.margin) for r in rows])
    return csv, write_json(outdir / "large_p.json", {"config": config or {}})


def export_solution(solution, outdir, config=None, extra=None):
    outdir = Path(outdir)
    g = solution.grid
    values = solution.values
    rows = ((r, th, values[i, k]) for i, r in enumerate(g.radii) for k, th in enumerate(g.angles))
    csv = write_csv(outdir / "solution.csv", ["r", "theta", "v"], rows)
    record = {
        "config": config or {},
        "t": solution.t,
        "iterations": solution.newton_iterations,
        "residuals": solution.residual_history,
        "residual_norm": solution.residual_norm,
        "safety_bound": solution.safety,
        "min_det_j": float(np.min(solution.det_j)),
        "log_scale": solution.log_scale,
    }
    record.update(extra or {})
    return csv, write_json(outdir / "run.json", record)


def deformation_from_config(cfg: dict):
    """DeformationSpec from the {a, b, inner: [[k, c, d], ...], outer: [...]} keys."""
    from .perturbed import DeformationSpec

    def terms(key):
        raw = cfg.get(key) or []
        out = []
        for item in raw:
            if len(item) != 3:
                raise ValueError(f"{key} entries must be [k, c, d], got {item!r}")
            out.append((int(item[0]), float(item[1]), float(item[2])))
        return tuple(out)

    return DeformationSpec(float(cfg["a"]), float(cfg["b"]), inner=terms("inner"), outer=terms("outer"))
