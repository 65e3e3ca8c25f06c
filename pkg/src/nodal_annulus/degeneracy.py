"""Eigenvalue curves p -> nu_l(p), degeneracy exponents and Morse indices.

The radial solution v_p is degenerate exactly when some radial eigenvalue
hits a spherical-harmonic level, nu_l(p) = -j(N-2+j).  Only j >= 2 (any
l) and j = 1 with l = m can occur; the curves are scanned for sign
changes of nu_l + j(N-2+j) and each bracket is refined by Brent's method.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import InconsistentSpectrumError, SolverError
from .radial import AnnulusSpec, check_exponent, check_zones
from .spectrum import DEFAULT_INTERVALS, SpectrumSlice, radial_spectrum

__all__ = [
    "DegeneracyPoint",
    "DegeneracyScan",
    "MorseReport",
    "level",
    "admissible_pairs",
    "nu_curve",
    "find_degeneracies",
    "spherical_multiplicity",
    "morse_index",
    "morse_index_at",
    "DegeneracyWarning",
]

DEFAULT_SAMPLES = 64
ROOT_XTOL = 1e-10
COLLISION_GAP = 1e-4
BOUNDARY_TOL = 1e-9


class DegeneracyWarning(UserWarning):
    """An expected crossing was not found inside the scanned range."""


@dataclass(frozen=True)
class DegeneracyPoint:
    p_k: float
    l: int
    j: int
    target: float
    residual: float
    near_collision: bool = False


@dataclass(frozen=True, eq=False)
class DegeneracyScan:
    """Roots plus the coarse table they were bracketed from."""

    points: list
    p_grid: np.ndarray
    nu: np.ndarray                     # (len(p_grid), m)
    sign_changes: dict                 # (l, j) -> count on p_grid
    refinements: int = 0
    missing: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]


@dataclass(frozen=True)
class MorseReport:
    p: float
    m: int
    N: int
    J_values: tuple
    morse_index: int
    degenerate_boundary: bool

    @property
    def lower_bound(self) -> int:
        return (self.m - 1) * (self.N + 1) + 1


def level(N: int, j: int) -> float:
    """Eigenvalue of the Laplace-Beltrami operator on S^(N-1), sign flipped: -j(N-2+j)."""
    return -float(j * (N - 2 + j))


def admissible_pairs(m: int, j_max: int):
    """(l, j) pairs that can produce a degeneracy: j >= 2, or j = 1 with l = m."""
    m = check_zones(m)
    if j_max < 1:
        raise ValueError(f"j_max must be >= 1, got {j_max}")
    return [(l, j) for j in range(1, j_max + 1) for l in range(1, m + 1) if j >= 2 or l == m]


def _eigenvalues(args):
    spec, p, m, L, intervals = args
    try:
        return radial_spectrum(spec, p, m, L=L, intervals=intervals).eigenvalues
    except SolverError as exc:
        raise type(exc)(f"at p = {p!r}: {exc}") from exc


def _check_grid(p_grid):
    p_grid = np.asarray(p_grid, dtype=float)
    if p_grid.ndim != 1 or p_grid.size == 0:
        raise ValueError("p_grid must be a nonempty 1-d sequence")
    for p in p_grid:
        check_exponent(p)
    if np.any(np.diff(p_grid) <= 0):
        raise ValueError("p_grid must be strictly increasing")
    return p_grid


def _table(spec, m, p_grid, L, intervals, jobs):
    tasks = [(spec, float(p), m, L, intervals) for p in p_grid]
    if jobs and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_eigenvalues, tasks))
    else:
        rows = [_eigenvalues(t) for t in tasks]
    return np.array(rows)


def nu_curve(spec: AnnulusSpec, m: int, l: int, p_grid, intervals: int = DEFAULT_INTERVALS,
             jobs: int = 1) -> np.ndarray:
    """nu_l(p) at each p of a strictly increasing grid (independent solves, input order)."""
    m = check_zones(m)
    if not 1 <= l:
        raise ValueError(f"eigenvalue index must be >= 1, got {l}")
    p_grid = _check_grid(p_grid)
    return _table(spec, m, p_grid, max(l, m + 1), intervals, jobs)[:, l - 1]


def _geometric(p_min, p_max, n):
    return 1.0 + np.geomspace(p_min - 1.0, p_max - 1.0, n)


def _count_changes(nu, pairs, N):
    out = {}
    for l, j in pairs:
        g = nu[:, l - 1] - level(N, j)
        out[(l, j)] = int(np.sum(np.sign(g[:-1]) * np.sign(g[1:]) < 0))
    return out


def find_degeneracies(spec: AnnulusSpec, m: int, p_range, j_max: int,
                      samples: int = DEFAULT_SAMPLES, refine: bool = False,
                      intervals: int = DEFAULT_INTERVALS, xtol: float = ROOT_XTOL,
                      collision_gap: float = COLLISION_GAP, jobs: int = 1,
                      max_refinements: int = 4) -> DegeneracyScan:
    """All admissible crossings nu_l(p) = -j(N-2+j) with p in p_range, sorted by p.

    The curves are sampled at ``samples`` points geometric in p - 1; with
    ``refine`` the sampling is doubled (by inserting midpoints) until the
    number of sign changes is the same for two successive grids.  Roots
    closer than ``collision_gap`` are all kept and flagged.  A pair with
    l = m, j = 1 that shows no crossing triggers a DegeneracyWarning.
    """
    m = check_zones(m)
    p_min, p_max = (float(x) for x in p_range)
    check_exponent(p_min)
    if not p_max > p_min:
        raise ValueError(f"empty exponent range ({p_min}, {p_max})")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    pairs = admissible_pairs(m, j_max)
    L = m
    N = spec.N

    p_grid = _geometric(p_min, p_max, samples)
    nu = _table(spec, m, p_grid, L + 1, intervals, jobs)[:, :L]
    counts = _count_changes(nu, pairs, N)
    refinements = 0
    if refine:
        while refinements < max_refinements:
            mids = 1.0 + np.sqrt((p_grid[:-1] - 1.0) * (p_grid[1:] - 1.0))
            nu_mid = _table(spec, m, mids, L + 1, intervals, jobs)[:, :L]
            grid2 = np.empty(2 * p_grid.size - 1)
            grid2[0::2], grid2[1::2] = p_grid, mids
            nu2 = np.empty((grid2.size, L))
            nu2[0::2], nu2[1::2] = nu, nu_mid
            counts2 = _count_changes(nu2, pairs, N)
            p_grid, nu, refinements = grid2, nu2, refinements + 1
            stable = counts2 == counts
            counts = counts2
            if stable:
                break

    cache = {}

    def value(p, l):
        if p not in cache:
            cache[p] = _eigenvalues((spec, p, m, L + 1, intervals))
        return cache[p][l - 1]

    points, missing = [], []
    for l, j in pairs:
        target = level(N, j)
        g = nu[:, l - 1] - target
        flips = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
        if flips.size == 0 and l == m:
            missing.append((l, j))
            warnings.warn(f"no crossing of nu_{l} with level {target:g} (j = {j}) in "
                          f"({p_min}, {p_max}); the range may be too small", DegeneracyWarning,
                          stacklevel=2)
        for i in flips:
            lo, hi = float(p_grid[i]), float(p_grid[i + 1])
            pk = optimize.brentq(lambda p: value(p, l) - target, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
            points.append([pk, l, j, target, abs(value(pk, l) - target)])
        for i in np.nonzero(g == 0.0)[0]:
            points.append([float(p_grid[i]), l, j, target, 0.0])

    points.sort(key=lambda q: (q[0], q[1], q[2]))
    flagged = [False] * len(points)
    for i in range(len(points) - 1):
        if points[i + 1][0] - points[i][0] <= collision_gap:
            flagged[i] = flagged[i + 1] = True
    result = [DegeneracyPoint(p_k=q[0], l=q[1], j=q[2], target=q[3], residual=q[4], near_collision=f)
              for q, f in zip(points, flagged)]
    return DegeneracyScan(points=result, p_grid=p_grid, nu=nu, sign_changes=counts,
                          refinements=refinements, missing=missing)


def spherical_multiplicity(N: int, j: int) -> int:
    """Dimension of the space of degree-j spherical harmonics on S^(N-1)."""
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N!r}")
    if int(j) != j or j < 0:
        raise ValueError(f"j must be an integer >= 0, got {j!r}")
    N, j = int(N), int(j)
    if j == 0:
        return 1
    if N == 2:
        return 2
    num = (N + 2 * j - 2) * math.factorial(N + j - 3)
    den = math.factorial(N - 2) * math.factorial(j)
    q, r = divmod(num, den)
    assert r == 0
    return q


def morse_index(slice: SpectrumSlice, spec: AnnulusSpec, m: int | None = None,
                boundary_tol: float = BOUNDARY_TOL) -> MorseReport:
    """Morse index of v_p from the m negative radial eigenvalues.

    Each nu_l < 0 contributes every spherical harmonic of order
    j < J_l = (sqrt((N-2)^2 - 4 nu_l) - N + 2) / 2.  J_l within
    ``boundary_tol`` of an integer raises the degenerate_boundary flag.

    Raises
    ------
    InconsistentSpectrumError
        The slice has fewer than m negative eigenvalues.
    """
    m = slice.m if m is None else check_zones(m)
    N = spec.N
    nu = np.asarray(slice.eigenvalues)
    negative = nu[nu < 0]
    if negative.size < m or nu.size < m:
        raise InconsistentSpectrumError(
            f"expected {m} negative eigenvalues, found {negative.size} in {nu.tolist()}")
    J = [(math.sqrt((N - 2) ** 2 - 4.0 * float(x)) - N + 2) / 2.0 for x in nu[:m]]
    index = 0
    boundary = False
    for Jl in J:
        jr = round(Jl)
        if abs(Jl - jr) <= boundary_tol:
            boundary = True
            top = jr            # strict inequality excludes j = J_l
        else:
            top = math.ceil(Jl)
        index += sum(spherical_multiplicity(N, j) for j in range(top))
    return MorseReport(p=slice.p, m=m, N=N, J_values=tuple(J), morse_index=index,
                       degenerate_boundary=boundary)


def morse_index_at(spec: AnnulusSpec, p: float, m: int,
                   intervals: int = DEFAULT_INTERVALS) -> MorseReport:
    """Solve, assemble and report in one call."""
    return morse_index(radial_spectrum(spec, p, m, L=m + 1, intervals=intervals), spec)
