import functools

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import j0, y0

from nodal_annulus import AnnulusSpec, shoot_nodal


@pytest.fixture(scope="session")
def unit_annulus():
    return AnnulusSpec(1.0, 2.0, 2)


@functools.lru_cache(maxsize=None)
def cached_profile(a, b, N, p, m):
    return shoot_nodal(AnnulusSpec(a, b, N), p, m)


@pytest.fixture(scope="session")
def profile():
    """Shared radial solutions keyed by (a, b, N, p, m)."""
    return cached_profile


def bessel_cross_roots(a, b, count):
    """Radial Dirichlet eigenvalues of the Laplacian on A(a, b) in R^2.

    Roots k of J0(ka) Y0(kb) - J0(kb) Y0(ka), bracketed on a fine scan.
    """
    f = lambda k: j0(k * a) * y0(k * b) - j0(k * b) * y0(k * a)
    ks = np.linspace(0.05 / (b - a), (count + 2) * np.pi / (b - a), 20000)
    v = f(ks)
    idx = np.nonzero(v[:-1] * v[1:] < 0)[0][:count]
    return np.array([brentq(f, ks[i], ks[i + 1], xtol=1e-15, rtol=1e-15) for i in idx]) ** 2
