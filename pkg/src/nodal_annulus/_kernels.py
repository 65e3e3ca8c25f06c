"""Compiled inner loops.

Shooting and eigenvalue scans call these thousands of times, so the
integrator and the Sturm-sequence routines live here under numba.
"""

import numpy as np
from numba import njit

# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_MAXSTEPS = 2


@njit(cache=True)
def _accel(r, w, z, damping, p, mu):
    return -damping / r * z - mu * np.abs(w) ** (p - 1.0) * w


@njit(cache=True)
def integrate_radial(r0, w0, z0, r_out, damping, p, mu, rtol, atol, max_steps):
    """Integrate w'' + damping/r w' + mu |w|^(p-1) w = 0 from r0.

    Returns (w, z, sign_changes, status, r_last); w and z are sampled
    exactly at r_out (ascending, r_out[0] >= r0).  sign_changes counts
    strict sign changes of w over accepted steps.
    """
    n_out = r_out.shape[0]
    w_out = np.empty(n_out)
    z_out = np.empty(n_out)
    r = r0
    w = w0
    z = z0
    k = 0
    while k < n_out and r_out[k] <= r:
        w_out[k] = w
        z_out[k] = z
        k += 1
    if k == n_out:
        return w_out, z_out, 0, STATUS_OK, r

    last_sign = 0.0
    if w != 0.0:
        last_sign = np.sign(w)
    changes = 0
    span = r_out[n_out - 1] - r0
    h = 1e-3 * span
    steps = 0
    k1w = z
    k1z = _accel(r, w, z, damping, p, mu)
    while k < n_out:
        if steps >= max_steps:
            return w_out, z_out, changes, STATUS_MAXSTEPS, r
        target = r_out[k]
        hit = False
        h_prop = h
        if r + h >= target - 1e-14 * span:
            h = target - r
            hit = True
        k2w = z + h * _A21 * k1z
        k2z = _accel(r + _C2 * h, w + h * _A21 * k1w, k2w, damping, p, mu)
        yw = w + h * (_A31 * k1w + _A32 * k2w)
        yz = z + h * (_A31 * k1z + _A32 * k2z)
        k3w = yz
        k3z = _accel(r + _C3 * h, yw, yz, damping, p, mu)
        yw = w + h * (_A41 * k1w + _A42 * k2w + _A43 * k3w)
        yz = z + h * (_A41 * k1z + _A42 * k2z + _A43 * k3z)
        k4w = yz
        k4z = _accel(r + _C4 * h, yw, yz, damping, p, mu)
        yw = w + h * (_A51 * k1w + _A52 * k2w + _A53 * k3w + _A54 * k4w)
        yz = z + h * (_A51 * k1z + _A52 * k2z + _A53 * k3z + _A54 * k4z)
        k5w = yz
        k5z = _accel(r + _C5 * h, yw, yz, damping, p, mu)
        yw = w + h * (_A61 * k1w + _A62 * k2w + _A63 * k3w + _A64 * k4w + _A65 * k5w)
        yz = z + h * (_A61 * k1z + _A62 * k2z + _A63 * k3z + _A64 * k4z + _A65 * k5z)
        k6w = yz
        k6z = _accel(r + h, yw, yz, damping, p, mu)
        wn = w + h * (_B1 * k1w + _B3 * k3w + _B4 * k4w + _B5 * k5w + _B6 * k6w)
        zn = z + h * (_B1 * k1z + _B3 * k3z + _B4 * k4z + _B5 * k5z + _B6 * k6z)
        k7w = zn
        k7z = _accel(r + h, wn, zn, damping, p, mu)
        ew = h * (_E1 * k1w + _E3 * k3w + _E4 * k4w + _E5 * k5w + _E6 * k6w + _E7 * k7w)
        ez = h * (_E1 * k1z + _E3 * k3z + _E4 * k4z + _E5 * k5z + _E6 * k6z + _E7 * k7z)
        sw = atol + rtol * max(abs(w), abs(wn))
        sz = atol + rtol * max(abs(z), abs(zn))
        err = np.sqrt(0.5 * ((ew / sw) ** 2 + (ez / sz) ** 2))
        steps += 1
        if not (np.isfinite(wn) and np.isfinite(zn) and np.isfinite(err)):
            if h < 1e-15 * span:
                return w_out, z_out, changes, STATUS_NONFINITE, r
            h *= 0.25
            continue
        if err <= 1.0:
            r = target if hit else r + h
            w = wn
            z = zn
            k1w = k7w
            k1z = k7z
            if wn != 0.0:
                s = np.sign(wn)
                if last_sign != 0.0 and s != last_sign:
                    changes += 1
                last_sign = s
            if hit:
                w_out[k] = w
                z_out[k] = z
                k += 1
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
            h_new = h * fac
        else:
            h_new = h * max(0.2, 0.9 * err ** -0.2)
        if hit and err <= 1.0:
            # output clipping must not shrink the step for the next segment
            h = max(h_new, h_prop)
        else:
            h = h_new
    return w_out, z_out, changes, STATUS_OK, r


@njit(cache=True)
def sturm_count(diag, off2, x):
    """Number of eigenvalues of the symmetric tridiagonal matrix below x."""
    n = diag.shape[0]
    count = 0
    q = diag[0] - x
    if q < 0.0:
        count += 1
    for i in range(1, n):
        if q == 0.0:
            q = 1e-300
        q = diag[i] - x - off2[i - 1] / q
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def bisect_lowest(diag, off2, n_eig, lo, hi, rtol):
    """The n_eig algebraically smallest eigenvalues by Sturm bisection."""
    out = np.empty(n_eig)
    left = lo
    for l in range(n_eig):
        a = left
        b = hi
        for _ in range(400):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if b - a <= rtol * max(1.0, abs(mid)):
                break
            if sturm_count(diag, off2, mid) >= l + 1:
                b = mid
            else:
                a = mid
        out[l] = 0.5 * (a + b)
        left = a
    return out
