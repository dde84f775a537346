"""Numba-compiled RK4 stepping kernel for the similarity-variable system.

Semantically identical to the numpy reference path in evolver.Evolver
(a test pins the agreement); exists because the hot loop runs tens of
thousands of steps on ~1e3-node arrays, where per-call numpy overhead
dominates.  Falls back to the reference path when numba is missing.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - environment without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


MODE_FREE = 0
MODE_LINEARIZED = 1
MODE_NONLINEAR = 2
MODE_TOTAL = 3

# eta(y)/y^3 and sin(y)/y series coefficients (ascending, in y^2)
ETA3 = np.array(
    [
        4.0 / 3.0,
        -4.0 / 15.0,
        8.0 / 315.0,
        -4.0 / 2835.0,
        2048.0 / 39916800.0,
        -8192.0 / 6227020800.0,
        32768.0 / 1307674368000.0,
        -131072.0 / 355687428096000.0,
    ]
)
SINC = np.array(
    [1.0, -1.0 / 6.0, 1.0 / 120.0, -1.0 / 5040.0, 1.0 / 362880.0]
)


@njit(cache=True)
def _eta3(y):
    if abs(y) < 0.1:
        y2 = y * y
        acc = 0.0
        for i in range(len(ETA3) - 1, -1, -1):
            acc = acc * y2 + ETA3[i]
        return acc
    return (2.0 * y - np.sin(2.0 * y)) / (y * y * y)


@njit(cache=True)
def _sinc(y):
    if abs(y) < 0.1:
        y2 = y * y
        acc = 0.0
        for i in range(len(SINC) - 1, -1, -1):
            acc = acc * y2 + SINC[i]
        return acc
    return np.sin(y) / y


@njit(cache=True)
def _rhs(u1, u2, f1, f2, rho, h, n, V, cosw, qfac, mode,
         d1p, d1e, d2p, d2e):
    m = u1.shape[0] - 1
    c1 = 1.0 / (12.0 * h)
    c2 = c1 / h
    nm1 = n - 1.0

    for i in range(2, m - 1):
        d1a = (u1[i - 2] - 8.0 * u1[i - 1] + 8.0 * u1[i + 1] - u1[i + 2]) * c1
        d2a = (
            -u1[i - 2] + 16.0 * u1[i - 1] - 30.0 * u1[i] + 16.0 * u1[i + 1] - u1[i + 2]
        ) * c2
        d1b = (u2[i - 2] - 8.0 * u2[i - 1] + 8.0 * u2[i + 1] - u2[i + 2]) * c1
        f1[i] = -rho[i] * d1a - u1[i] + u2[i]
        f2[i] = d2a + nm1 * d1a / rho[i] - rho[i] * d1b - 2.0 * u2[i]

    # origin: Lambda vanishes, Delta f = n f''(0) by even reflection
    d2a = (-2.0 * u1[2] + 32.0 * u1[1] - 30.0 * u1[0]) * c2
    f1[0] = -u1[0] + u2[0]
    f2[0] = n * d2a - 2.0 * u2[0]
    # node 1 with even ghost
    d1a = (u1[1] - 8.0 * u1[0] + 8.0 * u1[2] - u1[3]) * c1
    d2a = (16.0 * u1[0] - 31.0 * u1[1] + 16.0 * u1[2] - u1[3]) * c2
    d1b = (u2[1] - 8.0 * u2[0] + 8.0 * u2[2] - u2[3]) * c1
    f1[1] = -rho[1] * d1a - u1[1] + u2[1]
    f2[1] = d2a + nm1 * d1a / rho[1] - rho[1] * d1b - 2.0 * u2[1]
    # outer two nodes, interior-biased one-sided rows
    for row in range(2):
        i = m - 1 + row
        d1a = 0.0
        d1b = 0.0
        d2a = 0.0
        for j in range(5):
            w = d1p[j] if row == 0 else d1e[j]
            d1a += w * u1[m - 4 + j]
            d1b += w * u2[m - 4 + j]
        for j in range(6):
            w = d2p[j] if row == 0 else d2e[j]
            d2a += w * u1[m - 5 + j]
        f1[i] = -rho[i] * d1a - u1[i] + u2[i]
        f2[i] = d2a + nm1 * d1a / rho[i] - rho[i] * d1b - 2.0 * u2[i]

    if mode == 1 or mode == 2:
        for i in range(m + 1):
            f2[i] += V[i] * u1[i]
    if mode == 2:
        half = 0.5 * (n - 3.0)
        for i in range(m + 1):
            u = u1[i]
            y = rho[i] * u
            s = _sinc(y)
            f2[i] += half * (cosw[i] * _eta3(y) * u * u * u + qfac[i] * s * s * u * u)
    if mode == 3:
        half = 0.5 * (n - 3.0)
        for i in range(m + 1):
            u = u1[i]
            f2[i] += half * _eta3(rho[i] * u) * u * u * u


@njit(cache=True)
def advance(arr, nsub, dtau, rho, h, n, V, cosw, qfac, mode,
            d1p, d1e, d2p, d2e, k1, k2, k3, k4, tmp):
    """nsub RK4 steps in place; returns -1, or the substep that went non-finite."""
    m1 = arr.shape[1]
    for step in range(nsub):
        _rhs(arr[0], arr[1], k1[0], k1[1], rho, h, n, V, cosw, qfac, mode,
             d1p, d1e, d2p, d2e)
        for c in range(2):
            for i in range(m1):
                tmp[c, i] = arr[c, i] + 0.5 * dtau * k1[c, i]
        _rhs(tmp[0], tmp[1], k2[0], k2[1], rho, h, n, V, cosw, qfac, mode,
             d1p, d1e, d2p, d2e)
        for c in range(2):
            for i in range(m1):
                tmp[c, i] = arr[c, i] + 0.5 * dtau * k2[c, i]
        _rhs(tmp[0], tmp[1], k3[0], k3[1], rho, h, n, V, cosw, qfac, mode,
             d1p, d1e, d2p, d2e)
        for c in range(2):
            for i in range(m1):
                tmp[c, i] = arr[c, i] + dtau * k3[c, i]
        _rhs(tmp[0], tmp[1], k4[0], k4[1], rho, h, n, V, cosw, qfac, mode,
             d1p, d1e, d2p, d2e)
        bad = False
        for c in range(2):
            for i in range(m1):
                arr[c, i] += (dtau / 6.0) * (
                    k1[c, i] + 2.0 * k2[c, i] + 2.0 * k3[c, i] + k4[c, i]
                )
                if not np.isfinite(arr[c, i]):
                    bad = True
        if bad:
            return step
    return -1
