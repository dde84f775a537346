"""Frobenius branches, connection mismatch, scan, resolvent."""

import mpmath as mp
import numpy as np
import pytest

from similab.errors import ConfigError, ResonanceError
from similab.spectral import (
    FrobeniusSolution,
    SpectralProblem,
    connection_mismatch,
    eigenvalue_scan,
    gauge_ode_residual,
    potential_vt,
    resolvent_solve,
    resonance_obstruction,
    series_at_one,
    series_at_zero,
)


def _mp_residual(sol: FrobeniusSolution, r, n, lam):
    """ODE residual of the truncated series in 50-digit arithmetic."""
    with mp.workdps(50):
        t = mp.mpf(r) - sol.center
        u = up = upp = mp.mpc(0)
        for cm in sol.coeffs[::-1]:
            upp = upp * t + 2 * up
            up = up * t + u
            u = u * t + mp.mpc(cm)
        if sol.index == 1:
            v, vp, vpp = t * u, u + t * up, 2 * up + t * upp
        else:
            v, vp, vpp = u, up, upp
        rr = mp.mpf(r)
        a2 = n - 4
        vt = (n - 3) * (rr**4 - 6 * a2 * rr**2 + a2**2) / (rr**2 * (rr**2 + a2) ** 2)
        res = (
            (1 - rr**2) * vpp
            + ((n - 3) / rr - 2 * (lam + 1) * rr) * vp
            - lam * (lam + 1) * v
            - vt * v
        )
        return abs(res)


def test_gauge_mode_solves_ode():
    # v = r/(r^2+n-4) at lambda=1, residual <= 1e-10 at 1e3 points in (0,2)
    for n in (5, 6, 7, 9, 12):
        r = np.linspace(2.0 / 1000, 2.0, 1000)
        assert np.max(np.abs(gauge_ode_residual(n, r))) <= 1e-10


def test_gauge_mode_high_precision_residual():
    # same closed form checked in 50-digit arithmetic at sampled points
    with mp.workdps(50):
        for n in (5, 7, 12):
            a2 = n - 4
            worst = mp.mpf(0)
            for r in np.linspace(0.002, 2.0, 97):
                rr = mp.mpf(float(r))
                den = rr**2 + a2
                v = rr / den
                vp = (a2 - rr**2) / den**2
                vpp = -2 * rr * (3 * a2 - rr**2) / den**3
                vt = (n - 3) * (rr**4 - 6 * a2 * rr**2 + a2**2) / (rr**2 * den**2)
                res = (1 - rr**2) * vpp + ((n - 3) / rr - 4 * rr) * vp - 2 * v - vt * v
                worst = max(worst, abs(res))
            assert worst < mp.mpf("1e-45")


def test_series_at_zero_matches_gauge():
    # index-1 branch at (n=5, lambda=1) is exactly r g(r) = r/(r^2+1)
    sol = series_at_zero(SpectralProblem(5, 1.0), 60)
    for r in (0.25, 0.4):
        assert abs(sol.value(r) - r / (r * r + 1.0)) <= 1e-10


def test_series_leading_behavior():
    # v ~ r as r -> 0 for any (n, lambda)
    for n, lam in ((6, 0.3), (9, 1.7 + 0.4j)):
        sol = series_at_zero(SpectralProblem(n, lam), 40)
        r = 1e-6
        assert abs(sol.value(r) / r - 1.0) < 1e-10


def test_series_at_one_matches_gauge():
    sol = series_at_one(SpectralProblem(5, 1.0), 60)
    r = 0.75
    exact = (r / (r * r + 1.0)) / 0.5  # normalized to 1 at r=1
    assert abs(sol.value(r) - exact) <= 1e-10
    assert sol.value(1.0) == pytest.approx(1.0)  # coeffs[0] = 1


def test_series_residuals_high_precision():
    s0 = series_at_zero(SpectralProblem(7, 0.5), 60)
    assert _mp_residual(s0, 0.3, 7, 0.5) <= 1e-11
    s1 = series_at_one(SpectralProblem(7, 0.5 + 0.3j), 60)
    assert _mp_residual(s1, 0.8, 7, 0.5 + 0.3j) <= 1e-11


def test_series_residual_invariant():
    # truncated residual inside the trust radius, 60 terms, <= 1e-12
    for n, lam, r in ((5, 0.7, 0.25), (6, 1.3 + 0.5j, 0.4), (9, 2.2, 0.3)):
        p = SpectralProblem(n, lam)
        assert abs(series_at_zero(p, 60).residual(r)) <= 1e-12
        assert abs(series_at_one(p, 60).residual(1.0 - r)) <= 1e-12


def test_mismatch_examples():
    assert abs(connection_mismatch(SpectralProblem(5, 1.0))) <= 1e-9
    assert abs(connection_mismatch(SpectralProblem(5, 2.0))) >= 0.1
    assert abs(connection_mismatch(SpectralProblem(7, 1.0))) <= 1e-9
    # even n: kappa(1) = 1/2, the ordinary Wronskian path applies
    assert abs(connection_mismatch(SpectralProblem(6, 1.0))) <= 1e-9


def test_mismatch_holomorphy():
    # Cauchy-Riemann via finite differences at random off-lattice points
    rng = np.random.default_rng(7)
    n = 5
    count = 0
    while count < 20:
        z = complex(rng.uniform(0.2, 2.8), rng.uniform(-1.5, 1.5))
        kp = (n - 3) / 2 - z
        if abs(z.imag) < 0.05 and min(abs(kp - round(kp.real)), 1.0) < 0.05:
            continue
        h = 1e-5
        f = lambda w: connection_mismatch(SpectralProblem(n, w), 50)
        dx = (f(z + h) - f(z - h)) / (2 * h)
        dy = (f(z + 1j * h) - f(z - 1j * h)) / (2j * h)
        assert abs(dx - dy) <= 1e-6 * max(1.0, abs(dx))
        count += 1


def test_resonance_flags():
    # near-lattice construction refuses; exact lattice reports obstruction
    with pytest.raises(ResonanceError):
        series_at_one(SpectralProblem(7, 1.0 + 1e-4), 40)
    with pytest.raises(ResonanceError):
        series_at_one(SpectralProblem(7, 1.0), 40)
    # kappa = 0 (equal indices) is harmless
    sol = series_at_one(SpectralProblem(5, 1.0 + 1e-4), 40)
    assert np.isfinite(abs(sol.value(0.75)))
    # obstruction: zero at the eigenvalue, order one at non-eigen lattice pts
    assert resonance_obstruction(7, 1.0) <= 1e-12
    assert resonance_obstruction(9, 1.0) <= 1e-12
    assert resonance_obstruction(5, 0.0) >= 0.1
    assert resonance_obstruction(7, 0.0) >= 0.1


def test_scan_regions():
    roots = eigenvalue_scan(5, (0.5, 1.5, -0.5, 0.5))
    assert len(roots) == 1
    assert abs(roots[0].lam - 1.0) <= 1e-6
    assert eigenvalue_scan(5, (2.0, 3.0, -1.0, 1.0)) == []


def test_scan_even_dimension():
    # even n: the half-integer index gap keeps lambda=1 off the lattice
    roots = eigenvalue_scan(6, (-0.1, 3.0, -2.0, 2.0))
    assert len(roots) == 1
    assert abs(roots[0].lam - 1.0) <= 1e-6
    assert not roots[0].on_lattice


def test_scan_region_validation():
    with pytest.raises(ConfigError):
        eigenvalue_scan(5, (-1.0, 3.0, -2.0, 2.0))


def test_potential_vt_values():
    # closed form spot checks used by the residual oracle
    assert potential_vt(1.0, 7) == pytest.approx(4 * (1 - 18 + 9) / 16.0)


def _bump(r):
    r = np.asarray(r, dtype=float)
    x = r / 0.8
    out = np.zeros_like(x)
    m = x < 1.0
    out[m] = np.exp(-1.0 / (1.0 - x[m] ** 2))
    return out


def test_resolvent_zero_data():
    sol = resolvent_solve(5, lambda r: np.zeros_like(np.asarray(r, dtype=float)))
    assert np.max(np.abs(sol.field.values)) == 0.0


def test_resolvent_residual_and_farfield():
    for n in (5, 6):
        sol = resolvent_solve(n, _bump)
        rr = np.concatenate([np.linspace(0.05, 0.95, 40), np.linspace(1.05, 1.9, 30)])
        assert np.max(np.abs(sol.residual(rr))) <= 1e-8
        sel = sol.field.grid.nodes >= 1.5
        slope = np.polyfit(
            np.log(sol.field.grid.nodes[sel]),
            np.log(np.abs(sol.field.values[sel])),
            1,
        )[0]
        # far field is a pure r=1-branch solution: decay within the
        # infinity-index window {n/2, n/2+1}
        assert -n / 2.0 - 1.0 - 0.2 <= slope <= -n / 2.0 + 0.2


def test_resolvent_support_precondition():
    with pytest.raises(ConfigError):
        resolvent_solve(5, lambda r: np.exp(-np.asarray(r, dtype=float) ** 2))
