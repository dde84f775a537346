"""Right-hand sides, RK4 stepping, trajectories, gauge handling."""

import numpy as np
import pytest
from scipy.linalg import expm

from similab.errors import ConfigError, DivergenceError
from similab.evolver import (
    Evolver,
    EvolverConfig,
    deflate_gauge,
    rhs_free,
    rhs_linearized,
    rhs_nonlinear,
    static_residual,
)
from similab.grid import State, make_grid
from similab.profiles import (
    ProfileParams,
    gauge_g,
    gauge_mode,
    potential_v,
    static_state,
)

P3 = ProfileParams.for_d(3)


def _ev(n=5, m=200, R=4.0):
    return Evolver(make_grid(n, R, m), ProfileParams.for_n(n))


def test_rhs_free_polynomial_examples():
    for n in (5, 8):
        ev = _ev(n=n)
        g = ev.grid
        s = State(g.field(g.nodes**2), g.zeros())
        out = ev.rhs(s.stack(), "free")
        assert np.allclose(out[0], -3.0 * g.nodes**2, atol=1e-9)
        assert np.allclose(out[1], 2.0 * n, atol=1e-9)
        c = 0.7
        s = State(g.zeros(), g.field(np.full(g.m + 1, c)))
        out = ev.rhs(s.stack(), "free")
        assert np.allclose(out[0], c, atol=1e-12)
        assert np.allclose(out[1], -2.0 * c, atol=1e-12)


def test_rhs_linearity_and_zero():
    ev = _ev()
    g = ev.grid
    rng = np.random.default_rng(3)
    a = np.stack([np.exp(-g.nodes**2), np.cos(g.nodes) * np.exp(-g.nodes**2)])
    b = np.stack([1.0 / (1 + g.nodes**2), np.sin(g.nodes**2) * np.exp(-g.nodes**2)])
    assert np.all(ev.rhs(np.zeros_like(a), "linearized") == 0.0)
    assert np.all(ev.rhs(np.zeros_like(a), "nonlinear") == 0.0)
    lhs = ev.rhs(2.0 * a + 3.0 * b, "linearized")
    rhs = 2.0 * ev.rhs(a, "linearized") + 3.0 * ev.rhs(b, "linearized")
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_gauge_eigenrelation():
    # (L0 + L') g = g nodewise, O(h^4) in the interior region
    errs = []
    for m in (200, 400):
        ev = _ev(m=m)
        gm = gauge_mode(ev.grid, ev.params).stack()
        out = ev.rhs(gm, "linearized")
        mask = ev.grid.nodes <= 2.0
        errs.append(np.max(np.abs((out - gm)[:, mask])))
    assert errs[0] < 1e-4
    assert errs[0] / errs[1] > 12.0  # O(h^4)


def test_second_component_contains_v_g():
    # s = (g, 0): second component includes V*g = 8(n-4)(n-3)/(rho^2+n-4)^3
    ev = _ev(n=6)
    g = ev.grid
    s = np.stack([gauge_g(g.nodes, ev.params), np.zeros(g.m + 1)])
    with_v = ev.rhs(s, "linearized")
    without = ev.rhs(s, "free")
    prod = potential_v(g.nodes, ev.params) * gauge_g(g.nodes, ev.params)
    exact = 8.0 * 2.0 * 3.0 / (g.nodes**2 + 2.0) ** 3
    assert np.allclose(with_v[1] - without[1], prod, atol=1e-14)
    assert np.allclose(prod, exact, atol=1e-14)


def test_quadratic_smallness_of_nonlinearity():
    ev = _ev()
    g = ev.grid
    u = 1e-6 * np.exp(-g.nodes**2)
    s = np.stack([u, np.zeros_like(u)])
    diff = ev.rhs(s, "nonlinear") - ev.rhs(s, "linearized")
    assert np.max(np.abs(diff)) <= 1e-11  # C * (1e-6)^2


def test_total_field_consistency():
    # rhs of the full system at Psi0 + Phi equals the static part plus
    # the perturbation rhs, nodewise to rounding (two code paths)
    ev = _ev(m=300)
    g = ev.grid
    base = static_state(g, ev.params).stack()
    pert = np.stack(
        [0.05 * np.exp(-g.nodes**2), 0.02 / (1 + g.nodes**2)]
    )
    total = ev.rhs_total(base + pert)
    split = ev.rhs_total(base) + ev.rhs(pert, "nonlinear")
    # rounding scale: boundary rows carry 1/h^2-amplified weights
    assert np.max(np.abs(total - split)) < 1e-10


def test_static_residual_refinement():
    errs = [static_residual(make_grid(5, 4.0, m), P3) for m in (100, 200, 400)]
    assert errs[0] / errs[1] > 12.0
    assert errs[1] / errs[2] > 12.0
    # float64 path agrees while truncation dominates
    e64 = static_residual(make_grid(5, 4.0, 100), P3, extended=False)
    assert e64 == pytest.approx(errs[0], rel=1e-4)


def test_rk4_zero_fixed_point():
    ev = _ev()
    z = np.zeros((2, ev.grid.m + 1))
    for mode in ("free", "nonlinear"):
        assert np.all(ev.step_rk4(z, 1e-3, mode) == 0.0)


def test_rk4_polynomial_flow_oracle():
    # free flow preserves span{rho^2, 1}^2; exact flow via expm of the
    # 4x4 coefficient system  A' = -3A + D, C' = -C + E, D' = -4D,
    # E' = 2nA - 2E  for psi1 = A rho^2 + C, psi2 = D rho^2 + E
    ev = _ev(n=5)
    g = ev.grid
    n = 5
    M = np.array(
        [
            [-3.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 1.0],
            [0.0, 0.0, -4.0, 0.0],
            [2.0 * n, 0.0, 0.0, -2.0],
        ]
    )
    coef0 = np.array([1.0, 0.0, 0.0, 0.0])  # (rho^2, 0)

    def to_fields(c):
        return np.stack(
            [c[0] * g.nodes**2 + c[1], c[2] * g.nodes**2 + c[3]]
        )

    errs = []
    for dtau in (4e-2, 2e-2):  # large enough that roundoff stays below dtau^5
        exact = to_fields(expm(dtau * M) @ coef0)
        stepped = ev.step_rk4(to_fields(coef0), dtau, "free")
        errs.append(np.max(np.abs(stepped - exact)))
    ratio = errs[0] / errs[1]
    assert 20.0 < ratio < 45.0  # O(dtau^5) per step


def test_fast_path_matches_reference():
    from similab import _fast

    if not _fast.HAVE_NUMBA:
        pytest.skip("numba unavailable; fast path inactive")
    ev = _ev(m=150)
    g = ev.grid
    u0 = g.sample(
        lambda r: 1e-2 * (np.exp(-((r - 0.5) / 0.3) ** 2) + np.exp(-((r + 0.5) / 0.3) ** 2))
    )
    s = State(u0, g.zeros())
    cfg = EvolverConfig(tau_end=0.05, mode="nonlinear", snapshot_every=10**9)
    fast = ev.evolve(s, cfg).states[-1].stack()
    dtau = cfg.step_for(g)
    arr = s.stack().copy()
    for _ in range(int(np.ceil(0.05 / dtau))):
        arr = ev.step_rk4(arr, dtau, "nonlinear")
    assert np.max(np.abs(arr - fast)) < 1e-14


def test_evolve_zero_and_config_errors():
    ev = _ev()
    z = State.from_arrays(ev.grid, np.zeros((2, ev.grid.m + 1)))
    traj = ev.evolve(z, EvolverConfig(tau_end=0.2, mode="nonlinear"))
    assert np.all(traj.sup_lightcone == 0.0)
    with pytest.raises(ConfigError):
        EvolverConfig(tau_end=0.2, mode="implicit")
    with pytest.raises(ConfigError):
        cfg = EvolverConfig(tau_end=0.2, dtau=1.0)
        cfg.step_for(ev.grid)


def test_divergence_reporting():
    ev = _ev(m=100)
    g = ev.grid
    huge = State(g.sample(lambda r: 50.0 * np.exp(-((r - 0.5) ** 2))), g.zeros())
    with pytest.raises(DivergenceError) as err:
        ev.evolve(huge, EvolverConfig(tau_end=4.0, mode="nonlinear"))
    assert err.value.step is not None
    traj = ev.evolve(
        huge, EvolverConfig(tau_end=4.0, mode="nonlinear"), on_divergence="truncate"
    )
    assert traj.diverged


def test_gauge_growth_exponent():
    # linearized flow on the gauge mode grows like e^tau
    ev = _ev(m=400)
    gm = gauge_mode(ev.grid, ev.params)
    traj = ev.evolve(
        State(gm.psi1, gm.psi2),
        EvolverConfig(tau_end=3.0, mode="linearized", snapshot_every=100),
    )
    slope = np.polyfit(traj.taus, np.log(traj.gauge_proj), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.01)
    # and the state itself stays e^tau * g to integrator accuracy
    final = traj.states[-1].stack()
    rel = np.max(np.abs(final - np.exp(3.0) * gm.stack())) / np.exp(3.0)
    assert rel < 1e-6


def test_deflated_stable_decay():
    # after one-dimensional gauge deflation the light-cone sup decays
    ev = _ev(m=300)
    g = ev.grid
    bump = g.sample(
        lambda r: 1e-3 * (np.exp(-((r - 0.4) / 0.3) ** 2) + np.exp(-((r + 0.4) / 0.3) ** 2))
    )
    s0 = deflate_gauge(ev, State(bump, g.zeros()))
    traj = ev.evolve(
        s0, EvolverConfig(tau_end=8.0, mode="linearized", snapshot_every=200)
    )
    sel = traj.taus >= 1.0
    slope = np.polyfit(traj.taus[sel], np.log(traj.sup_lightcone[sel]), 1)[0]
    assert -slope > 0.05  # strictly positive fitted decay rate


def test_finite_speed_sanity():
    # data supported at rho > 1.5 cannot reach the core for a while
    ev = _ev(m=400)
    g = ev.grid
    bump = g.sample(lambda r: np.exp(-(((r - 1.8) / 0.1) ** 2)))
    traj = ev.evolve(
        State(bump, g.zeros()),
        EvolverConfig(tau_end=np.log(3.0) - 0.15, mode="free", snapshot_every=50),
    )
    core = g.nodes <= 0.5
    leak = max(np.max(np.abs(st.psi1.values[core])) for st in traj.states)
    assert leak < 1e-7  # discretization leakage only


def test_refinement_convergence_of_trajectories():
    # 4th-order convergence: coarse-vs-mid error exceeds mid-vs-fine by >= 12
    p = P3
    sols = {}
    for m in (100, 200, 400):
        g = make_grid(5, 4.0, m)
        ev = Evolver(g, p)
        bump = g.sample(
            lambda r: 0.05 * (np.exp(-((r - 0.5) / 0.25) ** 2) + np.exp(-((r + 0.5) / 0.25) ** 2))
        )
        traj = ev.evolve(
            State(bump, g.zeros()),
            EvolverConfig(tau_end=1.0, mode="nonlinear", snapshot_every=10**9),
        )
        sols[m] = traj.states[-1].psi1.values
    lc100 = sols[100][make_grid(5, 4.0, 100).nodes <= 1.0]
    lc200 = sols[200][::2][make_grid(5, 4.0, 100).nodes <= 1.0]
    lc400 = sols[400][::4][make_grid(5, 4.0, 100).nodes <= 1.0]
    coarse = np.max(np.abs(lc100 - lc200))
    fine = np.max(np.abs(lc200 - lc400))
    assert coarse / fine >= 12.0
