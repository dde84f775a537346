"""Coordinate and field maps between physical and similarity variables.

Physical data (v, dt v) at time t with prospective blowup time T map to
similarity fields by

    tau = ln(T/(T-t)),   xi = x/(T-t),
    psi1(xi) = (T-t)   v(t, (T-t) xi),
    psi2(xi) = (T-t)^2 dt v(t, (T-t) xi);

the second line uses the chain-rule identity (dtau + Lambda + 1) psi =
(T-t)^2 dt v, verified symbolically in the test suite.  Resampling
between grids is four-point interpolation; values up to 5% beyond the
source radius follow the power-law decay of admissible data, anything
farther is an error.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid import EVEN, RadialField, RadialGrid, State, interpolate_with_tail
from .profiles import ProfileParams, static_state


@dataclass
class PhysicalPair:
    """Radial physical field and its time derivative at one instant."""

    v0: RadialField
    v1: RadialField

    def __post_init__(self):
        if self.v0.grid is not self.v1.grid:
            raise ConfigError("physical pair components must share one grid")
        if self.v0.parity != EVEN or self.v1.parity != EVEN:
            raise ConfigError("physical pair must be even")

    @property
    def grid(self):
        return self.v0.grid


def coords_to_similarity(t, T):
    """(tau, scale) with tau = ln(T/(T-t)) and scale = 1/(T-t)."""
    if not 0 <= t < T:
        raise ConfigError(f"need 0 <= t < T, got t={t}, T={T}")
    return float(np.log(T / (T - t))), 1.0 / (T - t)


def similarity_to_coords(tau, T):
    """Physical time t = T(1 - e^(-tau))."""
    if tau < 0:
        raise ConfigError("tau must be nonnegative")
    return T * (1.0 - np.exp(-tau))


def _tail_exponents(grid):
    # admissible data decay like <x>^(s - n/2 - 1 - |alpha|); the s-window
    # pins s ~ n/2 - 1, so the components fall off like rho^-2 and rho^-3
    return -2.0, -3.0


def fields_to_similarity(p: PhysicalPair, t, T, grid: RadialGrid) -> State:
    """Similarity state at tau(t) from physical data at time t."""
    if not 0 <= t < T:
        raise ConfigError(f"need 0 <= t < T, got t={t}, T={T}")
    lam = T - t
    r = lam * grid.nodes
    e1, e2 = _tail_exponents(p.grid)
    psi1 = lam * interpolate_with_tail(p.v0, r, e1)
    psi2 = lam * lam * interpolate_with_tail(p.v1, r, e2)
    return State(RadialField(grid, psi1, EVEN), RadialField(grid, psi2, EVEN))


def initial_data_u(p: PhysicalPair, T, grid: RadialGrid,
                   params: ProfileParams) -> State:
    """Perturbation initial state (T v0(T.) - phi0, T^2 v1(T.) - phi1)."""
    if not 0.5 <= T <= 1.5:
        raise ConfigError(f"blowup-time trial T={T} outside [0.5, 1.5]")
    psi = fields_to_similarity(p, 0.0, T, grid)
    base = static_state(grid, params)
    return State(
        RadialField(grid, psi.psi1.values - base.psi1.values, EVEN),
        RadialField(grid, psi.psi2.values - base.psi2.values, EVEN),
    )


def from_similarity(s: State, tau, T, grid: RadialGrid):
    """Physical pair at t = T(1 - e^(-tau)) reconstructed from a state.

    Returns (t, PhysicalPair on the target grid).  Round trip with
    fields_to_similarity is the identity up to interpolation error.
    """
    t = similarity_to_coords(tau, T)
    lam = T - t
    xi = grid.nodes / lam
    e1, e2 = _tail_exponents(s.grid)
    v0 = interpolate_with_tail(s.psi1, xi, e1) / lam
    v1 = interpolate_with_tail(s.psi2, xi, e2) / (lam * lam)
    return t, PhysicalPair(RadialField(grid, v0, EVEN), RadialField(grid, v1, EVEN))


def blowup_family_pair(grid: RadialGrid, params: ProfileParams,
                       T_star) -> PhysicalPair:
    """Exact initial data (v, dt v)(0, .) of the closed-form blowup solution.

    u_T(t, r) = phi(r/(T-t))/(T-t); at t = 0 this gives
    v0 = phi(r/T)/T and v1 = [phi + rho phi'](r/T)/T^2.
    """
    from .profiles import phi, phi_prime

    r = grid.nodes / T_star
    v0 = phi(r, params) / T_star
    v1 = (phi(r, params) + r * phi_prime(r, params)) / T_star**2
    return PhysicalPair(
        RadialField(grid, v0, EVEN), RadialField(grid, v1, EVEN)
    )
