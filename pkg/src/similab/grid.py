"""Radial mesh and fourth-order finite-difference calculus.

A uniform grid on [0, R] carrying radial samples of functions on
``R^n``.  The radial Laplacian ``f'' + (n-1)/rho f'`` is closed at the
origin with the parity limit ``Delta f(0) = n f''(0)`` via even ghost
reflection; the scaling operator ``Lambda f = rho f'`` vanishes there
identically.  The two outermost nodes use interior-biased one-sided
stencils: the radial characteristics of the evolution this grid serves
satisfy ``d rho/d tau = rho +- 1``, both positive for ``rho >= 1``, so
the outer edge is pure outflow and no boundary condition is imposed.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

EVEN = "even"
ODD = "odd"


def fd_weights(nodes, x0, order):
    """Finite-difference weights for the given derivative order at x0.

    Fornberg's recursion; exact for polynomials of degree
    ``len(nodes) - 1``.
    """
    nodes = np.asarray(nodes)
    if not np.issubdtype(nodes.dtype, np.floating):
        nodes = nodes.astype(float)
    k = len(nodes)
    c = np.zeros((k, order + 1), dtype=nodes.dtype)
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, k):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for m in range(mn, 0, -1):
                    c[i, m] = c1 * (m * c[i - 1, m - 1] - c5 * c[i - 1, m]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for m in range(mn, 0, -1):
                c[j, m] = (c4 * c[j, m] - m * c[j, m - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


@dataclass
class RadialGrid:
    """Uniform radial mesh; immutable after construction.

    Evolution grids must contain the backward light cone with margin
    (R >= 2); evaluation-only targets (physical-space reconstruction
    slices) may be smaller, see eval_grid.
    """

    n: int
    R: float
    m: int
    for_evolution: bool = True
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 5:
            raise ConfigError(f"PDE dimension n={self.n} must be >= 5")
        if self.for_evolution and self.R < 2:
            raise ConfigError(
                f"outer radius R={self.R} must be >= 2 so the backward "
                "light cone (rho <= 1) lies strictly inside the domain"
            )
        if self.R <= 0:
            raise ConfigError("outer radius must be positive")
        if self.m < 16:
            raise ConfigError(f"cell count m={self.m} must be >= 16")
        self.h = self.R / self.m
        self.nodes = np.linspace(0.0, self.R, self.m + 1)
        self._stencils = _Stencils(self.h)

    def field(self, values, parity=EVEN):
        return RadialField(self, np.asarray(values, dtype=float), parity)

    def sample(self, fn, parity=EVEN):
        """Sample a vectorized callable on the nodes."""
        return RadialField(self, np.asarray(fn(self.nodes), dtype=float), parity)

    def zeros(self, parity=EVEN):
        return RadialField(self, np.zeros(self.m + 1), parity)


@dataclass
class RadialField:
    """Sampled radial function with a parity tag for origin reflection."""

    grid: RadialGrid
    values: np.ndarray
    parity: str = EVEN

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.m + 1,):
            raise ConfigError(
                f"field length {self.values.shape} does not match grid "
                f"({self.grid.m + 1} nodes)"
            )
        if self.parity not in (EVEN, ODD):
            raise ConfigError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.parity == ODD and abs(self.values[0]) > 1e-12 * (
            1.0 + np.max(np.abs(self.values))
        ):
            raise ConfigError("odd field must vanish at the origin")


@dataclass
class State:
    """First-order similarity-variable unknown: the pair (psi1, psi2)."""

    psi1: RadialField
    psi2: RadialField

    def __post_init__(self):
        if self.psi1.grid is not self.psi2.grid:
            raise ConfigError("state components must share one grid")

    @property
    def grid(self):
        return self.psi1.grid

    def stack(self):
        return np.stack([self.psi1.values, self.psi2.values])

    @classmethod
    def from_arrays(cls, grid, arr):
        return cls(grid.field(arr[0]), grid.field(arr[1]))


class _Stencils:
    """Precomputed 4th-order stencil weights for one grid spacing."""

    def __init__(self, h):
        self.h = h
        nodes5 = np.arange(5.0) * h
        nodes6 = np.arange(6.0) * h
        # one-sided rows, evaluation at the last and second-to-last node
        self.d1_end = fd_weights(nodes5, 4 * h, 1)
        self.d1_pen = fd_weights(nodes5, 3 * h, 1)
        self.d2_end = fd_weights(nodes6, 5 * h, 2)
        self.d2_pen = fd_weights(nodes6, 4 * h, 2)


def _d1(values, grid, parity):
    """First derivative, 4th order, parity reflection at the origin."""
    h = grid.h
    m = grid.m
    st = grid._stencils
    sgn = 1.0 if parity == EVEN else -1.0
    out = np.empty_like(values)
    f = values
    out[2 : m - 1] = (f[: m - 3] - 8.0 * f[1 : m - 2] + 8.0 * f[3:m] - f[4 : m + 1]) / (
        12.0 * h
    )
    # node 1 via ghost f[-1] = sgn*f[1]
    out[1] = (sgn * f[1] - 8.0 * f[0] + 8.0 * f[2] - f[3]) / (12.0 * h)
    if parity == EVEN:
        out[0] = 0.0
    else:
        # ghosts f[-1] = -f[1], f[-2] = -f[2]
        out[0] = (16.0 * f[1] - 2.0 * f[2]) / (12.0 * h)
    out[m - 1] = st.d1_pen @ f[m - 4 : m + 1]
    out[m] = st.d1_end @ f[m - 4 : m + 1]
    return out


def _d2_even(values, grid):
    """Second derivative for even fields, 4th order."""
    h = grid.h
    m = grid.m
    st = grid._stencils
    out = np.empty_like(values)
    f = values
    out[2 : m - 1] = (
        -f[: m - 3] + 16.0 * f[1 : m - 2] - 30.0 * f[2 : m - 1] + 16.0 * f[3:m] - f[4 : m + 1]
    ) / (12.0 * h * h)
    out[0] = (-2.0 * f[2] + 32.0 * f[1] - 30.0 * f[0]) / (12.0 * h * h)
    out[1] = (16.0 * f[0] - 31.0 * f[1] + 16.0 * f[2] - f[3]) / (12.0 * h * h)
    out[m - 1] = st.d2_pen @ f[m - 5 : m + 1]
    out[m] = st.d2_end @ f[m - 5 : m + 1]
    return out


def apply_laplacian(f: RadialField) -> RadialField:
    """Radial Laplacian ``f'' + (n-1)/rho f'`` in n dimensions.

    Requires even parity: the origin closure ``n f''(0)`` relies on
    ``f'(0) = 0``.
    """
    if f.parity != EVEN:
        raise ConfigError("apply_laplacian requires an even field")
    grid = f.grid
    d1 = _d1(f.values, grid, EVEN)
    d2 = _d2_even(f.values, grid)
    out = np.empty_like(f.values)
    out[1:] = d2[1:] + (grid.n - 1) * d1[1:] / grid.nodes[1:]
    out[0] = grid.n * d2[0]
    return RadialField(grid, out, EVEN)


def apply_lambda(f: RadialField) -> RadialField:
    """Scaling operator ``rho f'(rho)``; preserves parity."""
    grid = f.grid
    out = grid.nodes * _d1(f.values, grid, f.parity)
    out[0] = 0.0
    return RadialField(grid, out, f.parity)


def interpolate(f: RadialField, rho):
    """4-point Lagrange interpolation; exact for cubics.

    Accepts a scalar or an array of radii in [0, R].
    """
    grid = f.grid
    x = np.asarray(rho, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0.0) or np.any(x > grid.R + 1e-12 * grid.R):
        raise ConfigError("interpolation point outside [0, R]")
    x = np.minimum(x, grid.R)
    i0 = np.clip(np.floor(x / grid.h).astype(int) - 1, 0, grid.m - 3)
    t = x / grid.h - i0  # local coordinate in [0, 3] over the 4-node window
    f0 = f.values[i0]
    f1 = f.values[i0 + 1]
    f2 = f.values[i0 + 2]
    f3 = f.values[i0 + 3]
    w0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0
    w1 = t * (t - 2.0) * (t - 3.0) / 2.0
    w2 = -t * (t - 1.0) * (t - 3.0) / 2.0
    w3 = t * (t - 1.0) * (t - 2.0) / 6.0
    out = w0 * f0 + w1 * f1 + w2 * f2 + w3 * f3
    return float(out[0]) if scalar else out


def interpolate_with_tail(f: RadialField, rho, exponent):
    """Interpolate, extending past R by a power-law tail ``c rho^exponent``.

    The tail is only trusted within 5% beyond R; farther requests are a
    domain error.  The constant is matched to the outermost node value.
    """
    grid = f.grid
    x = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(x > 1.05 * grid.R):
        raise ConfigError(
            "resampling point more than 5% beyond R; enlarge the source grid"
        )
    out = np.empty_like(x)
    inside = x <= grid.R
    if np.any(inside):
        out[inside] = interpolate(f, x[inside])
    if np.any(~inside):
        c = f.values[-1] / grid.R**exponent
        out[~inside] = c * x[~inside] ** exponent
    if np.ndim(rho) == 0:
        return float(out[0])
    return out


def make_grid(n, R, m) -> RadialGrid:
    """Uniform radial grid; see RadialGrid for parameter constraints."""
    return RadialGrid(n, float(R), int(m))


def eval_grid(n, R, m) -> RadialGrid:
    """Evaluation-only mesh: no light-cone containment requirement."""
    return RadialGrid(n, float(R), int(m), for_evolution=False)
