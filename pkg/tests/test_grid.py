"""Finite-difference operators: exactness, convergence order, interpolation."""

import numpy as np
import pytest

from similab.errors import ConfigError
from similab.grid import (
    apply_lambda,
    apply_laplacian,
    fd_weights,
    interpolate,
    interpolate_with_tail,
    make_grid,
)


def test_make_grid_examples():
    g = make_grid(5, 4.0, 400)
    assert g.h == pytest.approx(0.01)
    assert len(g.nodes) == 401
    assert g.nodes[0] == 0.0
    assert make_grid(7, 2.0, 100).h == pytest.approx(0.02)
    with pytest.raises(ConfigError):
        make_grid(5, 0.5, 100)  # light cone not contained
    with pytest.raises(ConfigError):
        make_grid(4, 4.0, 100)
    with pytest.raises(ConfigError):
        make_grid(5, 4.0, 8)


def test_fd_weights_polynomial_exactness():
    nodes = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    w1 = fd_weights(nodes, 4.0, 1)
    w2 = fd_weights(np.arange(6.0), 5.0, 2)
    for k in range(5):
        assert np.dot(w1, nodes**k) == pytest.approx(
            k * 4.0 ** (k - 1) if k else 0.0, rel=1e-12, abs=1e-12
        )
    for k in range(6):
        x = np.arange(6.0)
        assert np.dot(w2, x**k) == pytest.approx(
            k * (k - 1) * 5.0 ** (k - 2) if k >= 2 else 0.0, rel=1e-11, abs=1e-10
        )


@pytest.mark.parametrize("n", [5, 7])
def test_polynomial_exactness(n):
    g = make_grid(n, 4.0, 64)
    r = g.nodes
    # p(rho^2) of degree <= 4 in rho
    f2 = g.field(r**2)
    f4 = g.field(r**4)
    const = g.field(np.ones_like(r))
    assert np.allclose(apply_laplacian(f2).values, 2 * n, atol=1e-10)
    assert np.allclose(
        apply_laplacian(f4).values, (12 + 4 * (n - 1)) * r**2, atol=1e-9
    )
    assert np.allclose(apply_laplacian(const).values, 0.0, atol=1e-11)
    assert np.allclose(apply_lambda(f2).values, 2 * r**2, atol=1e-10)
    assert np.allclose(apply_lambda(f4).values, 4 * r**4, atol=1e-8)
    assert np.allclose(apply_lambda(const).values, 0.0, atol=1e-12)


def test_gaussian_convergence_order():
    # analytic oracles: Delta e^{-r^2} = (4r^2 - 2n) e^{-r^2},
    #                   Lambda e^{-r^2} = -2 r^2 e^{-r^2}
    n = 5
    errs_lap, errs_lam = [], []
    for m in (100, 200, 400):
        g = make_grid(n, 4.0, m)
        r = g.nodes
        f = g.field(np.exp(-(r**2)))
        lap_exact = (4 * r**2 - 2 * n) * np.exp(-(r**2))
        lam_exact = -2 * r**2 * np.exp(-(r**2))
        errs_lap.append(np.max(np.abs(apply_laplacian(f).values - lap_exact)))
        errs_lam.append(np.max(np.abs(apply_lambda(f).values - lam_exact)))
    assert errs_lap[0] / errs_lap[1] >= 12.0
    assert errs_lap[1] / errs_lap[2] >= 12.0
    assert errs_lam[0] / errs_lam[1] >= 12.0
    assert errs_lam[1] / errs_lam[2] >= 12.0


def test_origin_closure():
    # Delta f(0) = n * 2nd Taylor coefficient * 2 for analytic even f
    for n in (5, 6, 9):
        g = make_grid(n, 4.0, 200)
        f = g.field(np.cos(g.nodes) ** 2)
        # cos^2 = 1 - rho^2 + ..., f''(0) = -2
        assert apply_laplacian(f).values[0] == pytest.approx(-2 * n, rel=1e-5)


def test_parity_contract():
    g = make_grid(5, 4.0, 64)
    odd = g.field(g.nodes, parity="odd")
    with pytest.raises(ConfigError):
        apply_laplacian(odd)
    with pytest.raises(ConfigError):
        g.field(np.ones(65), parity="odd")  # nonzero at origin
    # Lambda acts on odd fields too
    out = apply_lambda(odd)
    assert np.allclose(out.values, g.nodes, atol=1e-10)
    assert out.parity == "odd"


def test_interpolation_cubic_exactness():
    g = make_grid(5, 4.0, 400)
    f = g.field(g.nodes**3)
    assert interpolate(f, 0.015) == pytest.approx(0.015**3, rel=1e-12)
    xs = np.array([0.0033, 1.77777, 3.992])
    assert np.allclose(interpolate(f, xs), xs**3, rtol=1e-12)


def test_interpolation_nodes_and_errors():
    g = make_grid(5, 4.0, 100)
    vals = np.sin(g.nodes)
    f = g.field(vals)
    assert interpolate(f, g.nodes[37]) == vals[37]
    with pytest.raises(ConfigError):
        interpolate(f, 4.5)
    with pytest.raises(ConfigError):
        interpolate(f, -0.1)


def test_interpolation_convergence():
    # e^{-rho} between nodes: O(h^4)
    errs = []
    for m in (100, 200):
        g = make_grid(5, 4.0, m)
        f = g.field(np.exp(-g.nodes))
        xs = np.linspace(0.013, 3.9, 77)
        errs.append(np.max(np.abs(interpolate(f, xs) - np.exp(-xs))))
    assert errs[0] / errs[1] >= 12.0


def test_tail_extrapolation():
    g = make_grid(5, 4.0, 100)
    f = g.field((1.0 + g.nodes**2) ** -1)
    v = interpolate_with_tail(f, 4.1, exponent=-2.0)
    assert v == pytest.approx(f.values[-1] * (4.1 / 4.0) ** -2, rel=1e-12)
    with pytest.raises(ConfigError):
        interpolate_with_tail(f, 4.3, exponent=-2.0)
