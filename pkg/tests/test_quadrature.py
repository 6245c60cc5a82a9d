"""Grids, quadrature, transforms, Monte Carlo, Haar node sets, field I/O."""

import numpy as np
import pytest

from lgha import quadrature as Q
from lgha._accel import pairwise_sum

rng = np.random.default_rng(202)


def test_constant_integrates_to_volume():
    grid = Q.box_grid(("a", "b", "c"), 0.0, 1.0, 8)
    f = Q.SampledField(grid, np.ones(grid.shape))
    assert Q.integrate(f) == pytest.approx(1.0, abs=1e-14)


def test_gaussian_integral():
    grid = Q.box_grid(("x",), -8.0, 8.0, 64)
    f = Q.SampledField(grid, np.exp(-grid.axes[0].nodes() ** 2))
    assert abs(Q.integrate(f) - np.sqrt(np.pi)) / np.sqrt(np.pi) < 1e-12


def test_separable_product_integrates_to_product():
    grid = Q.box_grid(("x", "y"), -6.0, 6.0, 40)
    xs, ys = grid.meshgrid()
    f = Q.SampledField(grid, np.exp(-xs ** 2) * np.exp(-2 * ys ** 2))
    g1 = Q.SampledField(Q.box_grid(("x",), -6.0, 6.0, 40),
                        np.exp(-grid.axes[0].nodes() ** 2))
    g2 = Q.SampledField(Q.box_grid(("y",), -6.0, 6.0, 40),
                        np.exp(-2 * grid.axes[1].nodes() ** 2))
    assert Q.integrate(f) == pytest.approx(Q.integrate(g1) * Q.integrate(g2),
                                           rel=1e-12)


def test_gauss_legendre_polynomial_exactness():
    ax = Q.Axis("x", "gauss-legendre", -1.0, 3.0, 6)
    nodes, w = ax.nodes(), ax.weights()
    for deg in range(0, 11):
        val = np.sum(w * nodes ** deg)
        exact = (3.0 ** (deg + 1) - (-1.0) ** (deg + 1)) / (deg + 1)
        assert val == pytest.approx(exact, rel=1e-13)


def test_dft_roundtrip():
    grid = Q.box_grid(("x", "y"), -5.0, 5.0, 32)
    f = Q.SampledField(grid, rng.normal(size=grid.shape)
                       + 1j * rng.normal(size=grid.shape))
    back = Q.dft_inverse(Q.dft_forward(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-12


def test_dft_single_harmonic_spike():
    ax = Q.Axis("x", "uniform-periodic", 0.0, 2 * np.pi, 32)
    grid = Q.GridSpec([ax])
    k0 = 5
    f = Q.SampledField(grid, np.exp(1j * k0 * ax.nodes()))
    spec = Q.dft_forward(f)
    freqs = spec.freqs("x")
    mags = np.abs(spec.values)
    assert freqs[np.argmax(mags)] == pytest.approx(k0)
    others = mags.copy()
    others[np.argmax(mags)] = 0
    assert np.max(others) < 1e-12


def test_dft_gaussian_closed_form():
    grid = Q.box_grid(("x",), -10.0, 10.0, 128)
    x = grid.axes[0].nodes()
    f = Q.SampledField(grid, np.exp(-x ** 2 / 2.0))
    spec = Q.dft_forward(f)
    xi = spec.freqs("x")
    exact = np.sqrt(2 * np.pi) * np.exp(-xi ** 2 / 2.0)
    assert np.max(np.abs(spec.values - exact)) / np.max(exact) < 1e-8


def test_hermitian_symmetry_for_real_fields():
    grid = Q.box_grid(("x",), -4.0, 4.0, 33)
    f = Q.SampledField(grid, np.exp(-grid.axes[0].nodes() ** 2)
                       * (1 + 0.3 * grid.axes[0].nodes()))
    spec = Q.dft_forward(f)
    v = spec.values
    flipped = np.conj(np.concatenate([[v[0]], v[1:][::-1]]))
    assert np.max(np.abs(v - flipped)) < 1e-12


def test_monte_carlo_zero_variance_when_integrand_matches_density():
    # integrating the sampler's own density gives exactly 1 with zero spread
    def density(x):
        return np.exp(-0.5 * np.sum(x ** 2, axis=1)) / (2 * np.pi)

    res = Q.monte_carlo(density, np.zeros(2), np.ones(2), 2000, seed=5)
    assert res.estimate == pytest.approx(1.0, abs=1e-12)
    assert res.stderr < 1e-8


def test_monte_carlo_gaussian_r6():
    res = Q.monte_carlo(lambda x: np.exp(-np.sum(x ** 2, axis=1)),
                        np.zeros(6), np.ones(6), 1 << 18, seed=7)
    exact = np.pi ** 3
    assert abs(res.estimate - exact) < 3 * res.stderr
    assert abs(res.estimate - exact) / exact < 0.02


def test_monte_carlo_deterministic():
    f = lambda x: np.exp(-np.sum(x ** 2, axis=1)) * (1 + x[:, 0])
    a = Q.monte_carlo(f, np.zeros(3), np.ones(3), 50000, seed=11)
    b = Q.monte_carlo(f, np.zeros(3), np.ones(3), 50000, seed=11)
    assert a.estimate == b.estimate and a.stderr == b.stderr


def test_monte_carlo_rejects_tiny_n():
    with pytest.raises(ValueError):
        Q.monte_carlo(lambda x: np.ones(x.shape[0]), np.zeros(1), np.ones(1),
                      10, seed=0)


def test_su2_quadrature_normalized():
    q = Q.su2_quadrature(1.5)
    assert pairwise_sum(q.weights) == pytest.approx(1.0, abs=1e-14)
    assert np.all(q.weights > 0)


def test_so4_quadrature_budget():
    with pytest.raises(Q.BudgetExceeded):
        Q.so4_quadrature(2, budget=100)


def test_grid_budget():
    with pytest.raises(Q.BudgetExceeded):
        Q.box_grid(tuple("abcdef"), -1, 1, 64, budget=10 ** 6)


def test_axis_validation():
    with pytest.raises(ValueError):
        Q.Axis("x", "uniform-box", 1.0, -1.0, 8)
    with pytest.raises(ValueError):
        Q.Axis("x", "chebyshev", -1.0, 1.0, 8)
    with pytest.raises(ValueError):
        Q.Axis("x", "uniform-box", -1.0, 1.0, 1)


def test_sampled_field_validation():
    grid = Q.box_grid(("x",), -1.0, 1.0, 8)
    with pytest.raises(ValueError):
        Q.SampledField(grid, np.zeros(7))
    bad = np.zeros(8)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        Q.SampledField(grid, bad)


def test_field_io_roundtrip(tmp_path):
    grid = Q.box_grid(("u", "v"), -2.0, 2.0, 12)
    f = Q.SampledField(grid, rng.normal(size=grid.shape)
                       + 1j * rng.normal(size=grid.shape))
    path = tmp_path / "field.lgf"
    Q.save_field(f, path)
    g = Q.load_field(path)
    assert np.array_equal(g.values, f.values)
    assert g.grid.names == f.grid.names
    assert g.grid.axes[0].kind == "uniform-box"


def test_pairwise_sum_matches_fsum():
    import math

    vals = rng.normal(size=10001)
    assert pairwise_sum(vals) == pytest.approx(math.fsum(vals), rel=1e-14)
    cvals = vals + 1j * rng.normal(size=10001)
    s = pairwise_sum(cvals)
    assert s.real == pytest.approx(math.fsum(cvals.real), rel=1e-13)
