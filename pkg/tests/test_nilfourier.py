"""Lift to the auxiliary group, convolution, transform and Plancherel on N."""

import numpy as np

from lgha import groups as G
from lgha import nilfourier as nf
from lgha.corpus import GaussPoly1D, GaussProduct, random_gauss_product
from lgha.quadrature import box_grid, SampledField, dft_inverse

rng = np.random.default_rng(404)


def test_lift_trivial_slice():
    f = random_gauss_product(rng, 6)
    F = nf.lift_to_L(f.values)
    x = rng.normal(size=3)
    l = np.zeros(9)
    l[:3] = x  # (x6, x5, x4) block, all other slots zero
    expect = f.values(np.array([0.0, 0.0, 0.0, x[2], x[1], x[0]]))
    assert abs(F(l) - expect) < 1e-14


def test_lift_restricts_to_function_on_nil():
    f = random_gauss_product(rng, 6)
    F = nf.lift_to_L(f.values)
    p = rng.normal(size=(50, 6))
    assert np.max(np.abs(F(G.nil_to_L(p)) - f.values(p))) < 1e-14


def test_lift_invariance_pointwise():
    f = random_gauss_product(rng, 6, poly=True)
    F = nf.lift_to_L(f.values)
    for _ in range(300):
        l = rng.normal(size=9)
        h, r, k = rng.normal(size=3)
        assert abs(F(nf.invariance_shift(l, h, r, k)) - F(l)) < 1e-12


def test_shift_flows_commute():
    l = rng.normal(size=9)
    a = nf.invariance_shift(nf.invariance_shift(l, 0.5, 0, 0), 0, -0.8, 0.3)
    b = nf.invariance_shift(nf.invariance_shift(l, 0, -0.8, 0.3), 0.5, 0, 0)
    c = nf.invariance_shift(l, 0.5, -0.8, 0.3)
    assert np.max(np.abs(a - b)) < 1e-14
    assert np.max(np.abs(a - c)) < 1e-14


def test_shift_orbits_are_reduction_fibers():
    l = rng.normal(size=9)
    # shifting by the point's own slot values lands on the embedded copy of N
    reduced = nf.invariance_shift(l, l[7], l[3], l[4])
    assert abs(reduced[3]) < 1e-14 and abs(reduced[4]) < 1e-14 \
        and abs(reduced[7]) < 1e-14
    assert np.max(np.abs(nf.reduce_to_nil(reduced) - nf.reduce_to_nil(l))) < 1e-13


def test_convolution_approximate_identity():
    f = random_gauss_product(rng, 6, sigma_range=(1.2, 1.5), mu_scale=0.2)
    sigma = 0.045
    norm = (2 * np.pi * sigma ** 2) ** -3.0
    phi = GaussProduct(tuple(GaussPoly1D(0.0, sigma, norm ** (1 / 6.0))
                             for _ in range(6)))
    h = 0.3 * rng.normal(size=6)
    # param="left" integrates over the narrow factor's own variable
    val_left = nf.convolve_N(phi.values, f.values, h, method="grid",
                             box=(-0.32 * np.ones(6), 0.32 * np.ones(6)),
                             count=14, param="left")
    ref = f.values(h)
    assert abs(val_left - ref) / abs(ref) < 1e-2


def test_convolution_grid_vs_mc():
    f = random_gauss_product(rng, 6, sigma_range=(0.8, 1.0), mu_scale=0.2)
    phi = random_gauss_product(rng, 6, sigma_range=(0.8, 1.0), mu_scale=0.2)
    at = np.zeros(6)
    grid_val = nf.convolve_N(phi.values, f.values, at, method="grid",
                             box=5.0, count=12)
    mc = nf.convolve_N(phi.values, f.values, at, method="mc", n=1 << 18,
                       seed=9, sampler=(np.zeros(6), np.ones(6)))
    assert mc.agrees(grid_val)


def test_fourier_N_separable_matches_closed_form():
    f = random_gauss_product(rng, 6)
    grids = [box_grid((n,), *fac.suggested_axis(), 64)
             for n, fac in zip(nf.NIL_AXES, f.factors)]
    specs = nf.fourier_N_separable(f, grids)
    for spec, fac, grid in zip(specs, f.factors, grids):
        xi = spec.freqs(grid.names[0])
        exact = fac.ft(xi)
        assert np.max(np.abs(spec.values - exact)) / np.max(np.abs(exact)) < 1e-8


def test_fourier_N_linearity_and_inversion():
    grid = box_grid(nf.NIL_AXES, -3.0, 3.0, 6)
    a = SampledField(grid, rng.normal(size=grid.shape)
                     + 1j * rng.normal(size=grid.shape))
    b = SampledField(grid, rng.normal(size=grid.shape))
    sa = nf.fourier_N(a)
    sb = nf.fourier_N(b)
    sc = nf.fourier_N(SampledField(grid, a.values + 3.5 * b.values))
    scale = np.max(np.abs(sa.values))
    assert np.max(np.abs(sc.values - sa.values - 3.5 * sb.values)) < 1e-12 * scale
    back = dft_inverse(sa)
    assert np.max(np.abs(back.values - a.values)) < 1e-12


def test_plancherel_zero_function():
    zero = GaussProduct(tuple(GaussPoly1D(0.0, 1.0, 0.0) for _ in range(6)))
    res = nf.plancherel_N_check(zero)
    assert res["lhs"] == 0.0 and res["rhs"] == 0.0


def test_plancherel_separable_closed_form():
    f = random_gauss_product(rng, 6, poly=True)
    res = nf.plancherel_N_check(f)
    assert res["rel_err"] < 1e-8
    assert abs(res["lhs"] - f.norm2()) / f.norm2() < 1e-10


def test_parseval_self_pairing_equals_norm():
    f = random_gauss_product(rng, 6, sigma_range=(0.7, 0.9), mu_scale=0.0)
    res = nf.parseval_N_check(f, f, method="grid", count=16)
    assert abs(res["rhs"] - f.norm2()) / f.norm2() < 1e-8
    assert res["rel_err"] < 1e-6


def test_parseval_mc_within_errorbars():
    f = random_gauss_product(rng, 6, sigma_range=(0.8, 1.1), poly=True)
    phi = random_gauss_product(rng, 6, sigma_range=(0.8, 1.1), poly=True)
    res = nf.parseval_N_check(f, phi, method="mc", n=1 << 19, seed=21)
    assert res["within_3sigma"]
    assert res["stderr"] > 0


def test_lifted_convolution_on_slice_and_off_slice():
    f = random_gauss_product(rng, 6, sigma_range=(1.1, 1.4), mu_scale=0.2)
    u = random_gauss_product(rng, 6, sigma_range=(0.4, 0.6), mu_scale=0.2)
    on = 0.7 * rng.normal(size=9)
    on[4] = 0.0
    res_on = nf.lifted_convolution_check(f, u, on, n=1 << 19, seed=31)
    assert res_on["within_3sigma"]
    assert res_on["rel_err"] < 2e-2
    off = on.copy()
    off[4] = 1.5  # outside the slice the two convolutions genuinely differ
    res_off = nf.lifted_convolution_check(f, u, off, n=1 << 19, seed=33)
    assert res_off["rel_err"] > 5 * res_off["stderr"] / abs(res_off["lhs"])
    assert res_off["rel_err"] > 3 * res_on["rel_err"]


def test_convolution_associativity_three_parameter_group():
    """(phi * psi) * f == phi * (psi * f) on the three-parameter group, with
    genuinely different intermediate grids on the two sides."""
    mus = rng.uniform(-0.3, 0.3, size=(3, 3))
    sig = 1.0
    ks = rng.uniform(-0.5, 0.5, size=(3, 3))

    def make(i):
        def fn(p):
            p = np.asarray(p, dtype=float)
            d = p - mus[i]
            return np.exp(-np.sum(d * d, axis=-1) / (2 * sig ** 2)) \
                * np.exp(1j * p @ ks[i])
        return fn

    phi, psi, f = make(0), make(1), make(2)
    grid = box_grid(("z", "y", "x"), -5.5, 5.5, 22)
    mesh = grid.meshgrid()
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    w = grid.axes[0].step ** 3
    at = np.array([0.3, -0.2, 0.1])

    def conv(a_vals, b_mu, b_k, targets):
        from lgha._accel import heis_conv_grid
        return heis_conv_grid(a_vals, pts, targets, b_mu, sig, b_k, w)

    # left association: c = phi * psi on the grid, then c * f at the point
    c_vals = conv(phi(pts), mus[1], ks[1], pts)
    lhs = np.sum(c_vals * f(G.heis_mul(G.heis_inv(pts),
                                       np.broadcast_to(at, pts.shape)))) * w
    # right association: d = psi * f on the grid, then phi * d at the point
    d_vals = conv(psi(pts), mus[2], ks[2], pts)
    # phi * d(at) = int d(g^{-1} at) phi(g) dg; interpolate d by re-evaluating
    # the inner convolution exactly at the shifted points instead
    shifted = G.heis_mul(G.heis_inv(pts), np.broadcast_to(at, pts.shape))
    d_shift = conv(psi(pts), mus[2], ks[2], shifted)
    rhs = np.sum(phi(pts) * d_shift) * w
    assert abs(lhs - rhs) / abs(lhs) < 1e-4
