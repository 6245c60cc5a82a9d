"""Spectral solvers: symbol division, shear action, residual machinery.

The full-size conjugated solves (round trips and generic-residual runs) live
in the acceptance suite; here the machinery is exercised on small grids.
"""

import numpy as np
import pytest

from lgha import diffops as D
from lgha import solvers as S
from lgha.quadrature import Axis, GridSpec, SampledField

rng = np.random.default_rng(707)


def _grid2(n=64, L=6.0):
    return GridSpec([Axis("y", "uniform-box", -L, L, n),
                     Axis("x", "uniform-box", -L, L, n)])


def test_cr_solve_manufactured_2d():
    grid = _grid2()
    ym, xm = grid.meshgrid()
    e = np.exp(-(xm ** 2 + ym ** 2) / 2.0)
    h = (xm + 1j * ym) * e
    g = ((1 - xm * (xm + 1j * ym)) - 1j * (1j - ym * (xm + 1j * ym))) * e
    sol, info = S.cr_solve(SampledField(grid, g), D.cauchy_riemann())
    assert np.max(np.abs(sol.values - h)) / np.max(np.abs(h)) < 1e-6
    assert info["projected_rel"] < 1e-6
    assert info["n_projected"] == 1


def test_cr_solve_grid_mode_residual():
    # on the retained modes the equation holds to roundoff
    grid = _grid2()
    ym, xm = grid.meshgrid()
    e = np.exp(-(xm ** 2 + ym ** 2) / 2.0)
    g = ((1 - xm * (xm + 1j * ym)) - 1j * (1j - ym * (xm + 1j * ym))) * e
    sol, _ = S.cr_solve(SampledField(grid, g), D.cauchy_riemann())
    applied = S.spectral_apply(D.cauchy_riemann(), sol)
    # op f = g minus the projected kernel modes: remove the mean before
    # comparing
    g_retained = g - np.mean(g)
    resid = np.sqrt(np.sum(np.abs(applied.values - g_retained) ** 2)
                    / np.sum(np.abs(g_retained) ** 2))
    assert resid < 1e-8


def test_lewy_solve_zero_rhs():
    res = S.lewy_solve(lambda pts: np.zeros(pts.shape[:-1], dtype=complex),
                       support=(1.0, 1.0, 1.0), nz=16, ny=8, nx=8, pad=0.5)
    assert np.max(np.abs(res["f"].values)) == 0.0
    assert res["residual"] == 0.0


def test_cr_solve_zero_rhs():
    grid = _grid2(32)
    sol, _ = S.cr_solve(SampledField(grid, np.zeros(grid.shape)),
                        D.cauchy_riemann())
    assert np.max(np.abs(sol.values)) == 0.0


def test_cr_solve_rejects_incompatible():
    grid = _grid2(32)
    ym, xm = grid.meshgrid()
    g = np.exp(-(xm ** 2 + ym ** 2) / 2.0)
    with pytest.raises(S.IncompatibleRHS):
        S.cr_solve(SampledField(grid, g), D.cauchy_riemann())


def test_cr_solve_requires_constant_coefficients():
    grid = _grid2(16)
    with pytest.raises(ValueError):
        S.cr_solve(SampledField(grid, np.zeros(grid.shape)), D.lewy())


def test_symbol_zero_set_is_origin_only():
    op = D.cauchy_riemann()
    xi = rng.normal(size=(200, 2))
    sym = op.symbol(np.zeros(200), xi[:, 1], xi[:, 0])
    assert np.min(np.abs(sym)) > 1e-3  # generic points are far from zero
    assert abs(op.symbol(0.0, 0.0, 0.0)) == 0.0


def test_shear_reflect_field_exact():
    grid = S.solver_grid(4 + 2 * 9 + 1, 3, 3, 128, 40, 40)
    w = D.PolyGauss(D.Poly3({(0, 0, 1): 1.0, (0, 1, 0): 1.0j}), sigma=0.8)
    zs, ys, xs = grid.meshgrid()
    f = SampledField(grid, w.values(np.stack([zs, ys, xs], axis=-1)))
    sheared = S.shear_reflect_field(f)
    direct = w.values(np.stack([zs - 2 * xs * ys, ys, -xs], axis=-1))
    assert np.max(np.abs(sheared.values - direct)) < 1e-10


def test_shear_reflect_field_is_involution_on_grid():
    grid = S.solver_grid(20, 2.5, 2.5, 96, 32, 32)
    vals = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    f = SampledField(grid, vals)
    back = S.shear_reflect_field(S.shear_reflect_field(f))
    assert np.max(np.abs(back.values - vals)) < 1e-10


def test_shear_requires_symmetric_x_axis():
    grid = GridSpec([Axis("z", "uniform-box", -4, 4, 16),
                     Axis("y", "uniform-box", -2, 2, 8),
                     Axis("x", "uniform-box", -1, 2, 8)])
    f = SampledField(grid, np.zeros(grid.shape))
    with pytest.raises(ValueError):
        S.shear_reflect_field(f)


def test_spectral_apply_matches_exact_derivative():
    w = D.PolyGauss(D.Poly3({(0, 0, 1): 1.0, (0, 1, 0): 0.5j, (1, 0, 0): 0.2}),
                    sigma=0.7)
    op = D.lewy_conjugate_true()
    exact = w.apply_diffop(op)
    grid = S.solver_grid(6, 4, 4, 64, 64, 64)
    zs, ys, xs = grid.meshgrid()
    f = SampledField(grid, w.values(np.stack([zs, ys, xs], axis=-1)))
    applied = S.spectral_apply(op, f)
    ref = exact.values(np.stack([zs, ys, xs], axis=-1))
    assert np.max(np.abs(applied.values - ref)) < 1e-5


def test_four_stage_operator_is_conjugation_of_chain():
    corpus_pt = rng.uniform(-1, 1, size=(10, 3))
    w = D.PolyGauss(D.Poly3({(0, 1, 1): 1.0}), sigma=1.1)
    four = D.cr_pair_R() @ D.cr_pair_R_star() @ D.cr_pair_R_star() @ D.cr_pair_R()
    hb = D.shear_reflect_map()
    lhs = D.conjugate_apply(hb, four, w, corpus_pt)
    rhs = S.four_stage_operator().apply(w, corpus_pt)
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_interior_mask_and_window():
    grid = S.solver_grid(10, 2, 2, 40, 16, 16)
    mask = S.interior_mask(grid, frac=0.5, z_half=4.0)
    zs, ys, xs = grid.meshgrid()
    assert np.all(np.abs(zs[mask]) <= 2.0 + 1e-9)
    assert np.all(np.abs(ys[mask]) <= 1.0 + 1e-9)
    win = S.plateau_window(grid, flat_frac=0.6)
    assert np.all(win[mask] == 1.0)
    assert win[0, 0, 0] < 1e-3  # cell-centered nodes stop short of the edge


def test_fd_residual_spotcheck_on_manufactured():
    w = D.PolyGauss(D.Poly3({(0, 0, 1): 1.0}), sigma=1.0)
    op = D.lewy_conjugate_true()
    g = w.apply_diffop(op)
    grid = S.solver_grid(5, 3.5, 3.5, 96, 72, 72)
    zs, ys, xs = grid.meshgrid()
    f = SampledField(grid, w.values(np.stack([zs, ys, xs], axis=-1)))
    worst = S.fd_residual_spotcheck(op, f, lambda pts: g.values(pts),
                                    npts=25, seed=3)
    assert worst < 5e-4
