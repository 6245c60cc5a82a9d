"""Fourier analysis on the six-parameter unipotent group N: the lift to the
auxiliary group L and its invariance, convolution products, the coordinate
Fourier transform, the bilinear Parseval identity, and the Plancherel
formula.

The coordinate Fourier transform on N is the Euclidean transform in the
global chart (x1..x6); it does not diagonalize the noncommutative
convolution, so the only integrated identities asserted here are the
Parseval pairing and the Plancherel formula, plus the lifted-convolution
equality on the slice of L where it holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import groups
from ._accel import pairwise_sum, heis_conv_grid
from .corpus import GaussProduct, product_overlap
from .quadrature import (SampledField, Spectrum, box_grid, dft_forward,
                         integrate, monte_carlo, norm2, MCResult,
                         DEFAULT_GRID_BUDGET)

__all__ = [
    "reduce_to_nil", "LiftedFunction", "lift_to_L", "invariance_shift",
    "nil_shift_of_L", "flat_shift_of_L",
    "convolve_N", "fourier_N", "fourier_N_separable",
    "plancherel_N_check", "parseval_N_check", "lifted_convolution_check",
    "heis_convolve_grid_field",
]

NIL_AXES = ("x1", "x2", "x3", "x4", "x5", "x6")


# ---------------------------------------------------------------------------
# lift to L
# ---------------------------------------------------------------------------


def reduce_to_nil(lpts) -> np.ndarray:
    """Project L (coordinates x6,x5,x4,x3,x2,t3,t2,x1,t1) onto N coordinates
    (x1..x6) along the invariance directions:

      w1 = t1 + x1
      w2 = t2 + x2
      w3 = t3 + x3 + x1 (t2 + x2)
      w4 = x4
      w5 = x5 + x2 x4
      w6 = x6 + x3 x4 + x1 (x5 + x2 x4)

    Composing the line action after the plane action on the x-block, with the
    translation slots folded in; restricted to the embedded copy of N this is
    the identity chart.
    """
    l = np.asarray(lpts, dtype=float)
    x6, x5, x4 = l[..., 0], l[..., 1], l[..., 2]
    x3, x2 = l[..., 3], l[..., 4]
    t3, t2 = l[..., 5], l[..., 6]
    x1, t1 = l[..., 7], l[..., 8]
    w1 = t1 + x1
    w2 = t2 + x2
    w3 = t3 + x3 + x1 * (t2 + x2)
    w4 = x4
    w5 = x5 + x2 * x4
    w6 = x6 + x3 * x4 + x1 * (x5 + x2 * x4)
    return np.stack([w1, w2, w3, w4, w5, w6], axis=-1)


@dataclass
class LiftedFunction:
    """Extension of a function on N to L, constant along the invariance
    directions of `invariance_shift`."""

    base: object  # callable on (..., 6) arrays

    def __call__(self, lpts):
        return self.base(reduce_to_nil(lpts))

    def on_nil(self, npts):
        return self.base(np.asarray(npts, dtype=float))


def lift_to_L(f) -> LiftedFunction:
    return LiftedFunction(f)


def invariance_shift(lpts, h, r, k) -> np.ndarray:
    """The three-parameter family of transformations of L under which every
    lifted function is invariant (exactly, as polynomial identities):

      x3 -> x3 - r,  t3 -> t3 + r + h (t2 + x2)
      x2 -> x2 - k,  t2 -> t2 + k,  x5 -> x5 + k x4
      x1 -> x1 - h,  t1 -> t1 + h,  x6 -> x6 + r x4 + h (x5 + x2 x4)

    The three flows commute, and their orbits are precisely the fibers of
    `reduce_to_nil`.
    """
    l = np.asarray(lpts, dtype=float)
    x6, x5, x4 = l[..., 0].copy(), l[..., 1].copy(), l[..., 2].copy()
    x3, x2 = l[..., 3].copy(), l[..., 4].copy()
    t3, t2 = l[..., 5].copy(), l[..., 6].copy()
    out = l.copy()
    out[..., 0] = x6 + r * x4 + h * (x5 + x2 * x4)
    out[..., 1] = x5 + k * x4
    out[..., 3] = x3 - r
    out[..., 4] = x2 - k
    out[..., 5] = t3 + r + h * (t2 + x2)
    out[..., 6] = t2 + k
    out[..., 7] = out[..., 7] - h
    out[..., 8] = out[..., 8] + h
    return out


def nil_shift_of_L(lpts, y) -> np.ndarray:
    """Left convolution shift of an L point in the N slots (x-block, t3, t2,
    t1) by the inverse of the N point y; the slots (x3, x2, x1) ride along."""
    l = np.asarray(lpts, dtype=float)
    y = np.asarray(y, dtype=float)
    z = groups.nil_inv(y)
    out = l.copy()
    z1, z2, z3 = z[..., 0], z[..., 1], z[..., 2]
    z4, z5, z6 = z[..., 3], z[..., 4], z[..., 5]
    out[..., 0] = z6 + l[..., 0] + z1 * l[..., 1] + z3 * l[..., 2]
    out[..., 1] = z5 + l[..., 1] + z2 * l[..., 2]
    out[..., 2] = z4 + l[..., 2]
    out[..., 5] = z3 + l[..., 5] + z1 * l[..., 6]
    out[..., 6] = z2 + l[..., 6]
    out[..., 8] = z1 + l[..., 8]
    return out


def flat_shift_of_L(lpts, y) -> np.ndarray:
    """Commutative convolution shift in the (x-block, x3, x2, x1) slots."""
    l = np.asarray(lpts, dtype=float)
    y = np.asarray(y, dtype=float)
    out = l.copy()
    out[..., 0] = l[..., 0] - y[..., 5]
    out[..., 1] = l[..., 1] - y[..., 4]
    out[..., 2] = l[..., 2] - y[..., 3]
    out[..., 3] = l[..., 3] - y[..., 2]
    out[..., 4] = l[..., 4] - y[..., 1]
    out[..., 7] = l[..., 7] - y[..., 0]
    return out


# ---------------------------------------------------------------------------
# convolution on N
# ---------------------------------------------------------------------------


def _nil_grid(box, count, budget):
    if np.isscalar(box):
        return box_grid(NIL_AXES, -box, box, count, budget=budget)
    lo, hi = box
    return box_grid(NIL_AXES, lo, hi, count, budget=budget)


def convolve_N(phi, f, at, method: str = "grid", box=6.0,
               count: int = 12, n: int = 1 << 20, seed: int = 0,
               sampler=None, param: str = "right",
               budget: int = DEFAULT_GRID_BUDGET):
    """Noncommutative convolution (phi * f)(at) = int f(g^{-1} h) phi(g) dg.

    param="right" substitutes u = g^{-1} h (f is evaluated plainly, phi at
    h u^{-1}); param="left" integrates over g directly.  Both substitutions
    are measure preserving (unit Jacobians).  method="grid" uses a tensor
    box rule (box is a half-width or a (lo, hi) pair of 6-vectors),
    method="mc" importance sampling with a reported standard error.
    """
    at = np.asarray(at, dtype=float)

    if param == "right":
        def integrand(u):
            return f(u) * phi(groups.nil_mul(np.broadcast_to(at, u.shape), groups.nil_inv(u)))
    elif param == "left":
        def integrand(g):
            return f(groups.nil_mul(groups.nil_inv(g), np.broadcast_to(at, g.shape))) * phi(g)
    else:
        raise ValueError("param must be 'right' or 'left'")

    if method == "grid":
        grid = _nil_grid(box, count, budget)
        field = SampledField.from_callable(
            grid, lambda *mesh: integrand(np.stack(mesh, axis=-1)))
        return integrate(field)
    if method == "mc":
        mean = np.zeros(6) if sampler is None else np.asarray(sampler[0], dtype=float)
        sig = np.ones(6) if sampler is None else np.asarray(sampler[1], dtype=float)
        return monte_carlo(integrand, mean, sig, n, seed)
    raise ValueError("method must be 'grid' or 'mc'")


def heis_convolve_grid_field(phi_vals, gpts, mpts, psi_mu, psi_sigma, psi_k,
                             weight):
    """Grid convolution on the three-parameter group against a Gaussian times
    plane wave (hot kernel; see _accel)."""
    return heis_conv_grid(phi_vals, gpts, mpts, psi_mu, psi_sigma, psi_k, weight)


# ---------------------------------------------------------------------------
# Fourier transform and Plancherel on N
# ---------------------------------------------------------------------------


def fourier_N(field: SampledField) -> Spectrum:
    """Six-axis Euclidean transform in the global chart of N."""
    return dft_forward(field, axes=[a.name for a in field.grid.axes])


def fourier_N_separable(f: GaussProduct, grids_1d):
    """Product of one-dimensional transforms of a separable function; returns
    the list of per-axis spectra."""
    out = []
    for factor, grid in zip(f.factors, grids_1d):
        fld = SampledField(grid, factor.values(grid.axes[0].nodes()))
        out.append(dft_forward(fld))
    return out


def plancherel_N_check(f, box: float = 6.0, count: int = 14,
                       budget: int = DEFAULT_GRID_BUDGET):
    """lhs = int |f|^2 dX by quadrature, rhs = (2 pi)^{-6} int |Ff|^2 dxi.

    Separable inputs (GaussProduct) factor into one-dimensional checks; other
    callables are sampled on the full grid (budget permitting).
    """
    if isinstance(f, GaussProduct):
        lhs = 1.0
        rhs = 1.0
        for factor in f.factors:
            lo, hi = factor.suggested_axis()
            grid = box_grid(("x",), lo, hi, count * 4)
            fld = SampledField(grid, factor.values(grid.axes[0].nodes()))
            lhs *= norm2(fld)
            rhs *= dft_forward(fld).integrate_abs2() / (2.0 * np.pi)
    else:
        grid = _nil_grid(box, count, budget)
        fld = SampledField.from_callable(
            grid, lambda *mesh: f(np.stack(mesh, axis=-1)))
        lhs = norm2(fld)
        rhs = fourier_N(fld).integrate_abs2() / (2.0 * np.pi) ** 6
    rel = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return {"lhs": lhs, "rhs": rhs, "rel_err": rel}


def parseval_N_check(f, phi, method: str = "grid", count: int = 16,
                     n: int = 1 << 20, seed: int = 0,
                     budget: int = DEFAULT_GRID_BUDGET):
    """Bilinear pairing identity: (phi-check * f)(0) against
    (2 pi)^{-6} int Ff conj(Fphi) dxi, where phi-check(X) = conj(phi(X^{-1})).

    f and phi are separable GaussProduct functions; the spectral side is
    evaluated from exact one-dimensional transforms sampled on the dual grid,
    the convolution side through the group law (grid or Monte Carlo) on a
    box adapted to the pairing's Gaussian envelope.
    """
    def phi_check(x):
        return np.conj(phi.values(groups.nil_inv(x)))

    rhs = 1.0
    for ff, pf in zip(f.factors, phi.factors):
        lo = min(ff.suggested_axis()[0], pf.suggested_axis()[0])
        hi = max(ff.suggested_axis()[1], pf.suggested_axis()[1])
        grid = box_grid(("x",), lo, hi, count * 4)
        sf = dft_forward(SampledField(grid, ff.values(grid.axes[0].nodes())))
        sp = dft_forward(SampledField(grid, pf.values(grid.axes[0].nodes())))
        rhs *= complex(pairwise_sum(sf.values * np.conj(sp.values))
                       * sf.freq_weight()) / (2.0 * np.pi)

    center, width = product_overlap(f, phi)
    # box margins stay proportional to the envelope width so the node spacing
    # tracks the integrand's bandwidth (polynomial factors included)
    box = (center - 7.5 * width - 0.3, center + 7.5 * width + 0.3)
    # the sampler is deliberately wider than the integrand's envelope so the
    # importance weights carry genuine variance
    lhs = convolve_N(phi_check, f.values, np.zeros(6), method=method, box=box,
                     count=count, n=n, seed=seed,
                     sampler=(center, 1.35 * width), budget=budget)
    if isinstance(lhs, MCResult):
        rel = abs(lhs.estimate - rhs) / max(abs(rhs), 1e-300)
        return {"lhs": lhs.estimate, "rhs": rhs, "rel_err": rel,
                "stderr": lhs.stderr,
                "within_3sigma": lhs.agrees(rhs)}
    rel = abs(lhs - rhs) / max(abs(rhs), 1e-300)
    return {"lhs": lhs, "rhs": rhs, "rel_err": rel}


def lifted_convolution_check(f, u, lpoint, n: int = 1 << 20, seed: int = 0):
    """Compare u * F (convolution in the N slots of L) with the commutative
    convolution in the flat slots, for F the lift of f, at one L point.

    The identity holds exactly on the slice {x2 slot = 0} of L, which is where
    the calling tests sample; off the slice the two sides differ by terms
    proportional to that coordinate.  Both sides are importance-sampled
    Monte Carlo estimates with a shared sample budget.
    """
    F = lift_to_L(f.values if isinstance(f, GaussProduct) else f)
    lpoint = np.asarray(lpoint, dtype=float)

    def side_nil(y):
        return F(nil_shift_of_L(np.broadcast_to(lpoint, y.shape[:-1] + (9,)), y)) \
            * u.values(y)

    def side_flat(y):
        return F(flat_shift_of_L(np.broadcast_to(lpoint, y.shape[:-1] + (9,)), y)) \
            * u.values(y)

    mean = np.array([fac.mu for fac in u.factors])
    sig = np.array([fac.sigma for fac in u.factors])
    a = monte_carlo(side_nil, mean, sig, n, seed)
    b = monte_carlo(side_flat, mean, sig, n, seed + 1)
    denom = max(abs(a.estimate), abs(b.estimate), 1e-300)
    rel = abs(a.estimate - b.estimate) / denom
    sigma_comb = float(np.hypot(a.stderr, b.stderr))
    return {"lhs": a.estimate, "rhs": b.estimate, "rel_err": rel,
            "stderr": sigma_comb,
            "within_3sigma": abs(a.estimate - b.estimate) <= 3 * sigma_comb}
