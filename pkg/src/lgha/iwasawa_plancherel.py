"""Combined transforms along Iwasawa coordinates: the K/N/A transform on the
special linear group (and its symplectic subgroup), the semidirect-product
transform with a Euclidean translation part, lift maps and their invariances,
and Plancherel checks.

L2 norms on the group side use the product coordinate measure
dk . dn . dt(logA), under which the factorized transform satisfies the
Plancherel identity by Fubini.  The primary evaluation path is separable
functions u(k) v(n) w(t); a budget-capped nested-quadrature path exists for
spot checks of the factorization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import peterweyl as pw
from ._accel import pairwise_sum
from .corpus import GaussProduct
from .quadrature import (EulerQuadSO4, U2Quad, SampledField, box_grid,
                         dft_forward)

__all__ = [
    "SeparableKNAFunction", "KNASpectrum",
    "kna_transform", "plancherel_sl4_check",
    "sp4_n_chart", "sp4_a_chart", "sp4_restrict_check",
    "semidirect_mul", "affine_embed", "semidirect_transform",
    "plancherel_semidirect_check",
    "lift_upsilon", "lift_h", "lift_q",
    "upsilon_invariance_error", "q_lift_invariance_error",
    "nested_transform_oracle",
]

N_AXES = ("x1", "x2", "x3", "x4", "x5", "x6")
A_AXES = ("t1", "t2", "t3")


@dataclass
class SeparableKNAFunction:
    """f(k n a) = u(k) v(n) w(t(a)), with optional translation factor r(v0)
    for the semidirect product.  u is a band-limited coefficient table on the
    compact factor; v, w, r are separable Gaussian-type products."""

    u: pw.CompactSpectrum
    v: GaussProduct
    w: GaussProduct
    r: Optional[GaussProduct] = None
    compact: str = "so4"  # or "u2"

    def u_values(self, quad):
        if self.compact == "so4":
            return pw.synthesize(self.u, quad)
        return pw.u2_synthesize(self.u, quad)


@dataclass
class KNASpectrum:
    """Factorized transform: a matrix per compact label times per-axis
    one-dimensional Euclidean spectra for the unipotent part (xi), the
    diagonal part (lambda), and optionally the translation part (eta)."""

    k_part: pw.CompactSpectrum
    n_spectra: list
    a_spectra: list
    r_spectra: Optional[list] = None

    def value(self, label, n_idx, a_idx, r_idx=None) -> np.ndarray:
        """Transform value at one spectral grid point: the label matrix scaled
        by the scalar Euclidean factors."""
        scal = 1.0 + 0.0j
        for s, i in zip(self.n_spectra, n_idx):
            scal *= s.values[i]
        for s, i in zip(self.a_spectra, a_idx):
            scal *= s.values[i]
        if r_idx is not None:
            for s, i in zip(self.r_spectra, r_idx):
                scal *= s.values[i]
        return scal * self.k_part.coeffs[label]

    def spectral_norm2(self, dim_fn) -> float:
        """sum_labels d ||T||_HS^2 times the (2 pi)-normalized L2 masses of
        every Euclidean spectral factor."""
        total = self.k_part.hs_norm2_weighted(dim_fn)
        for s in self.n_spectra + self.a_spectra + (self.r_spectra or []):
            total *= s.integrate_abs2() / (2.0 * np.pi)
        return float(total)


def _euclid_spectra(g: GaussProduct, names, count: int):
    """Sample each 1-D factor on its own suggested box and transform."""
    out = []
    fields = []
    for name, factor in zip(names, g.factors):
        lo, hi = factor.suggested_axis()
        grid = box_grid((name,), lo, hi, count)
        fld = SampledField(grid, factor.values(grid.axes[0].nodes()))
        fields.append(fld)
        out.append(dft_forward(fld))
    return out, fields


def kna_transform(f: SeparableKNAFunction, quad, J, count: int = 64) -> KNASpectrum:
    """T F f(lambda, xi, label) = Tu(label) Fv(xi) Fw(lambda); the character of
    the diagonal part is the Euclidean phase exp(-i lambda . t) in the logA
    chart."""
    if f.compact == "so4":
        tu = pw.compact_transform(f.u_values(quad), quad, J)
    else:
        tu = pw.u2_transform(f.u_values(quad), quad, J)
    n_names = N_AXES[: f.v.dim]
    a_names = A_AXES[: f.w.dim]
    n_spec, _ = _euclid_spectra(f.v, n_names, count)
    a_spec, _ = _euclid_spectra(f.w, a_names, count)
    r_spec = None
    if f.r is not None:
        r_spec, _ = _euclid_spectra(f.r, ("v1", "v2", "v3", "v4"), count)
    return KNASpectrum(tu, n_spec, a_spec, r_spec)


def _group_side_norm2(f: SeparableKNAFunction, quad, count: int) -> float:
    if f.compact == "so4":
        w = np.outer(quad.left.weights, quad.right.weights)
    else:
        w = np.outer(quad.theta_weights, quad.su2.weights)
    uvals = f.u_values(quad)
    lhs = float(pairwise_sum((np.abs(uvals) ** 2 * w).ravel()).real)
    for g, names in ((f.v, N_AXES), (f.w, A_AXES)):
        _, fields = _euclid_spectra(g, names[: g.dim], count)
        for fld in fields:
            vals = np.abs(fld.values) ** 2 * fld.grid.axes[0].weights()
            lhs *= float(pairwise_sum(vals).real)
    if f.r is not None:
        _, fields = _euclid_spectra(f.r, ("v1", "v2", "v3", "v4"), count)
        for fld in fields:
            vals = np.abs(fld.values) ** 2 * fld.grid.axes[0].weights()
            lhs *= float(pairwise_sum(vals).real)
    return lhs


def plancherel_sl4_check(f: SeparableKNAFunction, quad: EulerQuadSO4, J,
                         count: int = 64):
    """||f||^2 over dk dn dt against the label sum of weighted
    Hilbert-Schmidt masses with (2 pi)^{-9} on the spectral side."""
    lhs = _group_side_norm2(f, quad, count)
    spec = kna_transform(f, quad, J, count)
    rhs = spec.spectral_norm2(pw.so4_dim)
    rel = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return {"lhs": lhs, "rhs": rhs, "rel_err": rel, "spectrum": spec}


# ---------------------------------------------------------------------------
# symplectic restriction: K = U(2), N four-dimensional, A two-dimensional
# ---------------------------------------------------------------------------


def sp4_n_chart(params) -> np.ndarray:
    """Unit upper-triangular symplectic matrices (adapted form), charted by
    the free entries (n12, n13, n23, n14); the remaining entries are
    n34 = -n12 and n24 = n13 - n12 n23."""
    p = np.asarray(params, dtype=float)
    n12, n13, n23, n14 = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    m = np.zeros(p.shape[:-1] + (4, 4))
    idx = np.arange(4)
    m[..., idx, idx] = 1.0
    m[..., 0, 1] = n12
    m[..., 0, 2] = n13
    m[..., 0, 3] = n14
    m[..., 1, 2] = n23
    m[..., 1, 3] = n13 - n12 * n23
    m[..., 2, 3] = -n12
    return m


def sp4_a_chart(t) -> np.ndarray:
    """diag(e^{t1}, e^{t2}, e^{-t2}, e^{-t1})."""
    t = np.asarray(t, dtype=float)
    return np.stack([np.exp(t[..., 0]), np.exp(t[..., 1]),
                     np.exp(-t[..., 1]), np.exp(-t[..., 0])], axis=-1)


def sp4_restrict_check(f: SeparableKNAFunction, quad: U2Quad, M: int,
                       count: int = 64):
    """Plancherel identity restricted to the symplectic subgroup: U(2)
    coefficients, a four-dimensional unipotent chart and a two-dimensional
    diagonal chart, with (2 pi)^{-6} on the spectral side."""
    if f.compact != "u2":
        raise ValueError("symplectic restriction expects a U(2) factor")
    if f.v.dim != 4 or f.w.dim != 2:
        raise ValueError("expected dim N = 4 and dim A = 2")
    lhs = _group_side_norm2(f, quad, count)
    spec = kna_transform(f, quad, M, count)
    rhs = spec.spectral_norm2(pw.u2_dim)
    rel = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return {"lhs": lhs, "rhs": rhs, "rel_err": rel, "spectrum": spec}


# ---------------------------------------------------------------------------
# semidirect product with the translation group
# ---------------------------------------------------------------------------


def semidirect_mul(v, g, v2, g2):
    """(v, g)(v', g') = (v + g v', g g')."""
    v = np.asarray(v, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    return v + g @ v2, g @ g2


def affine_embed(v, g) -> np.ndarray:
    """5x5 matrix oracle for the semidirect law."""
    m = np.eye(5)
    m[:4, :4] = g
    m[:4, 4] = np.asarray(v, dtype=float)
    return m


def semidirect_transform(f: SeparableKNAFunction, quad, J,
                         count: int = 64) -> KNASpectrum:
    """Adds the Euclidean factor exp(-i <eta, v>) on the translation part."""
    if f.r is None:
        raise ValueError("semidirect transform needs a translation factor")
    return kna_transform(f, quad, J, count)


def plancherel_semidirect_check(f: SeparableKNAFunction, quad: EulerQuadSO4,
                                J, count: int = 64):
    """Plancherel on the semidirect product: thirteen Euclidean dimensions
    (4 + 6 + 3), so (2 pi)^{-13} on the spectral side."""
    if f.r is None:
        raise ValueError("needs a translation factor")
    lhs = _group_side_norm2(f, quad, count)
    spec = semidirect_transform(f, quad, J, count)
    rhs = spec.spectral_norm2(pw.so4_dim)
    rel = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return {"lhs": lhs, "rhs": rhs, "rel_err": rel, "spectrum": spec}


# ---------------------------------------------------------------------------
# lifts and invariances
# ---------------------------------------------------------------------------


def lift_upsilon(f):
    """Extend f on G to G x K by U(g, k1) = f(g k1); restricting k1 to the
    identity recovers f."""

    def lifted(g, k1):
        return f(g @ k1)

    return lifted


def upsilon_invariance_error(f, g, h, k1) -> float:
    """|U(g h, h^{-1} k1) - U(g, k1)| for h in the compact factor."""
    lifted = lift_upsilon(f)
    return abs(lifted(g @ h, h.T @ k1) - lifted(g, k1))


def lift_h(f):
    """h(f)(v, g) = f(g v, g) on the semidirect product."""

    def lifted(v, g):
        return f(g @ np.asarray(v, dtype=float), g)

    return lifted


def lift_q(f):
    """Extension to the triple group: (v, g, h) -> f(g v, g h)."""

    def lifted(v, g, h):
        return f(g @ np.asarray(v, dtype=float), g @ h)

    return lifted


def q_lift_invariance_error(f, v, g, h, q) -> float:
    """|F(q^{-1} v, g, q^{-1} h) - F(v, g q^{-1}, h)| for the lifted F."""
    lifted = lift_q(f)
    qinv = np.linalg.inv(q)
    return abs(lifted(qinv @ np.asarray(v, dtype=float), g, qinv @ h)
               - lifted(v, g @ qinv, h))


# ---------------------------------------------------------------------------
# nested-quadrature spot check of the factorized transform
# ---------------------------------------------------------------------------


def nested_transform_oracle(fn, quad, label, n_grids, a_grids, n_freq_idx,
                            a_freq_idx):
    """Brute-force transform value at one spectral point, treating fn as an
    opaque function of (compact node pair, unipotent point, diagonal point):

      sum over nodes of w_k rep(k^{-1}) fn(k, n, t) e^{-i xi.n} e^{-i lam.t}

    with the same discrete measures the factorized path uses, iterated as a
    nested sum: compact node pairs outside, the (n, t) product grid inside.
    fn maps ((3,), (3,), (Nn, dn), (Nt, dt)) to an (Nn, Nt) value array.
    Intended for small grids; the cost is |K|^2 x |n-grid| x |t-grid|.
    """
    n_nodes = [g.axes[0].nodes() for g in n_grids]
    t_nodes = [g.axes[0].nodes() for g in a_grids]
    n_mesh = np.meshgrid(*n_nodes, indexing="ij")
    t_mesh = np.meshgrid(*t_nodes, indexing="ij")
    npts = np.stack([m.ravel() for m in n_mesh], axis=-1)
    tpts = np.stack([m.ravel() for m in t_mesh], axis=-1)
    n_w = np.prod([g.axes[0].step for g in n_grids])
    t_w = np.prod([g.axes[0].step for g in a_grids])

    xi = np.array([dft_forward(SampledField(g, np.zeros(g.shape))).freqs(g.names[0])[i]
                   for g, i in zip(n_grids, n_freq_idx)])
    lam = np.array([dft_forward(SampledField(g, np.zeros(g.shape))).freqs(g.names[0])[i]
                    for g, i in zip(a_grids, a_freq_idx)])

    pair_phase = np.outer(np.exp(-1j * npts @ xi), np.exp(-1j * tpts @ lam))

    d = pw.so4_dim(label)
    acc = np.zeros((d, d), dtype=complex)
    wl, wr = quad.left.weights, quad.right.weights
    for i in range(quad.left.node_count):
        el = quad.left.euler[i]
        for jn in range(quad.right.node_count):
            er = quad.right.euler[jn]
            rep_inv = pw.so4_rep(label, el, er).conj().T
            vals = fn(el, er, npts, tpts)
            s = complex(pairwise_sum((vals * pair_phase).ravel()))
            acc += wl[i] * wr[jn] * s * rep_inv
    return acc * n_w * t_w
