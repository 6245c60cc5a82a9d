"""Irreducible representations of SO(4) and U(2), the compact-group Fourier
transform T, its inversion, and the Plancherel identity.

SO(4) is realized through its double cover SU(2) x SU(2): a label is a pair
(j1, j2) of half-integers and descends to SO(4) exactly when j1 + j2 is an
integer (parity rule).  The representation matrix at a node pair is the
Kronecker product of two Wigner D matrices.

U(2) is realized as (U(1) x SU(2)) / Z2: a label is an integer pair
m1 >= m2, with dimension m1 - m2 + 1, acting as the phase character
exp(i theta (m1+m2)) times D^{(m1-m2)/2}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from math import factorial, sqrt

import numpy as np

from ._accel import pairwise_sum
from .quadrature import EulerQuadSO4, SU2Quad, U2Quad

__all__ = [
    "ParityViolation", "wigner_jy", "wigner_d", "wigner_d_reference",
    "wigner_D", "wigner_D_stack", "su2_from_euler", "euler_from_su2",
    "so4_labels", "so4_dim", "so4_rep", "CompactSpectrum",
    "compact_transform", "synthesize", "compact_inverse",
    "compact_plancherel_check", "random_band_limited",
    "u2_labels", "u2_dim", "u2_rep", "u2_transform", "u2_synthesize",
    "u2_plancherel_check", "random_u2_band_limited",
]


class ParityViolation(ValueError):
    """Label pair does not descend from the double cover to SO(4)."""


def _check_half_integer(j):
    twoj = 2 * j
    if abs(twoj - round(twoj)) > 1e-12 or j < 0:
        raise ValueError(f"j = {j} is not a nonnegative half-integer")
    return round(twoj)


def wigner_jy(j) -> np.ndarray:
    """Angular-momentum generator J_y in the basis m = j, j-1, ..., -j."""
    twoj = _check_half_integer(j)
    d = twoj + 1
    m = j - np.arange(d)
    cp = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))  # raising from m[k+1]
    jy = np.zeros((d, d), dtype=complex)
    for k in range(d - 1):
        jy[k, k + 1] = cp[k] / 2j
        jy[k + 1, k] = -cp[k] / 2j
    return jy


@lru_cache(maxsize=64)
def _jy_eig(twoj: int):
    jy = wigner_jy(twoj / 2.0)
    lam, v = np.linalg.eigh(jy)
    return lam, v


def wigner_d(j, beta) -> np.ndarray:
    """Small Wigner matrix d^j(beta) = exp(-i beta J_y), real orthogonal.

    Vectorized over beta: returns (..., d, d).
    """
    twoj = _check_half_integer(j)
    lam, v = _jy_eig(twoj)
    beta = np.asarray(beta, dtype=float)
    phase = np.exp(-1j * beta[..., None] * lam)
    return np.einsum("ab,...b,cb->...ac", v, phase, v.conj()).real


def wigner_d_reference(j, beta) -> np.ndarray:
    """Independent closed-form evaluation of d^j(beta) via the explicit
    factorial sum (kept separate from wigner_d on purpose)."""
    twoj = _check_half_integer(j)
    d = twoj + 1
    ms = [j - k for k in range(d)]
    out = np.zeros((d, d))
    cb, sb = np.cos(beta / 2.0), np.sin(beta / 2.0)
    for a, mp in enumerate(ms):
        for b, m in enumerate(ms):
            pref = sqrt(factorial(round(j + m)) * factorial(round(j - m))
                        * factorial(round(j + mp)) * factorial(round(j - mp)))
            lo = max(0, round(m - mp))
            hi = min(round(j + m), round(j - mp))
            acc = 0.0
            for k in range(lo, hi + 1):
                num = (-1.0) ** (mp - m + k)
                den = (factorial(round(j + m) - k) * factorial(k)
                       * factorial(round(mp - m) + k)
                       * factorial(round(j - mp) - k))
                acc += num / den * cb ** (twoj + round(m - mp) - 2 * k) \
                    * sb ** (round(mp - m) + 2 * k)
            out[a, b] = pref * acc
    return out


def wigner_D(j, alpha, beta, gamma) -> np.ndarray:
    """Full Wigner matrix D^j(alpha,beta,gamma) = e^{-i m' alpha} d^j e^{-i m gamma}."""
    twoj = _check_half_integer(j)
    m = j - np.arange(twoj + 1)
    d = wigner_d(j, beta)
    return np.exp(-1j * np.multiply.outer(np.asarray(alpha), m))[..., :, None] \
        * d * np.exp(-1j * np.multiply.outer(np.asarray(gamma), m))[..., None, :]


def wigner_D_stack(j, euler: np.ndarray) -> np.ndarray:
    """D^j at an (n, 3) array of Euler triples -> (n, d, d)."""
    euler = np.asarray(euler, dtype=float)
    return wigner_D(j, euler[:, 0], euler[:, 1], euler[:, 2])


# ---------------------------------------------------------------------------
# SU(2) 2x2 arithmetic (D^{1/2} is the defining representation)
# ---------------------------------------------------------------------------


def su2_from_euler(alpha, beta, gamma) -> np.ndarray:
    ca, sa = np.cos(beta / 2.0), np.sin(beta / 2.0)
    return np.array([
        [ca * np.exp(-0.5j * (alpha + gamma)), -sa * np.exp(-0.5j * (alpha - gamma))],
        [sa * np.exp(0.5j * (alpha - gamma)), ca * np.exp(0.5j * (alpha + gamma))],
    ])


def euler_from_su2(u: np.ndarray):
    """Euler triple (alpha in [0,2pi), beta in [0,pi], gamma in [0,4pi))
    reproducing the SU(2) element exactly (no sign ambiguity)."""
    u = np.asarray(u, dtype=complex)
    c = abs(u[0, 0])
    beta = 2.0 * np.arctan2(abs(u[1, 0]), c)
    if abs(u[1, 0]) < 1e-14:       # beta ~ 0: only alpha+gamma matters
        alpha = 0.0
        gamma = (-2.0 * np.angle(u[0, 0])) % (4.0 * np.pi)
        return alpha, 0.0, gamma
    if c < 1e-14:                  # beta ~ pi: only alpha-gamma matters
        alpha = 0.0
        gamma = (-2.0 * np.angle(u[1, 0])) % (4.0 * np.pi)
        return alpha, np.pi, gamma
    s = -np.angle(u[0, 0])         # (alpha+gamma)/2
    t = np.angle(u[1, 0])          # (alpha-gamma)/2
    alpha = s + t
    gamma = s - t
    flips = 0
    while alpha < 0:
        alpha += 2.0 * np.pi
        flips += 1
    while alpha >= 2.0 * np.pi:
        alpha -= 2.0 * np.pi
        flips += 1
    if flips % 2:
        gamma += 2.0 * np.pi
    gamma = gamma % (4.0 * np.pi)
    return float(alpha), float(beta), float(gamma)


# ---------------------------------------------------------------------------
# SO(4) labels and representations
# ---------------------------------------------------------------------------


def so4_dim(label) -> int:
    j1, j2 = label
    return (_check_half_integer(j1) + 1) * (_check_half_integer(j2) + 1)


def so4_labels(J):
    """All labels (j1, j2) with j1, j2 <= J and j1 + j2 integral."""
    twoJ = int(round(2 * J))
    out = []
    for a in range(twoJ + 1):
        for b in range(twoJ + 1):
            if (a + b) % 2 == 0:
                out.append((a / 2.0, b / 2.0))
    return out


def so4_rep(label, euler_left, euler_right) -> np.ndarray:
    """Representation matrix at a point of the double cover: the Kronecker
    product D^{j1} otimes D^{j2}.  Well defined on SO(4) by the parity rule."""
    j1, j2 = label
    if (_check_half_integer(j1) + _check_half_integer(j2)) % 2:
        raise ParityViolation(f"label {label} has half-odd j1 + j2")
    d1 = wigner_D(j1, *euler_left)
    d2 = wigner_D(j2, *euler_right)
    return np.kron(d1, d2)


@dataclass
class CompactSpectrum:
    """Matrix-valued transform values Tf(label), finitely many labels."""

    coeffs: dict

    def labels(self):
        return list(self.coeffs)

    def hs_norm2_weighted(self, dim_fn) -> float:
        """sum over labels of d_label * ||Tf(label)||_HS^2."""
        return float(sum(dim_fn(lbl) * np.sum(np.abs(c) ** 2)
                         for lbl, c in self.coeffs.items()))

    def to_json(self) -> str:
        payload = {}
        for lbl, mat in self.coeffs.items():
            key = "(" + ",".join(repr(float(x)) if isinstance(lbl[0], float)
                                 else repr(int(x)) for x in lbl) + ")"
            payload[key] = [[float(v.real), float(v.imag)] for v in mat.ravel()]
        return json.dumps(payload)


def _dstacks(quad: SU2Quad, js):
    return {j: wigner_D_stack(j, quad.euler) for j in sorted(set(js))}


def compact_transform(f_values: np.ndarray, quad: EulerQuadSO4, J) -> CompactSpectrum:
    """Tf(label) = sum over nodes of w * f(k) * rep(k^{-1}).

    f_values has shape (n_left, n_right) over the product node set.
    """
    labels = so4_labels(J)
    left = _dstacks(quad.left, [l[0] for l in labels])
    right = _dstacks(quad.right, [l[1] for l in labels])
    wl, wr = quad.left.weights, quad.right.weights
    out = {}
    for (j1, j2) in labels:
        d1inv = left[j1].conj().transpose(0, 2, 1)
        d2inv = right[j2].conj().transpose(0, 2, 1)
        a = np.einsum("n,nm,nij->mij", wl, f_values, d1inv)
        t = np.einsum("m,mij,mkl->ikjl", wr, a, d2inv)
        dd = t.shape[0] * t.shape[1]
        out[(j1, j2)] = t.reshape(dd, dd)
    return CompactSpectrum(out)


def synthesize(spec: CompactSpectrum, quad: EulerQuadSO4) -> np.ndarray:
    """f(k) = sum over labels of d * tr[C_label rep(k)] on the node set."""
    left = _dstacks(quad.left, [l[0] for l in spec.coeffs])
    right = _dstacks(quad.right, [l[1] for l in spec.coeffs])
    n, m = quad.left.node_count, quad.right.node_count
    vals = np.zeros((n, m), dtype=complex)
    for (j1, j2), c in spec.coeffs.items():
        d1, d2 = left[j1], right[j2]
        k1, k2 = d1.shape[1], d2.shape[1]
        c4 = c.reshape(k1, k2, k1, k2)
        vals += so4_dim((j1, j2)) * np.einsum("ikjl,nji,mlk->nm", c4, d1, d2)
    return vals


def compact_inverse(spec: CompactSpectrum, euler_left, euler_right) -> complex:
    """Pointwise inversion f(x) = sum d tr[Tf(label) rep(x)]."""
    val = 0.0 + 0.0j
    for lbl, c in spec.coeffs.items():
        rep = so4_rep(lbl, euler_left, euler_right)
        val += so4_dim(lbl) * np.trace(c @ rep)
    return complex(val)


def compact_plancherel_check(f_values: np.ndarray, quad: EulerQuadSO4, J):
    """Returns lhs = int |f|^2 dk, rhs = sum d ||Tf||_HS^2, and their
    relative error."""
    w = np.outer(quad.left.weights, quad.right.weights)
    lhs = float(pairwise_sum((np.abs(f_values) ** 2 * w).ravel()).real)
    spec = compact_transform(f_values, quad, J)
    rhs = spec.hs_norm2_weighted(so4_dim)
    rel = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return {"lhs": lhs, "rhs": rhs, "rel_err": rel, "spectrum": spec}


def random_band_limited(rng, J, quad: EulerQuadSO4):
    """Random coefficient table and its synthesized node values; by Schur
    orthogonality the transform of the synthesis returns the table."""
    coeffs = {}
    for lbl in so4_labels(J):
        d = so4_dim(lbl)
        coeffs[lbl] = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / d
    spec = CompactSpectrum(coeffs)
    return spec, synthesize(spec, quad)


# ---------------------------------------------------------------------------
# U(2)
# ---------------------------------------------------------------------------


def u2_dim(label) -> int:
    m1, m2 = label
    return m1 - m2 + 1


def u2_labels(M: int):
    """Integer pairs m1 >= m2 with |m1|, |m2| <= M."""
    out = []
    for m1 in range(-M, M + 1):
        for m2 in range(-M, m1 + 1):
            out.append((m1, m2))
    return out


def u2_rep(label, theta, euler) -> np.ndarray:
    """Highest-weight model: det-power phase times an SU(2) Wigner matrix."""
    m1, m2 = label
    if m1 < m2:
        raise ValueError("label requires m1 >= m2")
    j = (m1 - m2) / 2.0
    return np.exp(1j * theta * (m1 + m2)) * wigner_D(j, *euler)


def u2_transform(f_values: np.ndarray, quad: U2Quad, M: int) -> CompactSpectrum:
    """f_values has shape (n_theta, n_su2)."""
    labels = u2_labels(M)
    stacks = _dstacks(quad.su2, [(m1 - m2) / 2.0 for (m1, m2) in labels])
    out = {}
    for (m1, m2) in labels:
        j = (m1 - m2) / 2.0
        dinv = stacks[j].conj().transpose(0, 2, 1)
        ph = np.exp(-1j * quad.theta * (m1 + m2)) * quad.theta_weights
        a = np.einsum("t,tn->n", ph, f_values)
        out[(m1, m2)] = np.einsum("n,n,nij->ij", quad.su2.weights, a, dinv)
    return CompactSpectrum(out)


def u2_synthesize(spec: CompactSpectrum, quad: U2Quad) -> np.ndarray:
    stacks = _dstacks(quad.su2, [(m1 - m2) / 2.0 for (m1, m2) in spec.coeffs])
    vals = np.zeros((quad.theta.size, quad.su2.node_count), dtype=complex)
    for (m1, m2), c in spec.coeffs.items():
        j = (m1 - m2) / 2.0
        tr = np.einsum("ij,nji->n", c, stacks[j])
        vals += u2_dim((m1, m2)) * np.outer(np.exp(1j * quad.theta * (m1 + m2)), tr)
    return vals


def u2_plancherel_check(f_values: np.ndarray, quad: U2Quad, M: int):
    w = np.outer(quad.theta_weights, quad.su2.weights)
    lhs = float(pairwise_sum((np.abs(f_values) ** 2 * w).ravel()).real)
    spec = u2_transform(f_values, quad, M)
    rhs = spec.hs_norm2_weighted(u2_dim)
    rel = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return {"lhs": lhs, "rhs": rhs, "rel_err": rel, "spectrum": spec}


def random_u2_band_limited(rng, M: int, quad: U2Quad):
    coeffs = {}
    for lbl in u2_labels(M):
        d = u2_dim(lbl)
        coeffs[lbl] = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / d
    spec = CompactSpectrum(coeffs)
    return spec, u2_synthesize(spec, quad)
