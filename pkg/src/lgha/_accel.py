"""Hot-kernel dispatch: numba-jitted inner loops with a pure-numpy fallback.

The environment variable ``LGHA_NUMBA`` selects the path: set ``LGHA_NUMBA=0``
to force the numpy fallback even when numba is installed.  The pairwise
reduction performs identical additions in identical order on both paths
(bit-identical results); the elementwise kernels agree up to fused
multiply-add rounding in the last bits.  ``benchmarks/bench_kernels.py``
times the two paths against each other.
"""

from __future__ import annotations

import os

import numpy as np

_WANT_NUMBA = os.environ.get("LGHA_NUMBA", "1") != "0"

try:
    if not _WANT_NUMBA:
        raise ImportError("numba disabled via LGHA_NUMBA=0")
    from numba import njit as _njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False

    def _njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


# ---------------------------------------------------------------------------
# pairwise (cascade) summation
#
# One fixed halving tree: a[0]+a[1], a[2]+a[3], ... per level, odd tail kept.
# Both implementations perform identical additions in identical order, so the
# result is bit-identical between the numba and numpy paths and independent
# of any threading.
# ---------------------------------------------------------------------------


def _pairwise_sum_np(a):
    a = np.ascontiguousarray(a)
    while a.size > 1:
        half = a.size // 2
        tail = a[2 * half:]
        a = a[0:2 * half:2] + a[1:2 * half:2]
        if tail.size:
            a = np.concatenate([a, tail])
    return a[0] if a.size else a.dtype.type(0)


@_njit(cache=True)
def _pairwise_sum_nb(a):  # pragma: no cover - exercised when numba is active
    n = a.size
    buf = a.copy()
    while n > 1:
        half = n // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if n % 2 == 1:
            buf[half] = buf[n - 1]
            n = half + 1
        else:
            n = half
    return buf[0]


def pairwise_sum(a):
    """Deterministic pairwise reduction of a 1-D array (complex or real).

    Always the vectorized tree: the jitted variant performs the identical
    additions but benchmarks slower (the reduction is memory bound), so it is
    kept only for the cross-path bit-identity test and the benchmark.
    """
    a = np.ravel(a)
    if a.size == 0:
        return 0.0 + 0.0j if np.iscomplexobj(a) else 0.0
    return _pairwise_sum_np(a)


# ---------------------------------------------------------------------------
# batched group laws on the six-parameter unipotent group
#
# Coordinate order (x1..x6); see groups.nil_mul for the law.
# ---------------------------------------------------------------------------


def _nil_mul_batch_np(p, q):
    out = p + q
    out[..., 2] += p[..., 0] * q[..., 1]
    out[..., 4] += p[..., 1] * q[..., 3]
    out[..., 5] += p[..., 0] * q[..., 4] + p[..., 2] * q[..., 3]
    return out


@_njit(cache=True)
def _nil_mul_batch_nb(p, q):  # pragma: no cover
    n = p.shape[0]
    out = np.empty_like(p)
    for i in range(n):
        out[i, 0] = p[i, 0] + q[i, 0]
        out[i, 1] = p[i, 1] + q[i, 1]
        out[i, 2] = p[i, 2] + q[i, 2] + p[i, 0] * q[i, 1]
        out[i, 3] = p[i, 3] + q[i, 3]
        out[i, 4] = p[i, 4] + q[i, 4] + p[i, 1] * q[i, 3]
        out[i, 5] = p[i, 5] + q[i, 5] + p[i, 0] * q[i, 4] + p[i, 2] * q[i, 3]
    return out


def nil_mul_batch(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if NUMBA_ENABLED and p.ndim == 2 and q.ndim == 2 and p.shape[0] >= 4096:
        return _nil_mul_batch_nb(np.ascontiguousarray(p), np.ascontiguousarray(q))
    return _nil_mul_batch_np(p, q)


def _nil_inv_batch_np(p):
    out = -p.copy()
    out[..., 2] += p[..., 0] * p[..., 1]
    out[..., 4] += p[..., 1] * p[..., 3]
    out[..., 5] += p[..., 0] * p[..., 4] + p[..., 2] * p[..., 3] \
        - p[..., 0] * p[..., 1] * p[..., 3]
    return out


@_njit(cache=True)
def _nil_inv_batch_nb(p):  # pragma: no cover
    n = p.shape[0]
    out = np.empty_like(p)
    for i in range(n):
        x1, x2, x3 = p[i, 0], p[i, 1], p[i, 2]
        x4, x5, x6 = p[i, 3], p[i, 4], p[i, 5]
        out[i, 0] = -x1
        out[i, 1] = -x2
        out[i, 2] = -x3 + x1 * x2
        out[i, 3] = -x4
        out[i, 4] = -x5 + x2 * x4
        out[i, 5] = -x6 + x1 * x5 + x3 * x4 - x1 * x2 * x4
    return out


def nil_inv_batch(p):
    p = np.asarray(p, dtype=float)
    if NUMBA_ENABLED and p.ndim == 2 and p.shape[0] >= 4096:
        return _nil_inv_batch_nb(np.ascontiguousarray(p))
    return _nil_inv_batch_np(p)


# ---------------------------------------------------------------------------
# three-parameter nilpotent symplectic group, batched
# ---------------------------------------------------------------------------


def _heis_mul_batch_np(p, q):
    out = p + q
    out[..., 0] += p[..., 2] * q[..., 1] - q[..., 2] * p[..., 1]
    return out


@_njit(cache=True)
def _heis_mul_batch_nb(p, q):  # pragma: no cover
    n = p.shape[0]
    out = np.empty_like(p)
    for i in range(n):
        out[i, 0] = p[i, 0] + q[i, 0] + p[i, 2] * q[i, 1] - q[i, 2] * p[i, 1]
        out[i, 1] = p[i, 1] + q[i, 1]
        out[i, 2] = p[i, 2] + q[i, 2]
    return out


def heis_mul_batch(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if NUMBA_ENABLED and p.ndim == 2 and q.ndim == 2 and p.shape[0] >= 4096:
        return _heis_mul_batch_nb(np.ascontiguousarray(p), np.ascontiguousarray(q))
    return _heis_mul_batch_np(p, q)


# ---------------------------------------------------------------------------
# grid convolution kernel on the three-parameter group
#
# out[m] = sum_g w * phi[g] * psi(inv(g) . pt[m])  with psi a complex Gaussian
# times plane wave:  psi(p) = exp(-|p - mu|^2 / (2 s^2)) * exp(i k.p).
# ---------------------------------------------------------------------------


@_njit(cache=True)
def _heis_conv_kernel_nb(phi_vals, gpts, mpts, mu, sig, kvec, weight):  # pragma: no cover
    nm = mpts.shape[0]
    ng = gpts.shape[0]
    out = np.empty(nm, dtype=np.complex128)
    inv_two_s2 = 1.0 / (2.0 * sig * sig)
    for i in range(nm):
        mz, my, mx = mpts[i, 0], mpts[i, 1], mpts[i, 2]
        acc = 0.0 + 0.0j
        for j in range(ng):
            gz, gy, gx = gpts[j, 0], gpts[j, 1], gpts[j, 2]
            pz = mz - gz - gx * my + mx * gy
            py = my - gy
            px = mx - gx
            dz, dy, dx = pz - mu[0], py - mu[1], px - mu[2]
            amp = np.exp(-(dz * dz + dy * dy + dx * dx) * inv_two_s2)
            ph = kvec[0] * pz + kvec[1] * py + kvec[2] * px
            acc += phi_vals[j] * amp * (np.cos(ph) + 1j * np.sin(ph))
        out[i] = acc * weight
    return out


def _heis_conv_kernel_np(phi_vals, gpts, mpts, mu, sig, kvec, weight):
    out = np.empty(mpts.shape[0], dtype=np.complex128)
    inv_two_s2 = 1.0 / (2.0 * sig * sig)
    for i in range(mpts.shape[0]):
        mz, my, mx = mpts[i]
        pz = mz - gpts[:, 0] - gpts[:, 2] * my + mx * gpts[:, 1]
        py = my - gpts[:, 1]
        px = mx - gpts[:, 2]
        arg = (pz - mu[0]) ** 2 + (py - mu[1]) ** 2 + (px - mu[2]) ** 2
        vals = phi_vals * np.exp(-arg * inv_two_s2) \
            * np.exp(1j * (kvec[0] * pz + kvec[1] * py + kvec[2] * px))
        out[i] = vals.sum() * weight
    return out


def heis_conv_grid(phi_vals, gpts, mpts, mu, sig, kvec, weight):
    """Convolution of sampled phi with a Gaussian*plane-wave on the 3-dim group."""
    phi_vals = np.ascontiguousarray(phi_vals, dtype=np.complex128)
    gpts = np.ascontiguousarray(gpts, dtype=float)
    mpts = np.ascontiguousarray(mpts, dtype=float)
    mu = np.asarray(mu, dtype=float)
    kvec = np.asarray(kvec, dtype=float)
    if NUMBA_ENABLED:
        return _heis_conv_kernel_nb(phi_vals, gpts, mpts, mu, float(sig), kvec,
                                    float(weight))
    return _heis_conv_kernel_np(phi_vals, gpts, mpts, mu, float(sig), kvec,
                                float(weight))
