"""Timing comparison of the numba kernels against their numpy fallbacks.

Run:  python benchmarks/bench_kernels.py
(set LGHA_NUMBA=0 beforehand to confirm the fallback path works end to end).
"""

import time

import numpy as np

from lgha import _accel as A


def _timed(fn, args):
    t0 = time.perf_counter()
    fn(*args)
    return time.perf_counter() - t0


def bench(label, fn, *args, repeat=5):
    fn(*args)  # warm up (includes JIT compilation)
    best = min(_timed(fn, args) for _ in range(repeat))
    print(f"  {label:<28s} {best * 1e3:9.2f} ms")
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"numba active: {A.NUMBA_ENABLED}")

    n = 4_000_000
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    print(f"pairwise_sum, n = {n}")
    t_np = bench("numpy tree", A._pairwise_sum_np, a)
    if A.NUMBA_ENABLED:
        t_nb = bench("numba tree", A._pairwise_sum_nb, np.ascontiguousarray(a))
        print(f"  speedup: {t_np / t_nb:.2f}x")

    m = 2_000_000
    p = rng.normal(size=(m, 6))
    q = rng.normal(size=(m, 6))
    print(f"unipotent group law batch, n = {m}")
    t_np = bench("numpy", A._nil_mul_batch_np, p, q)
    if A.NUMBA_ENABLED:
        t_nb = bench("numba", A._nil_mul_batch_nb, p, q)
        print(f"  speedup: {t_np / t_nb:.2f}x")

    print(f"unipotent inverse batch, n = {m}")
    t_np = bench("numpy", A._nil_inv_batch_np, p)
    if A.NUMBA_ENABLED:
        t_nb = bench("numba", A._nil_inv_batch_nb, p)
        print(f"  speedup: {t_np / t_nb:.2f}x")

    ng, nm = 12_000, 2_000
    phi = rng.normal(size=ng) + 1j * rng.normal(size=ng)
    gpts = rng.normal(size=(ng, 3))
    mpts = rng.normal(size=(nm, 3))
    mu = np.zeros(3)
    kv = np.array([0.3, -0.2, 0.1])
    print(f"group convolution kernel, {ng} x {nm} pairs")
    t_np = bench("numpy", A._heis_conv_kernel_np, phi, gpts, mpts, mu, 1.0,
                 kv, 1e-3, repeat=2)
    if A.NUMBA_ENABLED:
        t_nb = bench("numba", A._heis_conv_kernel_nb, phi, gpts, mpts, mu,
                     1.0, kv, 1e-3, repeat=2)
        print(f"  speedup: {t_np / t_nb:.2f}x")


if __name__ == "__main__":
    main()
