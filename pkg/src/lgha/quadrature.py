"""Tensor grids, quadrature rules, discrete Fourier transforms, Monte Carlo
integration, and Haar quadrature on SU(2)xSU(2) and U(2).

Fourier convention used throughout the package: the forward transform carries
the kernel exp(-i <xi, x>) and no prefactor; every (2pi) factor sits on the
inverse / spectral side, i.e. ||f||^2 = (2pi)^{-d} ||Ff||^2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._accel import pairwise_sum

DEFAULT_GRID_BUDGET = 2 ** 25
DEFAULT_SO4_NODE_BUDGET = 2 ** 21

AXIS_KINDS = ("uniform-periodic", "uniform-box", "gauss-legendre")


class BudgetExceeded(RuntimeError):
    """A grid or node set would exceed the configured point budget."""


class AxisKindMismatch(TypeError):
    """An operation was requested on an axis kind that does not support it."""


@dataclass(frozen=True)
class Axis:
    """One grid axis.  uniform-box nodes are cell-centered so that symmetric
    boxes contain -x for every node x; uniform-periodic nodes start at lo."""

    name: str
    kind: str
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.kind not in AXIS_KINDS:
            raise ValueError(f"unknown axis kind {self.kind!r}")
        if self.count < 2:
            raise ValueError("axis needs at least 2 nodes")
        if not self.lo < self.hi:
            raise ValueError("axis requires lo < hi")

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / self.count

    def nodes(self) -> np.ndarray:
        if self.kind == "uniform-periodic":
            return self.lo + self.step * np.arange(self.count)
        if self.kind == "uniform-box":
            return self.lo + self.step * (np.arange(self.count) + 0.5)
        x, _ = np.polynomial.legendre.leggauss(self.count)
        return 0.5 * (self.hi + self.lo) + 0.5 * (self.hi - self.lo) * x

    def weights(self) -> np.ndarray:
        if self.kind in ("uniform-periodic", "uniform-box"):
            return np.full(self.count, self.step)
        _, w = np.polynomial.legendre.leggauss(self.count)
        return 0.5 * (self.hi - self.lo) * w


@dataclass(frozen=True)
class GridSpec:
    axes: tuple

    def __init__(self, axes, budget: int = DEFAULT_GRID_BUDGET):
        axes = tuple(axes)
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate axis names")
        total = 1
        for a in axes:
            total *= a.count
        if total > budget:
            raise BudgetExceeded(f"grid has {total} points > budget {budget}")
        object.__setattr__(self, "axes", axes)

    @property
    def shape(self):
        return tuple(a.count for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def names(self):
        return tuple(a.name for a in self.axes)

    def axis(self, name: str) -> Axis:
        for a in self.axes:
            if a.name == name:
                return a
        raise KeyError(name)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def meshgrid(self):
        return np.meshgrid(*[a.nodes() for a in self.axes], indexing="ij")


def box_grid(names, lo, hi, count, budget=DEFAULT_GRID_BUDGET) -> GridSpec:
    """Convenience: identical cell-centered box axes for every name."""
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (len(names),))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (len(names),))
    count = np.broadcast_to(np.asarray(count, dtype=int), (len(names),))
    axes = [Axis(n, "uniform-box", lo[i], hi[i], int(count[i]))
            for i, n in enumerate(names)]
    return GridSpec(axes, budget=budget)


@dataclass
class SampledField:
    """Complex values sampled on a tensor grid, row-major in axis order."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"value shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    @classmethod
    def from_callable(cls, grid: GridSpec, fn, chunk_axis0: bool = True):
        """Sample fn(*coordinate_arrays) on the grid.

        Large grids are evaluated in chunks along the first axis to bound
        peak memory.
        """
        shape = grid.shape
        if not chunk_axis0 or grid.size <= 2 ** 20:
            mesh = grid.meshgrid()
            return cls(grid, np.asarray(fn(*mesh), dtype=complex))
        out = np.empty(shape, dtype=complex)
        first = grid.axes[0].nodes()
        rest = np.meshgrid(*[a.nodes() for a in grid.axes[1:]], indexing="ij")
        for i, x0 in enumerate(first):
            args = [np.full(rest[0].shape, x0)] + list(rest)
            out[i] = fn(*args)
        return cls(grid, out)


def integrate(field: SampledField) -> complex:
    """Tensor-product quadrature of a sampled field."""
    vals = field.values
    for k, ax in enumerate(field.grid.axes):
        w = ax.weights()
        shape = [1] * vals.ndim
        shape[k] = ax.count
        vals = vals * w.reshape(shape)
    return complex(pairwise_sum(vals.ravel()))


def norm2(field: SampledField) -> float:
    """Quadrature of |f|^2."""
    vals = np.abs(field.values) ** 2
    for k, ax in enumerate(field.grid.axes):
        w = ax.weights()
        shape = [1] * vals.ndim
        shape[k] = ax.count
        vals = vals * w.reshape(shape)
    return float(pairwise_sum(vals.ravel()).real)


# ---------------------------------------------------------------------------
# discrete Fourier transforms (continuum-normalized)
# ---------------------------------------------------------------------------


@dataclass
class Spectrum:
    """Discrete approximation of the continuum Fourier transform on the
    selected axes; frequencies follow numpy fft ordering."""

    grid: GridSpec
    axes: tuple
    values: np.ndarray

    def freqs(self, name: str) -> np.ndarray:
        ax = self.grid.axis(name)
        if ax.kind not in ("uniform-periodic", "uniform-box"):
            raise AxisKindMismatch(f"axis {name} is not uniform")
        return 2.0 * np.pi * np.fft.fftfreq(ax.count, d=ax.step)

    def freq_weight(self) -> float:
        """Product of the dual-grid cell volumes (one Delta-xi per axis)."""
        w = 1.0
        for name in self.axes:
            ax = self.grid.axis(name)
            w *= 2.0 * np.pi / (ax.count * ax.step)
        return w

    def integrate_abs2(self) -> float:
        """Quadrature of |F|^2 over the dual grid."""
        return float(pairwise_sum(
            (np.abs(self.values) ** 2).ravel()).real) * self.freq_weight()


def _first_node(ax: Axis) -> float:
    return ax.lo if ax.kind == "uniform-periodic" else ax.lo + 0.5 * ax.step


def _phase_factors(grid: GridSpec, axes):
    """Per-axis factor h * exp(-i xi x0) turning an FFT into the continuum
    transform's Riemann sum."""
    factors = []
    for name in axes:
        ax = grid.axis(name)
        if ax.kind not in ("uniform-periodic", "uniform-box"):
            raise AxisKindMismatch(f"axis {name} is not uniform")
        xi = 2.0 * np.pi * np.fft.fftfreq(ax.count, d=ax.step)
        factors.append(ax.step * np.exp(-1j * xi * _first_node(ax)))
    return factors


def dft_forward(field: SampledField, axes=None) -> Spectrum:
    """F(xi) = sum_j f(x_j) exp(-i xi x_j) h on the named uniform axes."""
    if axes is None:
        axes = [a.name for a in field.grid.axes
                if a.kind in ("uniform-periodic", "uniform-box")]
    axes = tuple(axes)
    idxs = [field.grid.index(n) for n in axes]
    vals = np.fft.fftn(field.values, axes=idxs)
    for name, fac in zip(axes, _phase_factors(field.grid, axes)):
        k = field.grid.index(name)
        shape = [1] * vals.ndim
        shape[k] = fac.size
        vals = vals * fac.reshape(shape)
    return Spectrum(field.grid, axes, vals)


def dft_inverse(spec: Spectrum) -> SampledField:
    """Exact inverse of dft_forward (composes to the identity on grid data)."""
    vals = spec.values
    for name, fac in zip(spec.axes, _phase_factors(spec.grid, spec.axes)):
        k = spec.grid.index(name)
        shape = [1] * vals.ndim
        shape[k] = fac.size
        vals = vals / fac.reshape(shape)
    idxs = [spec.grid.index(n) for n in spec.axes]
    return SampledField(spec.grid, np.fft.ifftn(vals, axes=idxs))


# ---------------------------------------------------------------------------
# Monte Carlo with Gaussian importance sampling
# ---------------------------------------------------------------------------


@dataclass
class MCResult:
    estimate: complex
    stderr: float
    n: int
    seed: int

    def agrees(self, other_value: complex, nsigma: float = 3.0) -> bool:
        return abs(self.estimate - other_value) <= nsigma * max(self.stderr, 1e-300)


def monte_carlo(integrand, mean, sigma, n: int, seed: int,
                chunk: int = 1 << 19) -> MCResult:
    """Importance-sampled integral of `integrand` over R^d.

    Samples are drawn from a diagonal Gaussian N(mean, diag(sigma^2)) using a
    Philox counter-based generator, so results are reproducible bit-for-bit
    for a fixed seed.  `integrand` maps an (m, d) array to m complex values.
    """
    if n < 1000:
        raise ValueError("need at least 1000 samples")
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), mean.shape)
    d = mean.size
    rng = np.random.Generator(np.random.Philox(seed))
    lognorm = -0.5 * d * np.log(2.0 * np.pi) - np.sum(np.log(sigma))

    sums = []
    sums2 = []
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        x = mean + sigma * rng.standard_normal((m, d))
        logpdf = lognorm - 0.5 * np.sum(((x - mean) / sigma) ** 2, axis=1)
        w = np.asarray(integrand(x), dtype=complex) * np.exp(-logpdf)
        sums.append(pairwise_sum(w))
        sums2.append(pairwise_sum(np.abs(w) ** 2))
        remaining -= m
    total = pairwise_sum(np.asarray(sums))
    total2 = float(pairwise_sum(np.asarray(sums2)).real)
    est = total / n
    var = max(total2 / n - abs(est) ** 2, 0.0)
    return MCResult(complex(est), float(np.sqrt(var / n)), n, seed)


# ---------------------------------------------------------------------------
# Haar quadrature on SU(2), SU(2)xSU(2) and U(2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SU2Quad:
    """Euler-angle product rule on SU(2), exact for matrix coefficients of
    irreducibles up to band limit J (and their pairwise products).

    alpha in [0, 2pi) uniform, beta Gauss-Legendre in cos(beta), gamma in
    [0, 4pi) uniform; weights normalized to total mass 1.
    """

    bandlimit: float
    euler: np.ndarray    # (n, 3) columns alpha, beta, gamma
    weights: np.ndarray  # (n,)

    @property
    def node_count(self) -> int:
        return self.euler.shape[0]


def su2_quadrature(J: float, budget: int = DEFAULT_SO4_NODE_BUDGET) -> SU2Quad:
    if J < 0:
        raise ValueError("band limit must be >= 0")
    twoJ = int(round(2 * J))
    na = 2 * twoJ + 2
    nb = twoJ + 2
    ng = 2 * twoJ + 2
    if na * nb * ng > budget:
        raise BudgetExceeded("SU(2) quadrature exceeds node budget")
    alpha = 2.0 * np.pi * np.arange(na) / na
    x, wb = np.polynomial.legendre.leggauss(nb)
    beta = np.arccos(x)
    gamma = 4.0 * np.pi * np.arange(ng) / ng
    A, B, G = np.meshgrid(alpha, beta, gamma, indexing="ij")
    W = np.broadcast_to((wb / 2.0)[None, :, None] / (na * ng), A.shape)
    euler = np.stack([A.ravel(), B.ravel(), G.ravel()], axis=1)
    return SU2Quad(J, euler, W.ravel().copy())


@dataclass(frozen=True)
class EulerQuadSO4:
    """Product Haar quadrature on SU(2) x SU(2) (covering SO(4); only labels
    with j1 + j2 integral are well defined on the quotient)."""

    bandlimit: float
    left: SU2Quad
    right: SU2Quad

    @property
    def node_count(self) -> int:
        return self.left.node_count * self.right.node_count

    def total_weight(self) -> float:
        return float(pairwise_sum(self.left.weights)
                     * pairwise_sum(self.right.weights))


def so4_quadrature(J: float, budget: int = DEFAULT_SO4_NODE_BUDGET) -> EulerQuadSO4:
    q = su2_quadrature(J, budget=budget)
    if q.node_count ** 2 > budget:
        raise BudgetExceeded("SO(4) quadrature exceeds node budget")
    return EulerQuadSO4(J, q, q)


@dataclass(frozen=True)
class U2Quad:
    """Haar quadrature on U(2) realized as (U(1) x SU(2)) / Z2: a phase theta
    in [0, pi) uniform plus an SU(2) factor."""

    bandlimit: int
    theta: np.ndarray
    theta_weights: np.ndarray
    su2: SU2Quad

    @property
    def node_count(self) -> int:
        return self.theta.size * self.su2.node_count


def u2_quadrature(M: int, budget: int = DEFAULT_SO4_NODE_BUDGET) -> U2Quad:
    if M < 0:
        raise ValueError("band limit must be >= 0")
    nt = 4 * M + 2
    theta = np.pi * np.arange(nt) / nt
    su2 = su2_quadrature(M, budget=budget)
    if nt * su2.node_count > budget:
        raise BudgetExceeded("U(2) quadrature exceeds node budget")
    return U2Quad(M, theta, np.full(nt, 1.0 / nt), su2)


# ---------------------------------------------------------------------------
# binary field format: one JSON header line, then raw little-endian
# interleaved float64 (re, im) pairs in row-major order
# ---------------------------------------------------------------------------


def save_field(field: SampledField, path):
    header = {
        "shape": list(field.grid.shape),
        "axes": [{"name": a.name, "kind": a.kind, "lo": a.lo, "hi": a.hi,
                  "count": a.count} for a in field.grid.axes],
        "dtype": "c128",
        "endian": "LE",
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode() + b"\n")
        fh.write(np.ascontiguousarray(field.values, dtype="<c16").tobytes())


def load_field(path) -> SampledField:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        if header.get("dtype") != "c128" or header.get("endian") != "LE":
            raise ValueError("unsupported field file")
        axes = [Axis(a["name"], a["kind"], a["lo"], a["hi"], a["count"])
                for a in header["axes"]]
        grid = GridSpec(axes)
        raw = fh.read()
    values = np.frombuffer(raw, dtype="<c16").reshape(grid.shape)
    return SampledField(grid, values.astype(complex))
