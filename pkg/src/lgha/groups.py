"""Coordinate and matrix realizations of the 4x4 matrix groups and the
nilpotent groups, with group laws, inverses, embeddings, Iwasawa
decomposition, and the modulus function of the diagonal conjugation action.

Conventions
-----------
* Coordinate group laws are normative; matrix embeddings serve as oracles.
* The six-parameter unipotent group N uses coordinates (x1..x6) placed in the
  unit upper-triangular matrix at slots (1,2)=x1, (2,3)=x2, (1,3)=x3,
  (3,4)=x4, (2,4)=x5, (1,4)=x6.
* The symplectic group is realized with the antidiagonal form Omega
  (`SP_FORM`): this is the unique choice (up to scale) for which the standard
  QR-type Iwasawa factors of a symplectic matrix are again symplectic, and
  for which K = U(2), A two-dimensional and N four-dimensional add up to the
  full ten dimensions.  The block form [[0, I], [-I, 0]] (`SP_FORM_BLOCK`) is
  equivalent via the basis swap e3 <-> e4 (`block_to_adapted`).
* The diagonal subgroup A is charted by logA in R^3 with the fourth entry
  e^{-t1-t2-t3}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import nil_mul_batch, nil_inv_batch, heis_mul_batch

__all__ = [
    "MatrixElement", "NilPoint6", "LPoint9", "HeisPoint3", "SpNPoint4",
    "IwasawaFactors", "SymplecticViolation", "NearSingular",
    "nil_mul", "nil_inv", "nil_embed", "nil_from_matrix",
    "L_mul", "L_inv", "L_embed_twisted", "rho1", "rho2",
    "heis_mul", "heis_inv", "heis_embed",
    "spn_mul", "spn_matrix_block", "spn_embed",
    "iwasawa_decompose", "modulus_factor",
    "SP_FORM", "SP_FORM_BLOCK", "block_to_adapted", "adapted_to_block",
    "symplectic_error", "sp4_algebra_basis", "sp4_iwasawa_dimension_audit",
    "random_sl4", "random_sp4", "random_so4",
]


class SymplecticViolation(ValueError):
    """A constructed matrix fails the symplectic relation (transcription bug)."""


class NearSingular(RuntimeError):
    """Gram-Schmidt pivot collapsed; the input is not a clean group element."""


# basis swap between the block form of the symplectic matrix and the
# Iwasawa-adapted antidiagonal form
_SWAP34 = np.eye(4)[[0, 1, 3, 2]]

SP_FORM_BLOCK = np.block([
    [np.zeros((2, 2)), np.eye(2)],
    [-np.eye(2), np.zeros((2, 2))],
])

SP_FORM = _SWAP34 @ SP_FORM_BLOCK @ _SWAP34.T


def block_to_adapted(g):
    """Conjugate a block-form symplectic matrix into the adapted basis."""
    return _SWAP34 @ np.asarray(g, dtype=float) @ _SWAP34


def adapted_to_block(g):
    return _SWAP34 @ np.asarray(g, dtype=float) @ _SWAP34


def symplectic_error(g, form=None) -> float:
    form = SP_FORM if form is None else form
    g = np.asarray(g, dtype=float)
    return float(np.max(np.abs(g @ form @ g.T - form)))


_TAGS = ("SL4", "SP4", "SO4", "UpperUnipotent", "DiagPositive")


@dataclass(frozen=True)
class MatrixElement:
    """A validated 4x4 real matrix carrying its group tag."""

    entries: np.ndarray
    tag: str
    check: bool = True

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("expected a 4x4 matrix")
        object.__setattr__(self, "entries", m)
        if self.tag not in _TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")
        if self.check:
            self.validate()

    def validate(self):
        m = self.entries
        if self.tag == "SL4":
            if abs(np.linalg.det(m) - 1.0) > 1e-10:
                raise ValueError("determinant is not 1")
        elif self.tag == "SP4":
            if symplectic_error(m) > 1e-10:
                raise SymplecticViolation("symplectic relation violated")
        elif self.tag == "SO4":
            if np.max(np.abs(m.T @ m - np.eye(4))) > 1e-10 or np.linalg.det(m) <= 0:
                raise ValueError("not special orthogonal")
        elif self.tag == "UpperUnipotent":
            if np.any(np.diag(m) != 1.0) or np.any(m[np.tril_indices(4, -1)] != 0.0):
                raise ValueError("not exactly unit upper triangular")
        elif self.tag == "DiagPositive":
            if np.any(m != np.diag(np.diag(m))) or np.any(np.diag(m) <= 0):
                raise ValueError("not positive diagonal")
            if abs(np.prod(np.diag(m)) - 1.0) > 1e-12:
                raise ValueError("diagonal product is not 1")

    def __matmul__(self, other):
        o = other.entries if isinstance(other, MatrixElement) else other
        return self.entries @ o


def _coords(obj, n):
    a = np.asarray(obj, dtype=float)
    if a.shape[-1] != n:
        raise ValueError(f"expected {n} coordinates, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class NilPoint6:
    """Point of the six-parameter unipotent group."""

    x1: float; x2: float; x3: float; x4: float; x5: float; x6: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x1, self.x2, self.x3, self.x4, self.x5, self.x6],
                        dtype=dtype or float)

    @classmethod
    def from_array(cls, a):
        return cls(*np.asarray(a, dtype=float))


@dataclass(frozen=True)
class LPoint9:
    """Point of the nine-parameter auxiliary group L."""

    x6: float; x5: float; x4: float; x3: float; x2: float
    t3: float; t2: float; x1: float; t1: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x6, self.x5, self.x4, self.x3, self.x2,
                         self.t3, self.t2, self.x1, self.t1],
                        dtype=dtype or float)

    @classmethod
    def from_array(cls, a):
        return cls(*np.asarray(a, dtype=float))


@dataclass(frozen=True)
class HeisPoint3:
    """Point of the three-parameter nilpotent symplectic group, law
    (z,y,x)(c,b,a) = (z + c + xb - ay, y + b, x + a)."""

    z: float; y: float; x: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.z, self.y, self.x], dtype=dtype or float)

    @classmethod
    def from_array(cls, a):
        return cls(*np.asarray(a, dtype=float))


@dataclass(frozen=True)
class SpNPoint4:
    """Point of the four-parameter nilpotent symplectic group."""

    x: float; y: float; z: float; t: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z, self.t], dtype=dtype or float)

    @classmethod
    def from_array(cls, a):
        return cls(*np.asarray(a, dtype=float))


# ---------------------------------------------------------------------------
# six-parameter unipotent group N
# ---------------------------------------------------------------------------


def nil_mul(p, q):
    """Group law of N in coordinates (vectorized over leading axes)."""
    return nil_mul_batch(_coords(p, 6), _coords(q, 6))


def nil_inv(p):
    return nil_inv_batch(_coords(p, 6))


def nil_embed(p) -> np.ndarray:
    """Unit upper-triangular 4x4 embedding (vectorized: (..., 4, 4))."""
    p = _coords(p, 6)
    m = np.zeros(p.shape[:-1] + (4, 4))
    idx = np.arange(4)
    m[..., idx, idx] = 1.0
    m[..., 0, 1] = p[..., 0]
    m[..., 1, 2] = p[..., 1]
    m[..., 0, 2] = p[..., 2]
    m[..., 2, 3] = p[..., 3]
    m[..., 1, 3] = p[..., 4]
    m[..., 0, 3] = p[..., 5]
    return m


def nil_from_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return np.stack([m[..., 0, 1], m[..., 1, 2], m[..., 0, 2],
                     m[..., 2, 3], m[..., 1, 3], m[..., 0, 3]], axis=-1)


# ---------------------------------------------------------------------------
# nine-parameter group L; coordinate order (x6,x5,x4,x3,x2,t3,t2,x1,t1)
# ---------------------------------------------------------------------------


def rho2(x3, x2, y):
    """Action of the plane on 3-vectors: (y6,y5,y4) -> (y6+x3*y4, y5+x2*y4, y4)."""
    y = np.asarray(y, dtype=float)
    out = y.copy()
    out[..., 0] = y[..., 0] + x3 * y[..., 2]
    out[..., 1] = y[..., 1] + x2 * y[..., 2]
    return out


def rho1(x1, y):
    """Action of the line on 5-tuples:
    (y6,y5,y4,y3,y2) -> (y6+x1*y5, y5, y4, y3+x1*y2, y2)."""
    y = np.asarray(y, dtype=float)
    out = y.copy()
    out[..., 0] = y[..., 0] + x1 * y[..., 1]
    out[..., 3] = y[..., 3] + x1 * y[..., 4]
    return out


def L_mul(X, Y):
    """Group law of L (vectorized).  The (x6,x5,x4) block is twisted by the
    (t3,t2,t1) triple; (x3,x2,x1) are plain translations."""
    X = _coords(X, 9)
    Y = _coords(Y, 9)
    out = X + Y
    out[..., 0] += X[..., 8] * Y[..., 1] + X[..., 5] * Y[..., 2]
    out[..., 1] += X[..., 6] * Y[..., 2]
    out[..., 5] += X[..., 8] * Y[..., 6]
    return out


def L_inv(X):
    X = _coords(X, 9)
    x6, x5, x4 = X[..., 0], X[..., 1], X[..., 2]
    t3, t2, t1 = X[..., 5], X[..., 6], X[..., 8]
    out = -X.copy()
    out[..., 5] = -t3 + t1 * t2
    out[..., 0] = -x6 + t1 * x5 - (t1 * t2 - t3) * x4
    out[..., 1] = -x5 + t2 * x4
    return out


def L_embed_twisted(X) -> np.ndarray:
    """4x4 oracle for the twisted part of the L law; the remaining three
    coordinates (x3,x2,x1) add componentwise."""
    X = _coords(X, 9)
    m = np.zeros(X.shape[:-1] + (4, 4))
    idx = np.arange(4)
    m[..., idx, idx] = 1.0
    m[..., 0, 1] = X[..., 8]   # t1
    m[..., 0, 2] = X[..., 5]   # t3
    m[..., 1, 2] = X[..., 6]   # t2
    m[..., 0, 3] = X[..., 0]   # x6
    m[..., 1, 3] = X[..., 1]   # x5
    m[..., 2, 3] = X[..., 2]   # x4
    return m


def nil_to_L(p) -> np.ndarray:
    """Embed N into L: x-block plus (t3,t2,t1) = (x3,x2,x1), zero elsewhere."""
    p = _coords(p, 6)
    out = np.zeros(p.shape[:-1] + (9,))
    out[..., 0] = p[..., 5]
    out[..., 1] = p[..., 4]
    out[..., 2] = p[..., 3]
    out[..., 5] = p[..., 2]
    out[..., 6] = p[..., 1]
    out[..., 8] = p[..., 0]
    return out


# ---------------------------------------------------------------------------
# three-parameter nilpotent symplectic group
# ---------------------------------------------------------------------------


def heis_mul(p, q):
    return heis_mul_batch(_coords(p, 3), _coords(q, 3))


def heis_inv(p):
    return -_coords(p, 3)


def heis_embed(p) -> np.ndarray:
    """4x4 homomorphic embedding, block symplectic convention.  Slot map:
    (1,2) <- x, (1,3) <- z, (1,4) = (2,3) <- y, (4,3) <- -x."""
    p = _coords(p, 3)
    z, y, x = p[..., 0], p[..., 1], p[..., 2]
    m = np.zeros(p.shape[:-1] + (4, 4))
    idx = np.arange(4)
    m[..., idx, idx] = 1.0
    m[..., 0, 1] = x
    m[..., 0, 2] = z
    m[..., 0, 3] = y
    m[..., 1, 2] = y
    m[..., 3, 2] = -x
    return m


# ---------------------------------------------------------------------------
# four-parameter nilpotent symplectic group
# ---------------------------------------------------------------------------


def spn_matrix_block(p) -> np.ndarray:
    """The literal block-convention matrix of the four-parameter group."""
    p = _coords(p, 4)
    x, y, z, t = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    m = np.zeros(p.shape[:-1] + (4, 4))
    idx = np.arange(4)
    m[..., idx, idx] = 1.0
    m[..., 0, 1] = x
    m[..., 0, 2] = y
    m[..., 0, 3] = z
    m[..., 1, 2] = z - x * t
    m[..., 1, 3] = t
    m[..., 3, 2] = -x
    return m


def spn_mul(p, q):
    """Coordinate law read off the matrix product of block-convention matrices."""
    p = _coords(p, 4)
    q = _coords(q, 4)
    x1, y1, z1, t1 = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    x2, y2, z2, t2 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    x = x1 + x2
    z = z1 + z2 + x1 * t2
    t = t1 + t2
    y = y1 + y2 + x1 * (z2 - x2 * t2) - z1 * x2
    return np.stack([x, y, z, t], axis=-1)


def spn_embed(p) -> MatrixElement:
    """Embed into the symplectic group (adapted basis).  The construction is
    checked against the block form before conjugating; a failure indicates a
    transcription bug, not bad data."""
    m = spn_matrix_block(p)
    if m.ndim != 2:
        raise ValueError("spn_embed takes a single point")
    if symplectic_error(m, SP_FORM_BLOCK) > 1e-10:
        raise SymplecticViolation("constructed matrix is not symplectic")
    return MatrixElement(block_to_adapted(m), "SP4")


# ---------------------------------------------------------------------------
# Iwasawa decomposition g = k a n
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IwasawaFactors:
    k: MatrixElement
    a: MatrixElement
    n: MatrixElement
    log_a: np.ndarray = field(default=None)

    def reconstruction(self) -> np.ndarray:
        return self.k.entries @ self.a.entries @ self.n.entries

    def reconstruction_error(self, g) -> float:
        g = g.entries if isinstance(g, MatrixElement) else np.asarray(g)
        return float(np.max(np.abs(self.reconstruction() - g)))


def _mgs_qr(g: np.ndarray):
    """Modified Gram-Schmidt with one re-orthogonalization pass."""
    a = np.array(g, dtype=float)
    n = a.shape[0]
    q = np.zeros_like(a)
    r = np.zeros_like(a)
    for j in range(n):
        v = a[:, j].copy()
        for _ in range(2):
            for i in range(j):
                c = q[:, i] @ v
                r[i, j] += c
                v -= c * q[:, i]
        piv = float(np.linalg.norm(v))
        if piv < 1e-13:
            raise NearSingular(f"column {j} pivot {piv:g} below threshold")
        r[j, j] = piv
        q[:, j] = v / piv
    return q, r


def iwasawa_decompose(g) -> IwasawaFactors:
    """Unique factorization g = k a n with k special orthogonal, a positive
    diagonal of determinant one, n unit upper triangular.

    For a symplectic input (adapted form) all three factors are themselves
    symplectic; this is checked in the test suite, not here.
    """
    m = g.entries if isinstance(g, MatrixElement) else np.asarray(g, dtype=float)
    q, r = _mgs_qr(m)
    d = np.diag(r).copy()
    n = r / d[:, None]
    n[np.tril_indices(4, -1)] = 0.0
    np.fill_diagonal(n, 1.0)
    log_a = np.log(d[:3])
    a = np.diag(d)
    return IwasawaFactors(
        MatrixElement(q, "SO4"),
        MatrixElement(a, "DiagPositive"),
        MatrixElement(n, "UpperUnipotent"),
        log_a,
    )


def modulus_factor(log_a) -> float:
    """Jacobian determinant of n -> a n a^{-1} on N for a = diag(a1..a4):
    the product of a_i / a_j over i < j, i.e. a1^3 a2 a3^{-1} a4^{-3}."""
    t = np.asarray(log_a, dtype=float)
    if t.shape == (3,):
        a = np.exp(np.concatenate([t, [-t.sum()]]))
    elif t.shape == (4, 4):
        a = np.diag(t)
    else:
        a = np.asarray(t, dtype=float)
    return float(a[0] ** 3 * a[1] / a[2] / a[3] ** 3)


# ---------------------------------------------------------------------------
# Lie-algebra helpers and random sampling
# ---------------------------------------------------------------------------


def sp4_algebra_basis(form=None) -> np.ndarray:
    """Orthonormal basis of the symplectic Lie algebra {X : X form + form X^T = 0},
    computed from the null space of the defining linear map."""
    form = SP_FORM if form is None else np.asarray(form, dtype=float)
    cols = []
    for a in range(4):
        for b in range(4):
            e = np.zeros((4, 4))
            e[a, b] = 1.0
            cols.append((e @ form + form @ e.T).ravel())
    mat = np.array(cols).T
    _, s, vt = np.linalg.svd(mat)
    null = vt[np.sum(s > 1e-10 * s[0]):]
    return null.reshape(-1, 4, 4)


def sp4_iwasawa_dimension_audit(form=None):
    """Dimensions (dim k, dim a, dim n) of the intersections of the symplectic
    algebra with the antisymmetric, diagonal, and strictly upper triangular
    subspaces; for the adapted form these are (4, 2, 4)."""
    basis = sp4_algebra_basis(form)
    flat = basis.reshape(len(basis), 16)

    def subdim(mask):
        proj = flat.copy().reshape(len(basis), 4, 4)
        # dimension of intersection = len(basis) - rank of complement projection
        comp = np.array([ (b - mask(b)).ravel() for b in basis ])
        return len(basis) - np.linalg.matrix_rank(comp, tol=1e-10)

    def antisym(b):
        return 0.5 * (b - b.T)

    def diagonal(b):
        return np.diag(np.diag(b))

    def upper(b):
        return np.triu(b, 1)

    return subdim(antisym), subdim(diagonal), subdim(upper)


def random_sl4(rng, scale: float = 0.5) -> MatrixElement:
    from scipy.linalg import expm

    x = rng.normal(0.0, scale, size=(4, 4))
    x -= np.trace(x) / 4.0 * np.eye(4)
    return MatrixElement(expm(x), "SL4")


def random_sp4(rng, scale: float = 0.4, form=None) -> MatrixElement:
    from scipy.linalg import expm

    basis = sp4_algebra_basis(form)
    x = np.tensordot(rng.normal(0.0, scale, size=len(basis)), basis, axes=1)
    g = expm(x)
    return MatrixElement(g, "SP4")


def random_so4(rng) -> MatrixElement:
    q, r = np.linalg.qr(rng.normal(size=(4, 4)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, [0, 1]] = q[:, [1, 0]]
    return MatrixElement(q, "SO4")


def matrix_to_json(m) -> str:
    """Debug dump: row-major JSON array of float64 rows."""
    import json

    m = m.entries if isinstance(m, MatrixElement) else np.asarray(m, dtype=float)
    return json.dumps([[float(v) for v in row] for row in m])


def matrix_from_json(text: str) -> np.ndarray:
    import json

    return np.asarray(json.loads(text), dtype=float)
