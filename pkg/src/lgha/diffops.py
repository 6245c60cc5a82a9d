"""Polynomial-coefficient differential operators on R^3, vector fields and
their brackets, polynomial coordinate maps, conjugation, identity
verification over a jet corpus, and a small text DSL for operator
expressions.

Variable order is (z, y, x) throughout, matching the group coordinates of
the three-parameter nilpotent symplectic group.  All coefficient arithmetic
is exact for integer and half-integer inputs.

Reflected-argument evaluation
-----------------------------
Several conjugation identities in this calculus naturally produce operators
evaluated "through a reflection": the displayed coefficient letters refer to
the unreflected coordinates while the derivatives are taken at the reflected
point.  Writing sigma for the reflection, such a statement is equivalent to
the plain operator identity with the coefficients precomposed by sigma
(`PolyDiffOp.coeff_reflect`).  `verify_identity` checks the plain form;
`reflected_eval` packages the convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .jets import Jet, DegreeOverflow, substitute

__all__ = [
    "Poly3", "PolyVectorField", "PolyDiffOp", "CoordMap",
    "conjugate_apply", "verify_identity", "reflected_eval",
    "lie_bracket", "hormander_rank",
    "vf_z", "vf_y", "vf_x",
    "cauchy_riemann", "cauchy_riemann_star", "lewy", "lewy_star",
    "lewy_conjugate_true", "laplacian_2d", "laplacian_3d",
    "heis_laplacian_left", "heis_laplacian_right", "sheared_laplacian",
    "sublaplacian", "sublaplacian_shifted", "squares_xy", "squares_xyz",
    "first_order_invariant", "wave_type_invariant", "span_shifted_op",
    "hormander_P", "hormander_P_bar", "hormander_Q4",
    "shear_reflect_map", "shear_map", "shear_map_inv", "flip_y_shear_map",
    "flip_x_shear_map",
    "parse_op", "format_op",
]

_VARS = ("z", "y", "x")


def _fmt_complex(c: complex) -> str:
    re, im = c.real, c.imag
    if im == 0:
        return repr(re) if re != int(re) else repr(int(re))
    if re == 0:
        if im == 1:
            return "i"
        if im == -1:
            return "-i"
        core = repr(im) if im != int(im) else repr(int(im))
        return f"{core}*i"
    return f"({_fmt_complex(re)}+{_fmt_complex(complex(0, im))})"


class Poly3:
    """Polynomial in (z, y, x) with complex coefficients, stored sparsely."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for m, c in terms.items():
                c = complex(c)
                if c != 0:
                    self.terms[tuple(m)] = c

    @classmethod
    def const(cls, c) -> "Poly3":
        return cls({(0, 0, 0): c})

    @classmethod
    def variable(cls, axis: int) -> "Poly3":
        m = [0, 0, 0]
        m[axis] = 1
        return cls({tuple(m): 1.0})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Poly3):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, Poly3):
            other = Poly3.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0.0) + c
            if v == 0:
                out.pop(m, None)
            else:
                out[m] = v
        return Poly3(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly3({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly3):
            other = Poly3.const(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Poly3):
            out = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    m = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
                    out[m] = out.get(m, 0.0) + c1 * c2
            return Poly3(out)
        return Poly3({m: c * other for m, c in self.terms.items()})

    __rmul__ = __mul__

    def partial(self, axis: int) -> "Poly3":
        out = {}
        for m, c in self.terms.items():
            if m[axis] == 0:
                continue
            mm = list(m)
            mm[axis] -= 1
            out[tuple(mm)] = c * m[axis]
        return Poly3(out)

    def eval(self, z, y, x):
        out = 0
        for (a, b, c), co in self.terms.items():
            out = out + co * np.asarray(z) ** a * np.asarray(y) ** b * np.asarray(x) ** c
        if not self.terms:
            return np.zeros(np.broadcast(z, y, x).shape, dtype=complex)
        return out

    def eval_jet(self, zj: Jet, yj: Jet, xj: Jet) -> Jet:
        out = Jet()
        for (a, b, c), co in self.terms.items():
            out = out + co * (zj ** a * yj ** b * xj ** c)
        return out

    def reflect(self, sz: int = 1, sy: int = 1, sx: int = 1) -> "Poly3":
        """Substitute (z, y, x) -> (sz z, sy y, sx x)."""
        return Poly3({m: c * (sz ** m[0]) * (sy ** m[1]) * (sx ** m[2])
                      for m, c in self.terms.items()})

    def substitute(self, polys) -> "Poly3":
        """Full polynomial substitution (z, y, x) -> polys."""
        out = Poly3()
        for (a, b, c), co in self.terms.items():
            term = Poly3.const(co)
            for p, k in zip(polys, (a, b, c)):
                for _ in range(k):
                    term = term * p
            out = out + term
        return out

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def __repr__(self):
        if not self.terms:
            return "Poly3(0)"
        bits = []
        for m in sorted(self.terms):
            mono = "".join(f"{_VARS[i]}^{m[i]}" if m[i] > 1 else _VARS[i]
                           for i in range(3) if m[i])
            bits.append(f"{_fmt_complex(self.terms[m])}{'*' + mono if mono else ''}")
        return "Poly3(" + " + ".join(bits) + ")"


ZERO = Poly3()
ONE = Poly3.const(1.0)
Z, Y, X = (Poly3.variable(i) for i in range(3))


@dataclass(frozen=True)
class PolyVectorField:
    """First-order operator pz dz + py dy + px dx with polynomial
    coefficients (exact arithmetic)."""

    pz: Poly3
    py: Poly3
    px: Poly3

    def apply_to_poly(self, p: Poly3) -> Poly3:
        return self.pz * p.partial(0) + self.py * p.partial(1) + self.px * p.partial(2)

    def as_diffop(self) -> "PolyDiffOp":
        return PolyDiffOp({(1, 0, 0): self.pz, (0, 1, 0): self.py,
                           (0, 0, 1): self.px})

    def coeff_vector_at(self, point) -> np.ndarray:
        z, y, x = point
        return np.array([complex(self.pz.eval(z, y, x)),
                         complex(self.py.eval(z, y, x)),
                         complex(self.px.eval(z, y, x))])

    def __eq__(self, other):
        return (self.pz, self.py, self.px) == (other.pz, other.py, other.px)


def lie_bracket(v: PolyVectorField, w: PolyVectorField) -> PolyVectorField:
    """[V, W] = V W - W V, exact on polynomial coefficients."""
    return PolyVectorField(
        v.apply_to_poly(w.pz) - w.apply_to_poly(v.pz),
        v.apply_to_poly(w.py) - w.apply_to_poly(v.py),
        v.apply_to_poly(w.px) - w.apply_to_poly(v.px),
    )


def hormander_rank(fields, point, depth: int = 2) -> int:
    """Rank at a point of the span of the fields together with iterated
    brackets up to the given depth."""
    layer = list(fields)
    allf = list(fields)
    for _ in range(depth - 1):
        nxt = []
        for a in layer:
            for b in fields:
                br = lie_bracket(a, b)
                if br.pz or br.py or br.px:
                    nxt.append(br)
        allf.extend(nxt)
        layer = nxt
    rows = np.array([f.coeff_vector_at(point) for f in allf])
    return int(np.linalg.matrix_rank(rows, tol=1e-10))


class PolyDiffOp:
    """Finite sum of terms poly(z,y,x) * d^(az,ay,ax), canonical form."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for m, p in terms.items():
                if not isinstance(p, Poly3):
                    p = Poly3.const(p)
                if p:
                    self.terms[tuple(m)] = p

    @classmethod
    def identity(cls):
        return cls({(0, 0, 0): ONE})

    @classmethod
    def partial(cls, axis: int, coeff=1.0):
        m = [0, 0, 0]
        m[axis] = 1
        return cls({tuple(m): Poly3.const(coeff)})

    @property
    def order(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def __eq__(self, other):
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        return self.terms == other.terms

    def __add__(self, other):
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        out = dict(self.terms)
        for m, p in other.terms.items():
            q = out.get(m, ZERO) + p
            if q:
                out[m] = q
            else:
                out.pop(m, None)
        return PolyDiffOp(out)

    def __neg__(self):
        return PolyDiffOp({m: -p for m, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        return PolyDiffOp({m: p * scalar for m, p in self.terms.items()})

    __rmul__ = __mul__

    def compose(self, other: "PolyDiffOp") -> "PolyDiffOp":
        """Operator product self . other via the Leibniz rule:
        p d^a (q d^b) = sum_{mu <= a} C(a, mu) p (d^mu q) d^{a - mu + b}."""
        out = PolyDiffOp()
        for a, p in self.terms.items():
            for b, q in other.terms.items():
                for m0 in range(a[0] + 1):
                    for m1 in range(a[1] + 1):
                        for m2 in range(a[2] + 1):
                            dq = q
                            for _ in range(m0):
                                dq = dq.partial(0)
                            for _ in range(m1):
                                dq = dq.partial(1)
                            for _ in range(m2):
                                dq = dq.partial(2)
                            if not dq:
                                continue
                            cnum = comb(a[0], m0) * comb(a[1], m1) * comb(a[2], m2)
                            key = (a[0] - m0 + b[0], a[1] - m1 + b[1],
                                   a[2] - m2 + b[2])
                            out = out + PolyDiffOp({key: dq * p * cnum})
        return out

    def __matmul__(self, other):
        return self.compose(other)

    def coeff_reflect(self, sz: int = 1, sy: int = 1, sx: int = 1) -> "PolyDiffOp":
        """Precompose the coefficient polynomials (only) with a sign
        reflection of the coordinates; derivative slots are untouched."""
        return PolyDiffOp({m: p.reflect(sz, sy, sx) for m, p in self.terms.items()})

    @property
    def is_constant_coefficient(self) -> bool:
        return all(p.degree == 0 for p in self.terms.values())

    def symbol(self, xiz, xiy, xix):
        """sum c (i xi)^alpha for constant-coefficient operators (array ok)."""
        if not self.is_constant_coefficient:
            raise ValueError("symbol requires constant coefficients")
        out = 0
        for (a, b, c), p in self.terms.items():
            co = p.terms.get((0, 0, 0), 0.0)
            out = out + co * (1j * np.asarray(xiz)) ** a \
                * (1j * np.asarray(xiy)) ** b * (1j * np.asarray(xix)) ** c
        return out

    def apply(self, f, points):
        """Exact value of (op f) at one point (3,) or a batch (..., 3),
        using the degree-4 jet of f."""
        if self.order > 4:
            raise DegreeOverflow("operator order exceeds jet degree")
        pts = np.asarray(points, dtype=float)
        jet = f.jet_at(pts)
        z, y, x = pts[..., 0], pts[..., 1], pts[..., 2]
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for m, p in self.terms.items():
            out = out + p.eval(z, y, x) * jet.deriv(m)
        return complex(out) if out.ndim == 0 else out

    def __repr__(self):
        return f"PolyDiffOp({format_op(self)!r})"


# ---------------------------------------------------------------------------
# polynomial coordinate maps and conjugation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoordMap:
    """Polynomial coordinate change with a polynomial inverse."""

    fwd: tuple
    inv: tuple

    def check_inverse(self) -> bool:
        comp = [p.substitute(self.inv) for p in self.fwd]
        return comp == [Z, Y, X]

    def apply_points(self, pts):
        pts = np.asarray(pts, dtype=float)
        z, y, x = pts[..., 0], pts[..., 1], pts[..., 2]
        return np.stack([np.real(p.eval(z, y, x)) for p in self.fwd], axis=-1)

    def pullback_jet(self, f, points) -> Jet:
        """Jet of f o m at the point(s) (exact: Taylor substitution of the
        polynomial map into the jet of f at m(point))."""
        pts = np.asarray(points, dtype=float)
        q = self.apply_points(pts)
        outer = f.jet_at(q)
        zj, yj, xj = Jet.coordinates(pts)
        deltas = []
        for i, p in enumerate(self.fwd):
            dj = p.eval_jet(zj, yj, xj)
            dj.coeffs = dj.coeffs.copy()
            dj.coeffs[0] -= q[..., i]
            deltas.append(dj)
        return substitute(outer.coeffs, deltas)


class _Pullback:
    """f o m as a jet-evaluable function."""

    def __init__(self, m: CoordMap, f):
        self.m = m
        self.f = f

    def jet_at(self, point) -> Jet:
        return self.m.pullback_jet(self.f, point)

    def values(self, pts):
        return self.f.values(self.m.apply_points(pts))


def conjugate_apply(m: CoordMap, op: PolyDiffOp, f, points):
    """(m-hat o op o m-hat) f at the point(s), where m-hat is precomposition
    with m; realized by jet composition, no symbolic pushforward."""
    g = _Pullback(m, f)
    q = m.apply_points(np.asarray(points, dtype=float))
    return op.apply(g, q)


def reflected_eval(op: PolyDiffOp, signs):
    """Reflected-argument evaluation: coefficients keep their displayed
    coordinate letters while the derivatives act at the reflected point."""
    sz, sy, sx = signs
    rop = op.coeff_reflect(sz, sy, sx)
    flip = np.array([sz, sy, sx], dtype=float)

    def ev(f, points):
        return rop.apply(f, np.asarray(points, dtype=float) * flip)

    return ev


def verify_identity(lhs, rhs, corpus, points, tol: float = 1e-9):
    """Maximum absolute discrepancy of two (f, points) -> values evaluators
    over a corpus of jet-evaluable functions; the evaluators are handed the
    whole (n, 3) point batch at once."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    worst = 0.0
    for f in corpus:
        d = float(np.max(np.abs(np.asarray(lhs(f, pts)) - np.asarray(rhs(f, pts)))))
        if d > worst:
            worst = d
    return {"max_abs_err": worst, "passed": bool(worst < tol), "tol": tol}


# ---------------------------------------------------------------------------
# named coordinate maps
# ---------------------------------------------------------------------------


def shear_reflect_map() -> CoordMap:
    """(z, y, x) -> (z - 2xy, y, -x); an involution."""
    fwd = (Z - 2.0 * X * Y, Y, -1.0 * X)
    return CoordMap(fwd, fwd)


def shear_map() -> CoordMap:
    """(z, y, x) -> (z - xy, y, x), inverse (z + xy, y, x)."""
    return CoordMap((Z - X * Y, Y, X), (Z + X * Y, Y, X))


def shear_map_inv() -> CoordMap:
    return CoordMap((Z + X * Y, Y, X), (Z - X * Y, Y, X))


def flip_y_shear_map() -> CoordMap:
    """(z, y, x) -> (z + xy, -y, x); an involution."""
    fwd = (Z + X * Y, -1.0 * Y, X)
    return CoordMap(fwd, fwd)


def flip_x_shear_map() -> CoordMap:
    """(z, y, x) -> (z + xy, y, -x); an involution."""
    fwd = (Z + X * Y, Y, -1.0 * X)
    return CoordMap(fwd, fwd)


# ---------------------------------------------------------------------------
# vector fields spanning the nilpotent Lie algebra
# ---------------------------------------------------------------------------


def vf_z() -> PolyVectorField:
    return PolyVectorField(ONE, ZERO, ZERO)


def vf_y() -> PolyVectorField:
    return PolyVectorField(X, ONE, ZERO)


def vf_x() -> PolyVectorField:
    return PolyVectorField(-1.0 * Y, ZERO, ONE)


# ---------------------------------------------------------------------------
# named operators
# ---------------------------------------------------------------------------


def _op(dz=None, dy=None, dx=None, dzz=None, dyy=None, dxx=None, dzy=None,
        dzx=None, dyx=None, const=None):
    terms = {}
    for key, val in ((  (1, 0, 0), dz), ((0, 1, 0), dy), ((0, 0, 1), dx),
                     ((2, 0, 0), dzz), ((0, 2, 0), dyy), ((0, 0, 2), dxx),
                     ((1, 1, 0), dzy), ((1, 0, 1), dzx), ((0, 1, 1), dyx),
                     ((0, 0, 0), const)):
        if val is not None:
            terms[key] = val if isinstance(val, Poly3) else Poly3.const(val)
    return PolyDiffOp(terms)


def cauchy_riemann() -> PolyDiffOp:
    """dx - i dy."""
    return _op(dx=1.0, dy=-1.0j)


def cauchy_riemann_star() -> PolyDiffOp:
    """dx + i dy."""
    return _op(dx=1.0, dy=1.0j)


def lewy() -> PolyDiffOp:
    """-dx - i dy - 2y dz + 2ix dz (the classical unsolvable operator)."""
    return _op(dx=-1.0, dy=-1.0j, dz=-2.0 * Y + 2.0j * X)


def lewy_star() -> PolyDiffOp:
    """-dx + i dy - 2y dz - 2ix dz."""
    return _op(dx=-1.0, dy=1.0j, dz=-2.0 * Y - 2.0j * X)


def lewy_conjugate_true() -> PolyDiffOp:
    """-dx - i dy - (2y + 2ix) dz: what conjugating the Cauchy-Riemann
    operator by the shear-reflection actually produces; differs from lewy()
    by the sign of the x dz term and is spectrally solvable through that
    conjugation."""
    return _op(dx=-1.0, dy=-1.0j, dz=-2.0 * Y - 2.0j * X)


def laplacian_2d() -> PolyDiffOp:
    return _op(dxx=1.0, dyy=1.0)


def laplacian_3d() -> PolyDiffOp:
    return _op(dxx=1.0, dyy=1.0, dzz=1.0)


def heis_laplacian_left() -> PolyDiffOp:
    """Z^2 + Y^2 + X^2 for the left-invariant basis fields."""
    zo, yo, xo = (v.as_diffop() for v in (vf_z(), vf_y(), vf_x()))
    return zo @ zo + yo @ yo + xo @ xo


def heis_laplacian_right() -> PolyDiffOp:
    """Right-invariant counterpart: fields (dz, -x dz + dy, y dz + dx)."""
    zo = PolyDiffOp.partial(0)
    yo = PolyDiffOp({(1, 0, 0): -1.0 * X, (0, 1, 0): ONE})
    xo = PolyDiffOp({(1, 0, 0): Y, (0, 0, 1): ONE})
    return zo @ zo + yo @ yo + xo @ xo


def sheared_laplacian() -> PolyDiffOp:
    """The shear-conjugated 3-D Laplacian:
    dxx + dyy + (1 + x^2 + y^2) dzz + 2y dz dx + 2x dz dy."""
    return _op(dxx=1.0, dyy=1.0, dzz=ONE + X * X + Y * Y,
               dzx=2.0 * Y, dzy=2.0 * X)


def sublaplacian() -> PolyDiffOp:
    """dxx + dyy + 4x dz dy - 4y dz dx + 4(y^2 + x^2) dzz."""
    return _op(dxx=1.0, dyy=1.0, dzy=4.0 * X, dzx=-4.0 * Y,
               dzz=4.0 * (Y * Y + X * X))


def sublaplacian_shifted() -> PolyDiffOp:
    """sublaplacian - 4i dz."""
    return sublaplacian() + _op(dz=-4.0j)


def squares_xy() -> PolyDiffOp:
    xo, yo = vf_x().as_diffop(), vf_y().as_diffop()
    return xo @ xo + yo @ yo


def squares_xyz() -> PolyDiffOp:
    zo = vf_z().as_diffop()
    return squares_xy() + zo @ zo


def first_order_invariant() -> PolyDiffOp:
    """y dz + dx + i dy + ix dz."""
    return _op(dx=1.0, dy=1.0j, dz=Y + 1.0j * X)


def wave_type_invariant() -> PolyDiffOp:
    """dxx - dyy - 2x dz dy + 2y dz dx + (y^2 - x^2) dzz + dzz."""
    return _op(dxx=1.0, dyy=-1.0, dzy=-2.0 * X, dzx=2.0 * Y,
               dzz=Y * Y - X * X + ONE)


def span_shifted_op() -> PolyDiffOp:
    """X + iY - 4iZ = ix dz + i dy - y dz + dx - 4i dz."""
    return _op(dx=1.0, dy=1.0j, dz=1.0j * X - Y - 4.0j * ONE)


def hormander_P() -> PolyDiffOp:
    """-i dx + dy - 2x dz - 2iy dz."""
    return _op(dx=-1.0j, dy=1.0, dz=-2.0 * X - 2.0j * Y)


def hormander_P_bar() -> PolyDiffOp:
    """i dx + dy - 2x dz + 2iy dz."""
    return _op(dx=1.0j, dy=1.0, dz=-2.0 * X + 2.0j * Y)


def hormander_Q4() -> PolyDiffOp:
    """The fourth-order composition P Pbar Pbar P."""
    p, pb = hormander_P(), hormander_P_bar()
    return p @ pb @ pb @ p


def cr_pair_R() -> PolyDiffOp:
    """-i dx + dy."""
    return _op(dx=-1.0j, dy=1.0)


def cr_pair_R_star() -> PolyDiffOp:
    """i dx + dy."""
    return _op(dx=1.0j, dy=1.0)


# ---------------------------------------------------------------------------
# polynomial times Gaussian: closed under all operators in this module, so
# manufactured right-hand sides are exact
# ---------------------------------------------------------------------------


class PolyGauss:
    """P(z,y,x) * exp(-|r - mu|^2 / (2 sigma^2)).

    Applying any PolyDiffOp returns another PolyGauss (the derivative of the
    Gaussian factor re-enters as a polynomial), so right-hand sides
    manufactured from known solutions are exact closed forms, vectorized
    for sampling and jet-evaluable for spot checks.
    """

    def __init__(self, poly: Poly3, mu=(0.0, 0.0, 0.0), sigma: float = 1.0):
        self.poly = poly if isinstance(poly, Poly3) else Poly3.const(poly)
        self.mu = tuple(float(m) for m in mu)
        self.sigma = float(sigma)

    def _partial(self, poly: Poly3, axis: int) -> Poly3:
        shift = Poly3.variable(axis) - Poly3.const(self.mu[axis])
        return poly.partial(axis) - poly * shift * (1.0 / self.sigma ** 2)

    def apply_diffop(self, op: PolyDiffOp) -> "PolyGauss":
        total = Poly3()
        for m, coeff in op.terms.items():
            p = self.poly
            for axis in range(3):
                for _ in range(m[axis]):
                    p = self._partial(p, axis)
            total = total + coeff * p
        return PolyGauss(total, self.mu, self.sigma)

    def values(self, pts):
        pts = np.asarray(pts, dtype=float)
        z, y, x = pts[..., 0], pts[..., 1], pts[..., 2]
        q = ((z - self.mu[0]) ** 2 + (y - self.mu[1]) ** 2
             + (x - self.mu[2]) ** 2)
        return self.poly.eval(z, y, x) * np.exp(-q / (2.0 * self.sigma ** 2))

    def values_mesh(self, z, y, x):
        q = ((z - self.mu[0]) ** 2 + (y - self.mu[1]) ** 2
             + (x - self.mu[2]) ** 2)
        return self.poly.eval(z, y, x) * np.exp(-q / (2.0 * self.sigma ** 2))

    def jet_at(self, point) -> Jet:
        zj, yj, xj = Jet.coordinates(point)
        q = ((zj - self.mu[0]) ** 2 + (yj - self.mu[1]) ** 2
             + (xj - self.mu[2]) ** 2)
        return self.poly.eval_jet(zj, yj, xj) * (q * (-0.5 / self.sigma ** 2)).exp()


# ---------------------------------------------------------------------------
# operator DSL:  terms like (-1)*dx + (-i)*dy + (-2*y)*dz + (2*i*x)*dz
# ---------------------------------------------------------------------------

import re

_TOKEN = re.compile(r"\s*(\(|\)|\+|-|\*|\^|i\b|d[zyx]\b|[zyx]\b|\d+\.?\d*(?:[eE][+-]?\d+)?)")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ValueError(f"bad token near {text[pos:pos + 12]!r}")
            break
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_op(text: str) -> PolyDiffOp:
    """Parse a sum of products of complex scalars, coordinate monomials, and
    derivative symbols dz, dy, dx (repeat factors for higher order)."""
    toks = _tokenize(text)
    idx = 0

    def peek():
        return toks[idx] if idx < len(toks) else None

    def take():
        nonlocal idx
        if idx >= len(toks):
            raise ValueError("unexpected end of expression")
        t = toks[idx]
        idx += 1
        return t

    def parse_factor():
        nonlocal idx
        t = take()
        sign = 1.0
        while t in ("+", "-"):
            if t == "-":
                sign = -sign
            t = take()
        if t == "(":
            inner = parse_sum()
            if take() != ")":
                raise ValueError("unbalanced parenthesis")
            return [(sign * 1.0, None, None)] + inner if False else \
                [(c * sign, p, d) for (c, p, d) in inner]
        if t == "i":
            return [(sign * 1j, None, None)]
        if t in ("z", "y", "x"):
            power = 1
            if peek() == "^":
                take()
                power = int(take())
            axis = _VARS.index(t)
            mono = [0, 0, 0]
            mono[axis] = power
            return [(sign * 1.0, tuple(mono), None)]
        if t in ("dz", "dy", "dx"):
            axis = _VARS.index(t[1])
            d = [0, 0, 0]
            d[axis] = 1
            return [(sign * 1.0, None, tuple(d))]
        return [(sign * complex(float(t)), None, None)]

    def merge(a, b):
        out = []
        for (c1, m1, d1) in a:
            for (c2, m2, d2) in b:
                m = m1
                if m2 is not None:
                    m = m2 if m is None else tuple(u + v for u, v in zip(m, m2))
                d = d1
                if d2 is not None:
                    d = d2 if d is None else tuple(u + v for u, v in zip(d, d2))
                out.append((c1 * c2, m, d))
        return out

    def parse_term():
        parts = parse_factor()
        while peek() == "*":
            take()
            parts = merge(parts, parse_factor())
        return parts

    def parse_sum():
        parts = parse_term()
        while peek() in ("+", "-"):
            sgn = take()
            nxt = parse_term()
            if sgn == "-":
                nxt = [(-c, m, d) for (c, m, d) in nxt]
            parts = parts + nxt
        return parts

    parts = parse_sum()
    if idx != len(toks):
        raise ValueError("trailing tokens")
    op = PolyDiffOp()
    for (c, mono, d) in parts:
        mono = mono or (0, 0, 0)
        d = d or (0, 0, 0)
        op = op + PolyDiffOp({d: Poly3({mono: c})})
    return op


def format_op(op: PolyDiffOp) -> str:
    """Canonical text form; parse_op(format_op(op)) == op."""
    bits = []
    for d in sorted(op.terms):
        poly = op.terms[d]
        dstr = "*".join("*".join(["d" + _VARS[i]] * d[i])
                        for i in range(3) if d[i])
        for m in sorted(poly.terms):
            mono = "*".join(
                "*".join([_VARS[i]] * m[i]) for i in range(3) if m[i])
            chunk = f"({_fmt_complex(poly.terms[m])})"
            if mono:
                chunk += "*" + mono
            if dstr:
                chunk += "*" + dstr
            bits.append(chunk)
    return " + ".join(bits) if bits else "(0)"
