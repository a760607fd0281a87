"""Quadrature rules and 1-D element bases (Lagrange, cubic Hermite, B-spline).

Every basis is evaluated at the points of a :class:`QuadratureRule` on the
reference interval ``[-1, 1]``. Derivatives in :class:`BasisEval` are taken
with respect to the reference coordinate; :meth:`BasisEval.physical` applies
the affine chain rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

LAGRANGE = "lagrange"
HERMITE = "hermite"
BSPLINE = "bspline"
FAMILIES = (LAGRANGE, HERMITE, BSPLINE)


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.points)


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule:
    """Gauss-Legendre rule with ``n`` points on ``[-1, 1]`` (exact to degree ``2n-1``)."""
    if not 1 <= n <= 16:
        raise ValueError(f"number of Gauss points must be in [1, 16], got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(x, w)


@dataclass(frozen=True)
class BasisFamily:
    """Element family descriptor.

    ``kind`` is ``"lagrange"`` (C0, degree >= 1), ``"hermite"`` (C1 cubic) or
    ``"bspline"`` (maximally smooth, degree >= 2).
    """

    kind: str
    degree: int

    def __post_init__(self):
        if self.kind == LAGRANGE and self.degree < 1:
            raise ValueError("Lagrange degree must be >= 1")
        if self.kind == HERMITE and self.degree != 3:
            raise ValueError("only the cubic Hermite element is available")
        if self.kind == BSPLINE and self.degree < 2:
            raise ValueError("B-spline degree must be >= 2 for square-integrable second derivatives")
        if self.kind not in FAMILIES:
            raise ValueError(f"unknown basis family {self.kind!r}")

    @classmethod
    def lagrange(cls, p: int = 1) -> "BasisFamily":
        return cls(LAGRANGE, p)

    @classmethod
    def hermite(cls) -> "BasisFamily":
        return cls(HERMITE, 3)

    @classmethod
    def bspline(cls, p: int = 2) -> "BasisFamily":
        return cls(BSPLINE, p)

    @property
    def continuity(self) -> int:
        return {LAGRANGE: 0, HERMITE: 1}.get(self.kind, self.degree - 1)

    @property
    def dofs_per_element(self) -> int:
        if self.kind == HERMITE:
            return 4
        return self.degree + 1

    def n_dofs(self, n_elem: int) -> int:
        if self.kind == LAGRANGE:
            return n_elem * self.degree + 1
        if self.kind == HERMITE:
            return 2 * (n_elem + 1)
        return n_elem + self.degree

    def default_quadrature(self) -> QuadratureRule:
        return gauss_legendre(self.degree + 2)


@dataclass(frozen=True)
class BasisEval:
    """Basis values and reference derivatives, each of shape ``(n_local, n_points)``.

    ``jacobian`` is ``dx/dxi`` of the affine element map.
    """

    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    jacobian: float = 1.0

    def physical(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values, ``d/dx`` and ``d2/dx2``."""
        J = self.jacobian
        return self.values, self.d1 / J, self.d2 / (J * J)


@dataclass(frozen=True)
class KnotVector:
    """Open uniform knot vector of degree ``p`` on ``[a, b]``."""

    degree: int
    knots: np.ndarray

    @property
    def n_ctrl(self) -> int:
        return len(self.knots) - self.degree - 1

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(self.knots)

    @property
    def n_spans(self) -> int:
        return len(self.breakpoints) - 1


def open_knot_vector(p: int, n_elem: int, a: float = 0.0, b: float = 1.0) -> KnotVector:
    if n_elem < 1 or p < 2:
        raise ValueError(f"need n_elem >= 1 and p >= 2, got n_elem={n_elem}, p={p}")
    if not a < b:
        raise ValueError(f"degenerate interval [{a}, {b}]")
    inner = np.linspace(a, b, n_elem + 1)
    knots = np.concatenate([np.full(p, a), inner, np.full(p, b)])
    knots.setflags(write=False)
    return KnotVector(p, knots)


def _lagrange_nodes(p):
    return np.linspace(-1.0, 1.0, p + 1)


@lru_cache(maxsize=None)
def _lagrange_eval(p: int, points: tuple) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    nodes = _lagrange_nodes(p)
    x = np.asarray(points)
    n = p + 1
    # each shape function as a polynomial through the nodes
    vals = np.empty((n, len(x)))
    d1 = np.empty_like(vals)
    d2 = np.empty_like(vals)
    for a in range(n):
        others = np.delete(nodes, a)
        poly = np.polynomial.Polynomial.fromroots(others)
        poly = poly / poly(nodes[a])
        vals[a] = poly(x)
        d1[a] = poly.deriv(1)(x)
        d2[a] = poly.deriv(2)(x) if p >= 2 else 0.0
    for arr in (vals, d1, d2):
        arr.setflags(write=False)
    return vals, d1, d2


def _hermite_reference(x):
    # shapes on t in [0, 1]; slope shapes carry dx/dt = 1
    t = 0.5 * (np.asarray(x) + 1.0)
    vals = np.array([1 - 3 * t**2 + 2 * t**3, t - 2 * t**2 + t**3,
                     3 * t**2 - 2 * t**3, -t**2 + t**3])
    dt = np.array([-6 * t + 6 * t**2, 1 - 4 * t + 3 * t**2,
                   6 * t - 6 * t**2, -2 * t + 3 * t**2])
    dtt = np.array([-6 + 12 * t, -4 + 6 * t, 6 - 12 * t, -2 + 6 * t])
    return vals, dt, dtt


def bspline_basis_funs(kv: KnotVector, span: int, x: np.ndarray, nderiv: int = 2) -> np.ndarray:
    """Nonzero B-splines of knot span ``span`` and their derivatives.

    Returns an array ``(nderiv + 1, p + 1, len(x))``; row ``a`` belongs to the
    control point ``span - p + a``. Cox-de Boor recursion with the derivative
    table of Piegl & Tiller (A2.3).
    """
    p = kv.degree
    U = kv.knots
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = len(x)
    ndu = np.zeros((p + 1, p + 1, m))
    ndu[0, 0] = 1.0
    left = np.zeros((p + 1, m))
    right = np.zeros((p + 1, m))
    for j in range(1, p + 1):
        left[j] = x - U[span + 1 - j]
        right[j] = U[span + j] - x
        saved = np.zeros(m)
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved
    ders = np.zeros((nderiv + 1, p + 1, m))
    ders[0] = ndu[:, p]
    a = np.zeros((2, p + 1, m))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[:] = 0.0
        a[0, 0] = 1.0
        for k in range(1, nderiv + 1):
            d = np.zeros(m)
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d = d + a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d = d + a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, nderiv + 1):
        ders[k] *= fac
        fac *= p - k
    return ders


def find_span(kv: KnotVector, x: float) -> int:
    """Knot-span index ``i`` with ``U[i] <= x < U[i+1]`` (last span closed on the right)."""
    U = kv.knots
    n = kv.n_ctrl - 1
    if x >= U[n + 1]:
        return n
    return int(np.searchsorted(U, x, side="right") - 1)


def eval_basis(family: BasisFamily, rule: QuadratureRule | None = None, *,
               h: float = 2.0, knots: KnotVector | None = None,
               span: int | None = None) -> BasisEval:
    """Evaluate the element-supported basis functions at the rule points.

    For Lagrange and Hermite ``h`` is the physical element length; Hermite
    slope shapes are scaled so that the slope DOFs are physical derivatives.
    B-splines need ``knots`` and the knot-span index ``span`` (the element).
    """
    rule = rule or family.default_quadrature()
    xi = rule.points
    if family.kind == LAGRANGE:
        v, d1, d2 = _lagrange_eval(family.degree, tuple(xi))
        return BasisEval(v, d1, d2, jacobian=0.5 * h)
    if family.kind == HERMITE:
        v, dt, dtt = _hermite_reference(xi)
        # d/dxi = d/dt / 2; slope shapes are multiplied by dx/dt = h
        scale = np.array([1.0, h, 1.0, h])[:, None]
        return BasisEval(v * scale, 0.5 * dt * scale, 0.25 * dtt * scale, jacobian=0.5 * h)
    if knots is None or span is None:
        raise ValueError("B-spline evaluation needs a knot vector and a span index")
    if knots.degree != family.degree:
        raise ValueError(f"knot vector degree {knots.degree} != family degree {family.degree}")
    x0, x1 = knots.knots[span], knots.knots[span + 1]
    if not x1 > x0:
        raise ValueError(f"span {span} has zero length")
    J = 0.5 * (x1 - x0)
    x = x0 + J * (xi + 1.0)
    ders = bspline_basis_funs(knots, span, x, 2)
    return BasisEval(ders[0], ders[1] * J, ders[2] * J * J, jacobian=J)
