"""Vectorized 1-D tabulation, assembly and point evaluation shared by the solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discretization import (BSPLINE, HERMITE, LAGRANGE, BasisFamily, QuadratureRule,
                             bspline_basis_funs)
from .mesh import DofMap, Mesh1D, build_dof_map


def tabulate(family: BasisFamily, mesh: Mesh1D, dofmap: DofMap, elems, xi):
    """Physical values, first and second derivatives of the local basis.

    ``elems`` and ``xi`` are equal-length arrays of element indices and reference
    coordinates; the result arrays have shape ``(len(xi), n_local)``.
    """
    elems = np.asarray(elems, dtype=np.int64)
    xi = np.asarray(xi, dtype=float)
    h = mesh.lengths[elems]
    J = 0.5 * h
    if family.kind == LAGRANGE:
        p = family.degree
        nodes = np.linspace(-1.0, 1.0, p + 1)
        vals = np.empty((len(xi), p + 1))
        d1 = np.empty_like(vals)
        d2 = np.zeros_like(vals)
        for a in range(p + 1):
            poly = np.polynomial.Polynomial.fromroots(np.delete(nodes, a))
            poly = poly / poly(nodes[a])
            vals[:, a] = poly(xi)
            d1[:, a] = poly.deriv(1)(xi)
            if p >= 2:
                d2[:, a] = poly.deriv(2)(xi)
        return vals, d1 / J[:, None], d2 / (J * J)[:, None]
    if family.kind == HERMITE:
        t = 0.5 * (xi + 1.0)
        vals = np.column_stack([1 - 3 * t**2 + 2 * t**3, h * (t - 2 * t**2 + t**3),
                                3 * t**2 - 2 * t**3, h * (-t**2 + t**3)])
        d1 = np.column_stack([(-6 * t + 6 * t**2) / h, 1 - 4 * t + 3 * t**2,
                              (6 * t - 6 * t**2) / h, -2 * t + 3 * t**2])
        d2 = np.column_stack([(-6 + 12 * t) / h**2, (-4 + 6 * t) / h,
                              (6 - 12 * t) / h**2, (-2 + 6 * t) / h])
        return vals, d1, d2
    if family.kind == BSPLINE:
        kv = dofmap.knots
        x = mesh.vertices[elems] + J * (xi + 1.0)
        ders = bspline_basis_funs(kv, elems + family.degree, x, 2)
        return ders[0].T, ders[1].T, ders[2].T
    raise ValueError(f"unsupported family {family!r}")


@dataclass
class QuadTable:
    """Basis data at every quadrature point, arrays shaped ``(n_elem, n_q[, n_local])``."""

    x: np.ndarray
    wdx: np.ndarray
    N: np.ndarray
    dN: np.ndarray
    d2N: np.ndarray


def quadrature_table(family: BasisFamily, mesh: Mesh1D, dofmap: DofMap,
                     rule: QuadratureRule) -> QuadTable:
    ne, nq = mesh.n_elem, rule.n
    elems = np.repeat(np.arange(ne), nq)
    xi = np.tile(rule.points, ne)
    N, dN, d2N = tabulate(family, mesh, dofmap, elems, xi)
    J = 0.5 * mesh.lengths
    x = mesh.vertices[:-1, None] + J[:, None] * (rule.points[None, :] + 1.0)
    k = N.shape[1]
    return QuadTable(x, J[:, None] * rule.weights[None, :],
                     N.reshape(ne, nq, k), dN.reshape(ne, nq, k), d2N.reshape(ne, nq, k))


def point_basis(family, mesh, dofmap, x):
    """Local basis at physical points ``x``; returns the element indices too."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    tol = 1e-12 * (mesh.b - mesh.a)
    if np.any(x < mesh.a - tol) or np.any(x > mesh.b + tol):
        raise ValueError(f"evaluation point outside [{mesh.a}, {mesh.b}]")
    x = np.clip(x, mesh.a, mesh.b)
    elems = mesh.locate(x)
    xi = 2.0 * (x - mesh.vertices[elems]) / mesh.lengths[elems] - 1.0
    return elems, tabulate(family, mesh, dofmap, elems, xi)


@dataclass
class DiscreteSolution1D:
    """Coefficient vectors of one or more scalar fields sharing a family and mesh.

    ``fields['u']`` is always the displacement. Mixed solutions also carry the
    gradient field ``'g'`` and the multiplier ``'L'``.
    """

    family: BasisFamily
    mesh: Mesh1D
    dofmap: DofMap
    fields: dict
    label: str = ""
    info: dict = field(default_factory=dict)

    @property
    def dofs(self) -> np.ndarray:
        return np.concatenate(list(self.fields.values()))

    @property
    def n_dofs(self) -> int:
        return sum(len(v) for v in self.fields.values())

    def evaluate(self, x, order: int = 0, name: str = "u") -> np.ndarray:
        """Field ``name`` (or its ``order``-th derivative, order <= 2) at points ``x``."""
        if order not in (0, 1, 2):
            raise ValueError("order must be 0, 1 or 2")
        elems, tabs = point_basis(self.family, self.mesh, self.dofmap, x)
        coeffs = self.fields[name][self.dofmap.cells[elems]]
        return np.einsum("pa,pa->p", tabs[order], coeffs)

    def to_csv_rows(self, x):
        return np.column_stack([x, self.evaluate(x, 0), self.evaluate(x, 1)])


def scalar_dofmap(mesh: Mesh1D, family: BasisFamily) -> DofMap:
    return build_dof_map(mesh, family)
