"""Simple-shear benchmark reduced to the through-thickness coordinate ``y``.

Under ``u = (u_x(y), 0)`` the strain-gradient energy reduces to
``w = c2/2 (u')^2 + k/2 (u'')^2`` with ``k = c5 + c6 + c7``. Case ``D`` drives
the top edge by a rail (``u(H) = u_hat``, ``u'(H) = 0``) over a bottom edge that
may rotate; case ``T`` applies a shear traction on top over a clamped bottom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .constitutive import (ConstitutiveParams, EngineeringMaterial, MaterialLike, as_params,
                           params_from_engineering)
from .discretization import BSPLINE, HERMITE, LAGRANGE, BasisFamily, gauss_legendre
from .fem1d import DiscreteSolution1D, point_basis, quadrature_table
from .linalg import (SingularSystemError, TripletBuffer, apply_dirichlet, compress,
                     solve_sparse)
from .mesh import Mesh1D, build_dof_map, build_mixed_dof_map, interval_mesh

CASE_D = "D"
CASE_T = "T"


class IllPosedReductionError(ValueError):
    pass


def reduced_moduli(params: ConstitutiveParams) -> tuple[float, float, float]:
    """``(c2, k, r)`` with ``k = c5 + c6 + c7`` and boundary-layer width ``r = sqrt(k / c2)``."""
    c2 = params.c2
    k = params.c5 + params.c6 + params.c7
    if not c2 > 0:
        raise IllPosedReductionError(f"c2 must be positive, got {c2}")
    if not k > 0:
        raise IllPosedReductionError(f"c5 + c6 + c7 = {k} must be positive for the shear reduction")
    return c2, k, math.sqrt(k / c2)


@dataclass(frozen=True)
class ShearCase:
    """Load case: ``tag`` ``'D'`` with ``load`` = top displacement (mm) or
    ``'T'`` with ``load`` = top traction (N/mm); plate height ``H`` (mm)."""

    tag: str
    load: float
    H: float = 0.5

    def __post_init__(self):
        if self.tag not in (CASE_D, CASE_T):
            raise ValueError(f"case must be 'D' or 'T', got {self.tag!r}")
        if not self.H > 0:
            raise ValueError(f"H must be positive, got {self.H}")

    @classmethod
    def default(cls, tag: str) -> "ShearCase":
        return cls(tag, 0.05 if tag == CASE_D else 1.0)


@dataclass(frozen=True)
class ClosedFormShear:
    """``u(y) = q1 + q2 y + q3 sinh(y/r) + q4 cosh(y/r)``.

    The hyperbolic part is also kept as ``A exp((y-H)/r) + B exp(-y/r)`` so
    that evaluation never overflows for thin boundary layers.
    """

    q1: float
    q2: float
    q3: float
    q4: float
    r: float
    H: float
    A: float
    B: float

    def evaluate(self, y, order: int = 0) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        r = self.r
        if self.H / r > 30.0:
            hyp = (self.A * np.exp((y - self.H) / r) + (-1) ** order * self.B * np.exp(-y / r)) / r**order
        else:
            s, c = np.sinh(y / r), np.cosh(y / r)
            if order % 2:
                s, c = c, s
            hyp = (self.q3 * s + self.q4 * c) / r**order
        poly = {0: self.q1 + self.q2 * y, 1: self.q2 + 0.0 * y}.get(order, 0.0 * y)
        return poly + hyp

    def u(self, y):
        return self.evaluate(y, 0)

    def du(self, y):
        return self.evaluate(y, 1)

    def d2u(self, y):
        return self.evaluate(y, 2)

    def d3u(self, y):
        return self.evaluate(y, 3)

    def energy(self, c2: float, k: float, n: int = 4001) -> float:
        """``int_0^H (c2 u'^2 + k u''^2) dy`` by composite Gauss quadrature."""
        xg, wg = np.polynomial.legendre.leggauss(8)
        edges = np.linspace(0.0, self.H, n)
        mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
        half = 0.5 * np.diff(edges)[:, None]
        y = (mid + half * xg[None, :]).ravel()
        w = (half * wg[None, :]).ravel()
        return float(np.sum(w * (c2 * self.du(y) ** 2 + k * self.d2u(y) ** 2)))


def analytic_shear(case: ShearCase, params: MaterialLike) -> ClosedFormShear:
    params = as_params(params)
    c2, k, r = reduced_moduli(params)
    H = case.H
    a = H / r
    em = math.exp(-a)
    e2 = em * em
    if case.tag == CASE_D:
        u_hat = case.load
        # hyperbolics divided through by exp(H/r)
        den = r * (1.0 - e2) - H * (1.0 + e2)
        q1 = 0.0
        q2 = -u_hat * (1.0 + e2) / den
        A = u_hat * r / den
        B = -A * em
    else:
        t_hat = case.load
        S = c2 * r * r * (0.5 * (1.0 + e2) - em) + k * em
        q1 = -r**3 * t_hat * (1.0 - e2) / (2.0 * S)
        q2 = r**2 * t_hat * (1.0 + e2) / (2.0 * S)
        A = -r**3 * t_hat * em / (2.0 * S)
        B = r**3 * t_hat / (2.0 * S)
    q3 = A * em - B
    q4 = A * em + B
    return ClosedFormShear(q1, q2, q3, q4, r, H, A, B)


def analytic_shear_textbook(case: ShearCase, params: MaterialLike) -> tuple[float, float, float, float]:
    """Constants straight from the hyperbolic formulas (overflows for ``H/r`` beyond ~700)."""
    params = as_params(params)
    c2, k, r = reduced_moduli(params)
    H = case.H
    ch, sh = math.cosh(H / r), math.sinh(H / r)
    if case.tag == CASE_D:
        u = case.load
        return 0.0, u * ch / (H * ch - r * sh), u * r / (r * sh - H * ch), 0.0
    t = case.load
    s = c2 * r * r * (ch - 1.0) + k
    return -r**3 * t * sh / s, r**2 * t * ch / s, -r**3 * t * ch / s, r**3 * t * sh / s


# characteristic length used with E = 400 MPa, nu = 0.49 for each load case
DEFAULT_LC = {CASE_D: 0.1, CASE_T: 0.2}


def default_material(tag: str) -> ConstitutiveParams:
    """Moduli recomputed from ``(400, 0.49, lc)`` with the case's own ``lc``."""
    return params_from_engineering(EngineeringMaterial(400.0, 0.49, DEFAULT_LC[tag]))


def default_penalty(params: ConstitutiveParams, h: float) -> float:
    c2, k, _ = reduced_moduli(params)
    return 1e8 * max(c2 / h, k / h**3)


def _family_of(name: str, degree: int | None) -> BasisFamily:
    if name == HERMITE:
        return BasisFamily.hermite()
    if name == BSPLINE:
        return BasisFamily.bspline(degree or 2)
    if name == LAGRANGE:
        return BasisFamily.lagrange(degree or 1)
    raise ValueError(f"unknown family {name!r}")


def assemble_shear_stiffness(family: BasisFamily, mesh: Mesh1D, dofmap, c2: float, k: float,
                             rule=None) -> sp.csr_matrix:
    """Stiffness of ``int c2 u' v' + k u'' v''``."""
    rule = rule or family.default_quadrature()
    q = quadrature_table(family, mesh, dofmap, rule)
    Ke = (c2 * np.einsum("eq,eqa,eqb->eab", q.wdx, q.dN, q.dN)
          + k * np.einsum("eq,eqa,eqb->eab", q.wdx, q.d2N, q.d2N))
    buf = TripletBuffer(dofmap.n_dofs)
    buf.add_element_matrices(dofmap.cells, Ke)
    return compress(buf)


def _point_rows(family, mesh, dofmap, y, order):
    elems, tabs = point_basis(family, mesh, dofmap, [y])
    return dofmap.cells[elems[0]], tabs[order][0]


def solve_shear_1d(family: BasisFamily, n_elem: int, case: ShearCase, params: MaterialLike,
                   K: float | None = None, strong_slopes: bool = False,
                   strong_values: bool = False) -> DiscreteSolution1D:
    """Galerkin solution with a C1 basis (cubic Hermite or B-spline).

    Boundary values and slopes are enforced by point penalties ``K``; with
    ``strong_values``/``strong_slopes`` they are eliminated instead wherever a
    matching DOF exists (endpoint values for both families, slopes for Hermite).
    """
    if family.kind not in (HERMITE, BSPLINE):
        raise ValueError("the primal shear solver needs a C1 basis (hermite or bspline)")
    params = as_params(params)
    c2, k, _ = reduced_moduli(params)
    if K is not None and not K > 0:
        raise ValueError("penalty factor must be positive")
    mesh = interval_mesh(0.0, case.H, n_elem)
    dofmap = build_dof_map(mesh, family)
    A = assemble_shear_stiffness(family, mesh, dofmap, c2, k).tolil()
    b = np.zeros(dofmap.n_dofs)
    K = default_penalty(params, case.H / n_elem) if K is None else K

    if case.tag == CASE_D:
        conditions = [(0.0, 0, 0.0), (case.H, 0, case.load), (case.H, 1, 0.0)]
    else:
        conditions = [(0.0, 0, 0.0), (0.0, 1, 0.0)]
        cells, phi = _point_rows(family, mesh, dofmap, case.H, 0)
        b[cells] += case.load * phi

    strong = []
    for y, order, value in conditions:
        dof = _direct_dof(family, dofmap, n_elem, y, order, case.H)
        if dof is not None and ((order == 0 and strong_values) or (order == 1 and strong_slopes)):
            strong.append((dof, value))
            continue
        cells, phi = _point_rows(family, mesh, dofmap, y, order)
        A[np.ix_(cells, cells)] += K * np.outer(phi, phi)
        b[cells] += K * value * phi
    A = A.tocsr()
    if strong:
        A, b = apply_dirichlet(A, b, strong)
    x = solve_sparse(A, b)
    return DiscreteSolution1D(family, mesh, dofmap, {"u": x},
                              label=_label(family), info={"penalty": K, "case": case.tag})


def _direct_dof(family, dofmap, n_elem, y, order, H):
    end = 0 if y == 0.0 else 1
    if family.kind == HERMITE:
        vertex = 0 if end == 0 else n_elem
        return 2 * vertex + order
    if family.kind == BSPLINE and order == 0:
        return 0 if end == 0 else dofmap.n_dofs - 1
    return None


def _label(family: BasisFamily) -> str:
    if family.kind == HERMITE:
        return "hermite"
    return f"{family.kind}{family.degree}"


def assemble_mixed_shear(mesh: Mesh1D, family: BasisFamily, dofmap, c2: float, k: float):
    """Saddle-point matrix of ``c2 u'v' + k g'h' + L(h - v') + (g - u')M`` for fields (u, g, L)."""
    q = quadrature_table(family, mesh, dofmap, family.default_quadrature())
    n = family.dofs_per_element
    stiff = np.einsum("eq,eqa,eqb->eab", q.wdx, q.dN, q.dN)
    mass = np.einsum("eq,eqa,eqb->eab", q.wdx, q.N, q.N)
    # rows: multiplier test function, cols: u' trial
    grad = np.einsum("eq,eqa,eqb->eab", q.wdx, q.N, q.dN)
    ne = mesh.n_elem
    Ke = np.zeros((ne, 3 * n, 3 * n))
    u, g, L = slice(0, n), slice(n, 2 * n), slice(2 * n, 3 * n)
    Ke[:, u, u] = c2 * stiff
    Ke[:, g, g] = k * stiff
    Ke[:, g, L] = mass
    Ke[:, L, g] = mass
    Ke[:, L, u] = -grad
    Ke[:, u, L] = -grad.transpose(0, 2, 1)
    buf = TripletBuffer(dofmap.n_dofs)
    buf.add_element_matrices(dofmap.cells, Ke)
    return compress(buf)


def solve_shear_mixed_1d(n_elem: int, case: ShearCase, params: MaterialLike,
                         p: int = 1) -> DiscreteSolution1D:
    """Equal-order C0 Lagrange (u, g, L) with ``g ~ u'`` enforced by the multiplier."""
    params = as_params(params)
    c2, k, _ = reduced_moduli(params)
    family = BasisFamily.lagrange(p)
    mesh = interval_mesh(0.0, case.H, n_elem)
    dofmap = build_mixed_dof_map(mesh, family)
    A = assemble_mixed_shear(mesh, family, dofmap, c2, k)
    b = np.zeros(dofmap.n_dofs)
    nf = family.n_dofs(n_elem)
    u0, g0 = dofmap.field_offsets["u"], dofmap.field_offsets["g"]
    bottom, top = 0, nf - 1
    if case.tag == CASE_D:
        constraints = [(u0 + bottom, 0.0), (u0 + top, case.load), (g0 + top, 0.0)]
    else:
        constraints = [(u0 + bottom, 0.0), (g0 + bottom, 0.0)]
        b[u0 + top] += case.load
    A, b = apply_dirichlet(A, b, constraints)
    try:
        x = solve_sparse(A, b)
    except SingularSystemError as exc:
        raise SingularSystemError(f"{exc}; refine the mesh or raise the degree", exc.pivot) from exc
    fields = {name: x[off:off + nf] for name, off in dofmap.field_offsets.items()}
    scalar_map = build_dof_map(mesh, family)
    return DiscreteSolution1D(family, mesh, scalar_map, fields, label=f"mixed{p}",
                              info={"case": case.tag})


def constraint_residual(sol: DiscreteSolution1D, n_q: int = 4) -> float:
    """Max over Gauss points of ``|g - u'|`` for a mixed solution."""
    q = quadrature_table(sol.family, sol.mesh, sol.dofmap, gauss_legendre(n_q))
    cells = sol.dofmap.cells
    g = np.einsum("eqa,ea->eq", q.N, sol.fields["g"][cells])
    du = np.einsum("eqa,ea->eq", q.dN, sol.fields["u"][cells])
    return float(np.abs(g - du).max())


def bilinear_energy(sol: DiscreteSolution1D, coeffs: np.ndarray, c2: float, k: float) -> float:
    """``a(v, v)`` of the primal form for a coefficient vector in ``sol``'s space."""
    A = assemble_shear_stiffness(sol.family, sol.mesh, sol.dofmap, c2, k)
    return float(coeffs @ (A @ coeffs))
