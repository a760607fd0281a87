"""Two-dimensional mixed (u, g, L) solver for the periodic simple-shear plate.

All ten nodal fields use bilinear quads. ``g`` approximates the full
displacement gradient, ``L`` is the multiplier enforcing ``g = grad u``; the
strain gradient is built from ``g`` only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constitutive import MaterialLike, as_params, build_isotropic_C, build_isotropic_D
from .discretization import gauss_legendre
from .linalg import TripletBuffer, apply_dirichlet, compress, solve_sparse
from .mesh import MIXED_2D_FIELDS, QuadMesh2D, build_mixed_dof_map_2d
from .shear import CASE_D, ShearCase, reduced_moduli

NF = len(MIXED_2D_FIELDS)
U = (0, 1)
G = {(i, j): 2 + 2 * i + j for i in range(2) for j in range(2)}
LAM = {(i, j): 6 + 2 * i + j for i in range(2) for j in range(2)}

# Only g_i2 (derivatives across the edge) are pinned on horizontal edges. The
# tangential g_i1 already follow from the prescribed edge displacement; pinning
# them as well leaves the multipliers L_i1 with x-invariant null modes.
NORMAL_G = (G[(0, 1)], G[(1, 1)])

_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def _bilinear(xi, eta):
    """Shape values ``(4, n)`` and reference gradients ``(4, 2, n)``."""
    xa, ya = _CORNERS[:, 0:1], _CORNERS[:, 1:2]
    N = 0.25 * (1 + xa * xi) * (1 + ya * eta)
    dN = np.stack([0.25 * xa * (1 + ya * eta), 0.25 * ya * (1 + xa * xi)], axis=1)
    return N, dN


@lru_cache(maxsize=8)
def _reference_rule(n: int = 2):
    rule = gauss_legendre(n)
    xi, eta = np.meshgrid(rule.points, rule.points)
    w = np.outer(rule.weights, rule.weights).ravel()
    return xi.ravel(), eta.ravel(), w


def element_matrix(C: np.ndarray, D: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """40 x 40 matrix of one ``hx x hy`` rectangle; local index ``field * 4 + node``."""
    xi, eta, w = _reference_rule(2)
    N, dNr = _bilinear(xi, eta)
    dN = dNr * np.array([2.0 / hx, 2.0 / hy])[None, :, None]
    w = w * 0.25 * hx * hy
    mass = np.einsum("q,aq,bq->ab", w, N, N)
    # grad_pair[a, j, b, l] = int dN_a/dx_j dN_b/dx_l
    grad_pair = np.einsum("q,ajq,blq->ajbl", w, dN, dN)
    # val_grad[a, b, j] = int N_a dN_b/dx_j
    val_grad = np.einsum("q,aq,bjq->abj", w, N, dN)

    K = np.zeros((NF, 4, NF, 4))
    for i in range(2):
        for k in range(2):
            K[U[i], :, U[k], :] += np.einsum("jl,ajbl->ab", C[i, :, k, :], grad_pair)
    for (i, j), fg in G.items():
        for (l, m), fh in G.items():
            K[fg, :, fh, :] += np.einsum("kn,akbn->ab", D[i, j, :, l, m, :], grad_pair)
    for (i, j), fl in LAM.items():
        fg = G[(i, j)]
        K[fg, :, fl, :] += mass
        K[fl, :, fg, :] += mass
        # -int L_ij du_i/dx_j and its transpose
        K[fl, :, U[i], :] -= val_grad[:, :, j]
        K[U[i], :, fl, :] -= val_grad[:, :, j].T
    return K.reshape(NF * 4, NF * 4)


@dataclass
class MixedSolution2D:
    mesh: QuadMesh2D
    u: np.ndarray
    g: np.ndarray
    L: np.ndarray
    case: ShearCase

    def field_rows(self) -> np.ndarray:
        """``(x, y, u_x, u_y)`` per node."""
        return np.column_stack([self.mesh.coordinates, self.u])

    def row_spread(self) -> float:
        """Largest deviation of ``u_x`` from its row mean over all node rows."""
        ux = self.u[:, 0].reshape(self.mesh.ny + 1, self.mesh.nodes_per_row)
        return float(np.abs(ux - ux.mean(axis=1, keepdims=True)).max())

    def constraint_rms(self) -> float:
        """RMS over 2x2 Gauss points of ``|g_ij - u_i,j|``."""
        mesh = self.mesh
        xi, eta, w = _reference_rule(2)
        N, dNr = _bilinear(xi, eta)
        dN = dNr * np.array([2.0 / mesh.hx, 2.0 / mesh.hy])[None, :, None]
        cells = mesh.cells
        ue = self.u[cells]
        ge = self.g[cells]
        grad = np.einsum("ajq,eai->eqij", dN, ue)
        gq = np.einsum("aq,eac->eqc", N, ge).reshape(len(cells), len(w), 2, 2)
        diff2 = ((gq - grad) ** 2).sum(axis=(2, 3))
        return float(np.sqrt(diff2.mean()))


def solve_shear_mixed_2d(mesh: QuadMesh2D, case: ShearCase, params: MaterialLike,
                         K: float | None = None) -> MixedSolution2D:
    """Assemble and solve the periodic mixed plate problem.

    ``K`` is accepted for interface symmetry with the primal solvers; every
    essential condition here is imposed by elimination.
    """
    del K
    params = as_params(params)
    reduced_moduli(params)
    if not mesh.periodic_x:
        raise ValueError("the shear plate needs a periodic_x mesh")
    if not np.isclose(mesh.H, case.H):
        raise ValueError(f"mesh height {mesh.H} != case height {case.H}")
    C = build_isotropic_C(params, 2)
    D = build_isotropic_D(params, 2)
    Ke = element_matrix(C, D, mesh.hx, mesh.hy)
    dofmap = build_mixed_dof_map_2d(mesh)
    buf = TripletBuffer(dofmap.n_dofs)
    buf.add_element_matrices(dofmap.cells, np.broadcast_to(Ke, (mesh.n_elem,) + Ke.shape))
    A = compress(buf)
    b = np.zeros(dofmap.n_dofs)

    bottom = mesh.row_nodes(0)[:mesh.nodes_per_row]
    top = mesh.row_nodes(mesh.ny)[:mesh.nodes_per_row]

    def dofs(nodes, field):
        return nodes * NF + field

    cons = []
    for f in U:
        cons += [(d, 0.0) for d in dofs(bottom, f)]
    if case.tag == CASE_D:
        cons += [(d, case.load) for d in dofs(top, U[0])]
        cons += [(d, 0.0) for d in dofs(top, U[1])]
        for f in NORMAL_G:
            cons += [(d, 0.0) for d in dofs(top, f)]
    else:
        for f in NORMAL_G:
            cons += [(d, 0.0) for d in dofs(bottom, f)]
        # transverse displacement pinned on top
        cons += [(d, 0.0) for d in dofs(top, U[1])]
        # consistent edge load of a constant traction: each periodic top node collects hx
        np.add.at(b, dofs(top, U[0]), case.load * mesh.hx)
    A, b = apply_dirichlet(A, b, cons)
    x = solve_sparse(A, b).reshape(mesh.n_nodes, NF)
    return MixedSolution2D(mesh, x[:, 0:2].copy(), x[:, 2:6].copy(), x[:, 6:10].copy(), case)


def sample_edge(sol: MixedSolution2D, edge: str = "right", n_samples: int = 201):
    """``(y, u_x)`` along the left or right edge, interpolated linearly between nodes."""
    if n_samples < 2:
        raise ValueError("need at least two samples")
    mesh = sol.mesh
    col = {"left": 0, "right": mesh.nx}.get(edge)
    if col is None:
        raise ValueError(f"edge must be 'left' or 'right', got {edge!r}")
    nodes = mesh.node_index(np.full(mesh.ny + 1, col), np.arange(mesh.ny + 1))
    y_nodes = np.linspace(0.0, mesh.H, mesh.ny + 1)
    y = np.linspace(0.0, mesh.H, n_samples)
    return y, np.interp(y, y_nodes, sol.u[nodes, 0])
