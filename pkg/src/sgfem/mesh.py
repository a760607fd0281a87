"""Interval and structured quad meshes with DOF maps per basis family."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discretization import BSPLINE, HERMITE, LAGRANGE, BasisFamily, KnotVector, open_knot_vector

# DOF kinds
VALUE = "value"
SLOPE = "slope"
CONTROL = "control"

MIXED_2D_FIELDS = ("u1", "u2", "g11", "g12", "g21", "g22", "L11", "L12", "L21", "L22")


@dataclass(frozen=True)
class Mesh1D:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 1 or len(v) < 2:
            raise ValueError("a 1-D mesh needs at least two vertices")
        if np.any(np.diff(v) <= 0):
            raise ValueError("mesh vertices must be strictly increasing")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def n_elem(self) -> int:
        return len(self.vertices) - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.vertices)

    @property
    def a(self) -> float:
        return float(self.vertices[0])

    @property
    def b(self) -> float:
        return float(self.vertices[-1])

    def locate(self, x) -> np.ndarray:
        """Element index containing each point (right end belongs to the last element)."""
        idx = np.searchsorted(self.vertices, np.asarray(x, dtype=float), side="right") - 1
        return np.clip(idx, 0, self.n_elem - 1)


def interval_mesh(a: float, b: float, n_elem: int) -> Mesh1D:
    if not a < b or n_elem < 1:
        raise ValueError(f"need a < b and n_elem >= 1, got ({a}, {b}, {n_elem})")
    return Mesh1D(np.linspace(a, b, n_elem + 1))


@dataclass(frozen=True)
class QuadMesh2D:
    """Structured ``nx x ny`` quad mesh on ``[0, L] x [0, H]``.

    Nodes are numbered row by row from the bottom. With ``periodic_x`` the
    right column is the left column, so a row has ``nx`` nodes instead of ``nx + 1``.
    """

    L: float
    H: float
    nx: int
    ny: int
    periodic_x: bool = False

    def __post_init__(self):
        if not (self.L > 0 and self.H > 0 and self.nx >= 1 and self.ny >= 1):
            raise ValueError("quad mesh needs positive dimensions and element counts")
        if self.periodic_x and self.nx < 2:
            raise ValueError("a periodic mesh needs at least two elements across")

    @property
    def nodes_per_row(self) -> int:
        return self.nx if self.periodic_x else self.nx + 1

    @property
    def n_nodes(self) -> int:
        return self.nodes_per_row * (self.ny + 1)

    @property
    def n_elem(self) -> int:
        return self.nx * self.ny

    @property
    def hx(self) -> float:
        return self.L / self.nx

    @property
    def hy(self) -> float:
        return self.H / self.ny

    def node_index(self, i, j):
        """Global node of grid column ``i`` (0..nx) and row ``j`` (0..ny)."""
        i = np.asarray(i)
        if self.periodic_x:
            i = i % self.nx
        return j * self.nodes_per_row + i

    @property
    def coordinates(self) -> np.ndarray:
        xs = np.linspace(0.0, self.L, self.nx + 1)[: self.nodes_per_row]
        ys = np.linspace(0.0, self.H, self.ny + 1)
        X, Y = np.meshgrid(xs, ys)
        return np.column_stack([X.ravel(), Y.ravel()])

    @property
    def cells(self) -> np.ndarray:
        """Counter-clockwise node quadruples, one row per element."""
        i, j = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        i, j = i.ravel(), j.ravel()
        return np.column_stack([self.node_index(i, j), self.node_index(i + 1, j),
                                self.node_index(i + 1, j + 1), self.node_index(i, j + 1)])

    def row_nodes(self, j: int) -> np.ndarray:
        return self.node_index(np.arange(self.nx + 1), j)


def quad_mesh(L: float, H: float, nx: int, ny: int, periodic_x: bool = False) -> QuadMesh2D:
    return QuadMesh2D(L, H, nx, ny, periodic_x)


@dataclass(frozen=True)
class DofMap:
    """Element-to-global DOF table.

    ``cells[e]`` lists the global DOFs of element ``e`` in local order.
    ``kinds``/``fields``/``locations`` describe each global DOF.
    """

    cells: np.ndarray
    n_dofs: int
    kinds: np.ndarray
    fields: np.ndarray
    locations: np.ndarray
    knots: KnotVector | None = None
    field_offsets: dict = field(default_factory=dict)

    def field_dofs(self, name: str) -> np.ndarray:
        return np.flatnonzero(self.fields == name)


def _scalar_map(mesh: Mesh1D, family: BasisFamily, name: str = "u"):
    n = mesh.n_elem
    e = np.arange(n)[:, None]
    knots = None
    if family.kind == LAGRANGE:
        p = family.degree
        cells = e * p + np.arange(p + 1)[None, :]
        ndofs = n * p + 1
        kinds = np.full(ndofs, VALUE, dtype=object)
        h = mesh.lengths
        locs = np.empty(ndofs)
        locs[::p] = mesh.vertices
        for k in range(1, p):
            locs[k::p] = mesh.vertices[:-1] + h * k / p
    elif family.kind == HERMITE:
        # (value, slope) per vertex
        cells = 2 * e + np.arange(4)[None, :]
        ndofs = 2 * (n + 1)
        kinds = np.tile(np.array([VALUE, SLOPE], dtype=object), n + 1)
        locs = np.repeat(mesh.vertices, 2)
    elif family.kind == BSPLINE:
        p = family.degree
        if not np.allclose(mesh.lengths, mesh.lengths[0]):
            raise ValueError("B-spline maps are built on uniform interval meshes")
        knots = open_knot_vector(p, n, mesh.a, mesh.b)
        cells = e + np.arange(p + 1)[None, :]
        ndofs = n + p
        kinds = np.full(ndofs, CONTROL, dtype=object)
        # Greville abscissae
        U = knots.knots
        locs = np.array([U[i + 1:i + p + 1].mean() for i in range(ndofs)])
    else:
        raise ValueError(f"unsupported family {family!r}")
    return cells, ndofs, kinds, np.full(ndofs, name, dtype=object), locs, knots


def build_dof_map(mesh: Mesh1D, family: BasisFamily) -> DofMap:
    """DOF map of a scalar field on an interval mesh."""
    cells, ndofs, kinds, fields, locs, knots = _scalar_map(mesh, family)
    return DofMap(cells, ndofs, kinds, fields, locs, knots, {"u": 0})


def build_mixed_dof_map(mesh: Mesh1D, family: BasisFamily,
                        names: tuple[str, ...] = ("u", "g", "L")) -> DofMap:
    """Stack several scalar fields of the same family, field after field.

    ``cells`` then has ``len(names) * dofs_per_element`` columns ordered by field.
    """
    blocks = []
    offset = 0
    offsets = {}
    kinds, fields, locs = [], [], []
    knots = None
    for name in names:
        cells, ndofs, k, f, loc, knots = _scalar_map(mesh, family, name)
        blocks.append(cells + offset)
        offsets[name] = offset
        kinds.append(k)
        fields.append(f)
        locs.append(loc)
        offset += ndofs
    return DofMap(np.hstack(blocks), offset, np.concatenate(kinds), np.concatenate(fields),
                  np.concatenate(locs), knots, offsets)


def build_mixed_dof_map_2d(mesh: QuadMesh2D) -> DofMap:
    """Ten nodal DOFs (u: 2, g: 4, L: 4) per node; node-major global numbering."""
    nf = len(MIXED_2D_FIELDS)
    nn = mesh.n_nodes
    cells = (mesh.cells[:, None, :] * nf + np.arange(nf)[None, :, None]).reshape(mesh.n_elem, -1)
    coords = np.repeat(mesh.coordinates, nf, axis=0)
    return DofMap(cells, nn * nf,
                  np.full(nn * nf, VALUE, dtype=object),
                  np.tile(np.array(MIXED_2D_FIELDS, dtype=object), nn),
                  coords, None, {name: k for k, name in enumerate(MIXED_2D_FIELDS)})
