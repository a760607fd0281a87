import numpy as np
import pytest

from sgfem.discretization import BasisFamily
from sgfem.fem1d import quadrature_table
from sgfem.mesh import (MIXED_2D_FIELDS, Mesh1D, build_dof_map, build_mixed_dof_map,
                        build_mixed_dof_map_2d, interval_mesh, quad_mesh)


def test_interval_mesh_examples():
    assert interval_mesh(0, 1, 1).vertices.tolist() == [0.0, 1.0]
    m = interval_mesh(0, 0.5, 5)
    assert len(m.vertices) == 6
    np.testing.assert_allclose(m.lengths, 0.1, rtol=1e-14)
    m = interval_mesh(0.01, 1, 50)
    assert len(m.vertices) == 51
    np.testing.assert_allclose(m.lengths, 0.0198, rtol=1e-12)
    with pytest.raises(ValueError):
        interval_mesh(1, 0, 3)
    with pytest.raises(ValueError):
        Mesh1D(np.array([0.0, 0.0, 1.0]))


def test_locate():
    m = interval_mesh(0, 1, 4)
    assert m.locate([0.0, 0.26, 0.5, 1.0]).tolist() == [0, 1, 2, 3]


@pytest.mark.parametrize("periodic,nodes", [(False, 8), (True, 6)])
def test_quad_counts(periodic, nodes):
    m = quad_mesh(1.5, 0.5, 3, 1, periodic)
    assert m.n_nodes == nodes and m.n_elem == 3


def test_quad_periodic_identification():
    m = quad_mesh(1.5, 0.5, 60, 20, True)
    assert m.n_nodes == 60 * 21
    for j in range(m.ny + 1):
        assert m.node_index(0, j) == m.node_index(m.nx, j)
    assert np.unique(m.cells).size == m.n_nodes
    assert build_mixed_dof_map_2d(quad_mesh(1.5, 0.5, 3, 1, True)).n_dofs == 60


def test_quad_cells_counter_clockwise():
    m = quad_mesh(2.0, 1.0, 2, 2)
    xy = m.coordinates[m.cells[0]]
    area = 0.5 * np.sum(xy[:, 0] * np.roll(xy[:, 1], -1) - np.roll(xy[:, 0], -1) * xy[:, 1])
    assert area == pytest.approx(0.5)


def test_quad_invalid():
    with pytest.raises(ValueError):
        quad_mesh(1.0, 1.0, 0, 1)
    with pytest.raises(ValueError):
        quad_mesh(1.0, 1.0, 1, 1, True)


@pytest.mark.parametrize("family,n,expected", [
    (BasisFamily.hermite(), 5, 12), (BasisFamily.bspline(2), 100, 102),
    (BasisFamily.lagrange(1), 7, 8), (BasisFamily.lagrange(3), 4, 13),
    (BasisFamily.bspline(3), 10, 13)])
def test_dof_counts(family, n, expected):
    dm = build_dof_map(interval_mesh(0, 1, n), family)
    assert dm.n_dofs == expected == family.n_dofs(n)
    assert np.array_equal(np.unique(dm.cells), np.arange(dm.n_dofs))


@pytest.mark.parametrize("family", [BasisFamily.lagrange(1), BasisFamily.lagrange(2),
                                    BasisFamily.bspline(2), BasisFamily.bspline(3)])
def test_integrating_one_gives_length(family):
    mesh = interval_mesh(0.3, 1.7, 9)
    dm = build_dof_map(mesh, family)
    q = quadrature_table(family, mesh, dm, family.default_quadrature())
    ones = np.ones(dm.n_dofs)
    u = np.einsum("eqa,ea->eq", q.N, ones[dm.cells])
    assert np.sum(u * q.wdx) == pytest.approx(1.4, abs=1e-12)


def test_hermite_integrates_one():
    family = BasisFamily.hermite()
    mesh = interval_mesh(0.0, 2.0, 6)
    dm = build_dof_map(mesh, family)
    coef = np.zeros(dm.n_dofs)
    coef[0::2] = 1.0
    q = quadrature_table(family, mesh, dm, family.default_quadrature())
    assert np.sum(np.einsum("eqa,ea->eq", q.N, coef[dm.cells]) * q.wdx) == pytest.approx(2.0)


def test_bspline_needs_uniform_mesh():
    with pytest.raises(ValueError):
        build_dof_map(Mesh1D(np.array([0.0, 0.1, 1.0])), BasisFamily.bspline(2))


def test_mixed_map_layout():
    mesh = interval_mesh(0, 1, 4)
    dm = build_mixed_dof_map(mesh, BasisFamily.lagrange(1))
    assert dm.n_dofs == 15
    assert dm.field_offsets == {"u": 0, "g": 5, "L": 10}
    assert dm.cells[0].tolist() == [0, 1, 5, 6, 10, 11]
    assert dm.field_dofs("g").tolist() == list(range(5, 10))


def test_mixed_2d_layout():
    mesh = quad_mesh(1.0, 1.0, 2, 1, True)
    dm = build_mixed_dof_map_2d(mesh)
    nf = len(MIXED_2D_FIELDS)
    assert dm.cells.shape == (2, 4 * nf)
    # local index field * 4 + node
    node0 = mesh.cells[0, 0]
    assert dm.cells[0, 0] == node0 * nf
    assert dm.cells[0, 4] == node0 * nf + 1
