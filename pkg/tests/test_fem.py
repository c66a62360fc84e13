import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from hadapencil import fem
from hadapencil import geometry as geo
from hadapencil import modes

SQUARE = geo.make_domain("square")
DISK = geo.make_domain("disk")
PAIR = geo.make_domain("pair", offset=(3.0, 0.0), margin=0.1)


def test_reference_element():
    p = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
    ke, me, area = fem.element_matrices(p)
    assert area[0] == pytest.approx(0.5)
    assert np.allclose(ke[0], [[1, -0.5, -0.5], [-0.5, 0.5, 0], [-0.5, 0, 0.5]])
    assert np.allclose(me[0], np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]) / 24)
    assert np.allclose(ke[0].sum(axis=1), 0.0)


@pytest.mark.parametrize("level", [1, 2, 3])
def test_square_mesh_counts(level):
    m = fem.mesh_domain(SQUARE, level)
    n = 2**level
    assert m.triangles.shape[0] == 2 * 4**level
    assert m.n_nodes == (n + 1) ** 2
    assert np.all(m.areas() > 0)
    assert m.areas().sum() == pytest.approx(math.pi**2)


def test_disk_mesh_structure():
    m = fem.mesh_domain(DISK, 3)
    assert m.triangles.shape[0] == 6 * 64
    assert np.all(m.areas() > 0)
    bnd = m.nodes[m.boundary]
    assert np.allclose(np.linalg.norm(bnd, axis=1), 1.0)
    # the fan around the centre closes up
    centre = np.flatnonzero(np.linalg.norm(m.nodes, axis=1) < 1e-14)[0]
    ang = m.angles()
    total = sum(ang[i, list(m.triangles[i]).index(centre)] for i in range(len(m.triangles)) if centre in m.triangles[i])
    assert total == pytest.approx(2 * math.pi)


def test_pair_mesh_components():
    m = fem.mesh_domain(PAIR, 2)
    assert set(np.unique(m.component)) == {0, 1}
    assert np.allclose(m.nodes[m.component == 1].mean(axis=0), [3.0, 0.0], atol=1e-12)
    with pytest.raises(fem.MeshError):
        fem.mesh_domain(geo.make_domain("ball3d"), 2)


def test_mesh_roundtrip(tmp_path):
    m = fem.mesh_domain(DISK, 2)
    path = tmp_path / "disk.mesh"
    fem.write_mesh(m, path)
    nodes, tris, bnd = fem.read_mesh(path)
    assert np.array_equal(nodes, m.nodes)
    assert np.array_equal(tris, m.triangles)
    assert np.array_equal(bnd, m.boundary)


def test_boundary_edges_are_counter_clockwise():
    m = fem.mesh_domain(SQUARE, 2)
    e = fem.boundary_edges(m)
    assert len(e) == 16
    p = m.nodes
    # shoelace over the oriented boundary gives the positive area
    area = 0.5 * np.sum(p[e[:, 0], 0] * p[e[:, 1], 1] - p[e[:, 1], 0] * p[e[:, 0], 1])
    assert area == pytest.approx(math.pi**2)


def test_dilation_scaling_of_matrices():
    m = fem.mesh_domain(DISK, 3)
    fam = geo.dilation([0, 0], 1.0, 2)
    k0, m0 = fem.assemble(m)
    k1, m1 = fem.assemble(m, fam, 0.1)
    assert abs(k1 - k0).max() < 1e-12
    assert abs(m1 - 1.21 * m0).max() < 1e-14


def test_inverted_elements_raise():
    m = fem.mesh_domain(SQUARE, 1)
    fam = geo.PerturbFamily("flip", 2, lambda t, x, c: x * np.array([1.0, -1.0]), lambda x, c: x, 10.0)
    with pytest.raises(fem.InvertedElementError):
        fem.assemble(m, fam, 1.0)


def test_lowest_eigs_against_arpack():
    m = fem.mesh_domain(SQUARE, 4)
    K, M = fem.assemble(m)
    res = fem.lowest_eigs(K, M, 6)
    ref = np.sort(spla.eigsh(K, 6, M, sigma=0.0)[0])
    assert np.allclose(res.values, ref, rtol=1e-10)
    assert np.allclose(fem.m_gram(res.vectors, M), np.eye(6), atol=1e-10)
    assert np.max(res.residuals) < 1e-8


def test_shifted_window():
    m = fem.mesh_domain(DISK, 4)
    K, M = fem.assemble(m)
    res = fem.lowest_eigs(K, M, 3, shift=5.0)
    lam = modes.disk_eigenspace(1, 1).eigenvalue
    assert np.allclose(res.values[1:], lam, rtol=1e-2)
    # C6 symmetry keeps the k = 1 pair exactly degenerate
    assert abs(res.values[2] - res.values[1]) < 1e-9 * lam
    with pytest.raises(fem.FactorizationError):
        fem.lowest_eigs(K, M, 2, shift=14.7)


def test_square_convergence_and_upper_bounds():
    exact = np.array([2, 5, 5, 8, 10, 10.0])
    errs = []
    for level in (3, 4, 5):
        K, M = fem.assemble(fem.mesh_domain(SQUARE, level))
        vals = fem.lowest_eigs(K, M, 6).values
        assert np.all(vals >= exact - 1e-12)
        errs.append(vals - exact)
    errs = np.array(errs)
    orders = np.log2(errs[:-1] / errs[1:])
    assert np.all(orders >= 1.9)
    # the (1,2)/(2,1) pair stays degenerate on the symmetric mesh
    assert abs(errs[-1][1] - errs[-1][2]) < 1e-9


@pytest.mark.parametrize("domain,count", [(DISK, 1), (SQUARE, 1)])
def test_rellich_flux(domain, count):
    m = fem.mesh_domain(domain, 5)
    K, M = fem.assemble(m)
    res = fem.lowest_eigs(K, M, count)
    u = fem.prolong(m, res.vectors[:, 0])
    flux = fem.rellich_flux(m, u, domain.center)
    assert flux / (2 * res.values[0]) == pytest.approx(1.0, rel=0.05)


def test_disk_convergence_order():
    from hadapencil import specfun

    exact = np.sort([specfun.bessel_zero(k, m).value ** 2 for k in range(4) for m in (1, 2)
                     for _ in range(1 if k == 0 else 2)])[:6]
    errs = []
    for level in (3, 4, 5):
        K, M = fem.assemble(fem.mesh_domain(DISK, level))
        errs.append(fem.lowest_eigs(K, M, 6).values - exact)
    errs = np.abs(np.array(errs))
    assert np.all(np.log2(errs[:-1] / errs[1:]) >= 1.9)
