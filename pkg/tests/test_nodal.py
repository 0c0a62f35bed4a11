import numpy as np
import pytest

from feec.mesh import generate
from feec.nodal import VectorLagrangeP1, l2_difference
from feec.spaces import FESpace, FormSampler


def test_dimensions_square():
    m = generate("square", 2)
    free = VectorLagrangeP1(m)
    assert free.dim == 2 * 9
    # 4 corners clamped, 4 edge-midside vertices keep one dof, 1 interior free
    tang = VectorLagrangeP1(m, constraint="tangential")
    assert tang.dim == 4 * 1 + 1 * 2
    norm = VectorLagrangeP1(m, constraint="normal")
    assert norm.dim == tang.dim


def test_rejects_1d_mesh():
    with pytest.raises(ValueError):
        VectorLagrangeP1(generate("interval", 4))


def test_rejects_bad_constraint():
    with pytest.raises(ValueError):
        VectorLagrangeP1(generate("square", 2), constraint="slip")


def test_tangential_constraint_on_boundary():
    m = generate("square", 4)
    sp_ = VectorLagrangeP1(m, constraint="tangential")
    x = np.ones(sp_.dim)
    full = sp_.expand(x)
    for e in m.boundary_facets():
        t = np.asarray(m.vertices[e[1]]) - np.asarray(m.vertices[e[0]])
        t = t / np.linalg.norm(t)
        for v in e:
            vec = full[2 * v : 2 * v + 2]
            assert abs(vec @ t) < 1e-12


def test_normal_constraint_on_boundary():
    m = generate("square", 4)
    sp_ = VectorLagrangeP1(m, constraint="normal")
    x = np.ones(sp_.dim)
    full = sp_.expand(x)
    for e in m.boundary_facets():
        t = np.asarray(m.vertices[e[1]]) - np.asarray(m.vertices[e[0]])
        t = t / np.linalg.norm(t)
        nrm = np.array([t[1], -t[0]])
        for v in e:
            vec = full[2 * v : 2 * v + 2]
            assert abs(vec @ nrm) < 1e-12


def test_curl_and_div_of_rigid_fields():
    m = generate("square", 3)
    sp_ = VectorLagrangeP1(m)
    const = np.tile([1.0, -2.0], len(m.vertices))
    K = sp_.curl_matrix()
    D = sp_.div_matrix()
    assert abs(K @ const).max() < 1e-12
    assert abs(D @ const).max() < 1e-12
    # x-hat scaled by y has curl -1, zero divergence
    shear = np.zeros(2 * len(m.vertices))
    for v, pt in enumerate(m.vertices):
        shear[2 * v] = pt[1]
    assert abs(D @ shear).max() < 1e-12
    assert shear @ (K @ shear) > 0


def test_mass_matrix_integrates_constants():
    m = generate("square", 3)
    sp_ = VectorLagrangeP1(m)
    const = np.tile([1.0, 0.0], len(m.vertices))
    area = const @ (sp_.mass_matrix() @ const)
    assert abs(area - 1.0) < 1e-12


def test_solve_vector_laplacian_finite_and_reduced():
    m = generate("square", 4)
    sp_ = VectorLagrangeP1(m, constraint="tangential")
    f = lambda p: np.column_stack([np.ones(len(p)), np.zeros(len(p))])
    full = sp_.solve_vector_laplacian(f)
    assert full.shape == (sp_.nfull,)
    assert np.all(np.isfinite(full))
    # the returned field satisfies the boundary constraint it was built with
    for e in m.boundary_facets():
        t = np.asarray(m.vertices[e[1]]) - np.asarray(m.vertices[e[0]])
        t = t / np.linalg.norm(t)
        for v in e:
            assert abs(full[2 * v : 2 * v + 2] @ t) < 1e-8


def test_values_on_cell_linear():
    m = generate("square", 2)
    sp_ = VectorLagrangeP1(m)
    coeffs = np.zeros(sp_.nfull)
    for v, pt in enumerate(m.vertices):
        coeffs[2 * v] = pt[0]
        coeffs[2 * v + 1] = 3 * pt[1]
    ref = np.array([[1 / 3, 1 / 3], [0.25, 0.5]])
    for ci in range(len(m.cells)):
        vals = sp_.values_on_cell(coeffs, ci, ref)
        cell = m.cells[ci]
        verts = np.array([m.vertices[v] for v in cell])
        pts = (
            verts[0][None, :] * (1 - ref.sum(axis=1))[:, None]
            + verts[1][None, :] * ref[:, 0:1]
            + verts[2][None, :] * ref[:, 1:2]
        )
        assert np.allclose(vals[:, 0], pts[:, 0], atol=1e-12)
        assert np.allclose(vals[:, 1], 3 * pts[:, 1], atol=1e-12)


def test_eigen_penalized_vs_constrained_counts():
    m = generate("square", 4)
    sp_ = VectorLagrangeP1(m, constraint="tangential")
    pen = sp_.eigenvalues_penalized(4)
    con = sp_.eigenvalues_constrained_curl(4)
    assert len(pen) == 4 and len(con) == 4
    assert np.all(np.diff(pen) > -1e-9)
    assert np.all(np.diff(con) > -1e-9)


def test_l2_difference_matched_fields():
    m = generate("square", 3)
    fe = FESpace(m, ("P", 1, 1))
    f = FormSampler(2, 1, lambda p: np.column_stack([p[:, 1], p[:, 0]]), degree=1)
    coeffs = fe.interpolate(f)
    nodal = VectorLagrangeP1(m)
    ncoef = np.zeros(nodal.nfull)
    for v, pt in enumerate(m.vertices):
        ncoef[2 * v] = pt[1]
        ncoef[2 * v + 1] = pt[0]
    assert l2_difference(fe, coeffs, nodal, ncoef) < 1e-10


def test_l2_difference_detects_mismatch():
    m = generate("square", 3)
    fe = FESpace(m, ("P", 1, 1))
    f = FormSampler(2, 1, lambda p: np.column_stack([p[:, 1], p[:, 0]]), degree=1)
    coeffs = fe.interpolate(f)
    nodal = VectorLagrangeP1(m)
    ncoef = np.zeros(nodal.nfull)
    assert l2_difference(fe, coeffs, nodal, ncoef) > 0.5
