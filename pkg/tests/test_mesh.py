import math

import numpy as np
import pytest

from feec.mesh import (
    SimplicialMesh,
    annulus,
    cube,
    generate,
    interval,
    lshape,
    perturb,
    refine_uniform,
    square,
    square_crisscross,
)


def total_volume(mesh):
    return sum(mesh.cell_volume(ci) for ci in range(len(mesh.cells)))


def test_interval_counts():
    m = interval(4)
    assert len(m.vertices) == 5
    assert len(m.cells) == 4
    assert m.euler_characteristic() == 1
    assert abs(total_volume(m) - 2.0) < 1e-14  # (-1, 1)


def test_square_counts_and_volume():
    m = square(2)
    assert (len(m.vertices), m.num_faces(1), len(m.cells)) == (9, 16, 8)
    assert m.euler_characteristic() == 1
    assert abs(total_volume(m) - 1.0) < 1e-14
    assert len(m.boundary_facets()) == 8


def test_cube_counts_and_volume():
    m = cube(1)
    assert len(m.vertices) == 8
    assert len(m.cells) == 6  # Kuhn subdivision
    assert m.euler_characteristic() == 1
    assert abs(total_volume(m) - 1.0) < 1e-14
    assert len(m.boundary_facets()) == 12


def test_lshape_topology():
    m = lshape(1)
    assert m.euler_characteristic() == 1
    assert abs(total_volume(m) - 3.0) < 1e-14  # three unit quadrants
    # reentrant corner at the origin
    assert any(np.allclose(v, [0.0, 0.0]) for v in m.vertices)


def test_annulus_topology():
    m = annulus(2)
    # Euler characteristic 0 for an annulus
    assert m.euler_characteristic() == 0
    assert len(m.boundary_facets()) > 0


def test_crisscross_counts():
    m = square_crisscross(2)
    # each of the 4 subsquares splits into 4 around its center
    assert len(m.cells) == 16
    assert abs(total_volume(m) - 1.0) < 1e-14


def test_refine_preserves_volume_and_boundary():
    for mk in (interval(3), square(2), lshape(1), cube(1), annulus(1)):
        fine = refine_uniform(mk)
        assert len(fine.cells) == len(mk.cells) * 2**mk.n
        assert abs(total_volume(fine) - total_volume(mk)) < 1e-12
        assert fine.h() < mk.h()


def test_faces_sorted_and_unique():
    m = square(2)
    for d in range(3):
        faces = m.faces(d)
        assert all(tuple(sorted(f)) == f for f in faces)
        assert len(set(faces)) == len(faces)


def to_dense_incidence(mesh, d):
    out = np.zeros((mesh.num_faces(d - 1), mesh.num_faces(d)), dtype=int)
    for row, col, val in mesh.incidence_matrix(d):
        out[row, col] += val
    return out


def test_incidence_squares_to_zero():
    m = cube(1)
    for d in range(1, m.n):
        lower = to_dense_incidence(m, d)
        upper = to_dense_incidence(m, d + 1)
        assert np.abs(lower @ upper).max() == 0


def test_cells_containing():
    m = square(2)
    for vi in range(len(m.vertices)):
        cells = m.cells_containing(0, vi)
        assert cells
        for ci in cells:
            assert vi in m.cells[ci]


def test_affine_map_consistency():
    m = square(3)
    for ci in (0, 5):
        B, off = m.cell_affine(ci)
        verts = [m.vertices[v] for v in m.cells[ci]]
        assert np.allclose(off, verts[0])
        for j in range(m.n):
            assert np.allclose(off + B[:, j], verts[j + 1])
        assert m.cell_det(ci) != 0
        assert abs(m.cell_volume(ci) - abs(m.cell_det(ci)) / 2) < 1e-15


def test_text_roundtrip(tmp_path):
    m = lshape(1)
    p = tmp_path / "mesh.txt"
    m.save(p)
    back = SimplicialMesh.load(p)
    assert back.n == m.n
    assert np.allclose(back.vertices, m.vertices)
    assert back.cells == m.cells


def test_perturb_keeps_boundary_and_topology():
    m = square(4)
    p = perturb(m, seed=1)
    assert p.cells == m.cells
    moved = np.abs(np.asarray(p.vertices) - np.asarray(m.vertices)).max()
    assert moved > 0
    bverts = set()
    for f in m.boundary_facets():
        bverts.update(f)
    for vi in bverts:
        assert np.allclose(p.vertices[vi], m.vertices[vi])
    # interior cells stay positively oriented
    for ci in range(len(p.cells)):
        assert p.cell_volume(ci) > 0


def test_generate_dispatch():
    assert generate("interval", 3).n == 1
    assert generate("square", 2).n == 2
    assert generate("cube", 1).n == 3
    with pytest.raises((KeyError, ValueError)):
        generate("dodecahedron", 1)


def test_shape_constant_reasonable():
    m = square(4)
    assert 1.0 <= m.shape_constant() < 10.0


def test_validation_rejects_bad_cells():
    with pytest.raises(ValueError):
        SimplicialMesh(1, [[0.0], [1.0]], [(0, 0)])
