"""Assembled spaces: dimensions, interpolation, continuity, projections."""

import numpy as np
import pytest

from feec.complexes import DiscreteComplex
from feec.mesh import cube, interval, refine_uniform, square
from feec.polyforms import PolyForm, SpaceSpec
from feec.spaces import FESpace, FormSampler, assemble_space


def test_global_dimensions_known_meshes():
    m = square(2)  # 9 vertices, 16 edges, 8 cells
    assert FESpace(m, ("P", 1, 0)).dim == 9
    assert FESpace(m, ("P-", 1, 1)).dim == 16
    assert FESpace(m, ("P", 0, 2)).dim == 8
    assert FESpace(m, ("P", 2, 0)).dim == 9 + 16
    assert FESpace(m, ("P", 1, 1)).dim == 2 * 16  # BDM-type: 2 per edge
    assert FESpace(m, ("P", 1, 2)).dim == 3 * 8
    assert FESpace(m, ("P-", 2, 1)).dim == 2 * 16 + 2 * 8


def test_global_dimensions_3d():
    m = cube(1)  # 8 vertices, 19 edges, 18 faces, 6 cells
    assert FESpace(m, ("P", 1, 0)).dim == 8
    assert FESpace(m, ("P-", 1, 1)).dim == 19
    assert FESpace(m, ("P-", 1, 2)).dim == 18
    assert FESpace(m, ("P", 0, 3)).dim == 6


def test_essential_bc_removes_boundary_blocks():
    m = square(2)
    full = FESpace(m, ("P", 1, 0))
    ess = FESpace(m, ("P", 1, 0), bc="essential")
    assert full.dim - ess.dim == 8  # boundary vertices
    e1 = FESpace(m, ("P-", 1, 1), bc="essential")
    assert e1.dim == 16 - 8  # boundary edges removed


def test_interpolation_reproduces_space_members(rng):
    m = square(2)
    for spec in (("P", 1, 0), ("P-", 1, 1), ("P", 1, 1), ("P", 2, 0)):
        sp = FESpace(m, spec)
        coeffs = rng.standard_normal(sp.dim)
        sampler = sp.as_sampler(coeffs)
        back = sp.interpolate(sampler)
        assert np.allclose(back, coeffs, atol=1e-10), spec


def test_interpolation_exact_for_polynomial_forms():
    m = square(3)
    sp = FESpace(m, ("P", 2, 1))

    def fn(p):
        x, y = p[:, 0], p[:, 1]
        return np.column_stack([x * y, x * x - 2 * y])

    s = FormSampler(2, 1, fn, degree=2)
    c = sp.interpolate(s)
    assert sp.l2_error(c, s) < 1e-12


def test_commuting_interpolation():
    # interpolate then differentiate equals differentiate then interpolate
    m = square(2)
    cx = DiscreteComplex(m, 2, (1,))

    def w_fn(p):
        x, y = p[:, 0], p[:, 1]
        return (x**2 * y + np.sin(x))[:, None]

    def dw_fn(p):
        x, y = p[:, 0], p[:, 1]
        return np.column_stack([2 * x * y + np.cos(x), x**2])

    w = FormSampler(2, 0, w_fn)
    dw = FormSampler(2, 1, dw_fn)
    i_w = cx.space(0).interpolate(w)
    i_dw = cx.space(1).interpolate(dw)
    D = cx.derivative(0)
    diff = D @ i_w - i_dw
    assert float(np.abs(diff).max()) < 1e-8


def test_single_valued_traces_across_interior_edges(rng):
    """Tangential traces agree from both sides of every interior edge."""
    m = square(2)
    sp = FESpace(m, ("P-", 2, 1))
    coeffs = rng.standard_normal(sp.dim)
    ts = np.linspace(0.12, 0.91, 4)
    for ei, edge in enumerate(m.faces(1)):
        cells = m.cells_containing(1, ei)
        if len(cells) != 2:
            continue
        va, vb = m.vertices[edge[0]], m.vertices[edge[1]]
        pts = va[None, :] + ts[:, None] * (vb - va)[None, :]
        tang = vb - va
        sides = []
        for ci in cells:
            B, off = m.cell_affine(ci)
            ref = np.linalg.solve(B, (pts - off).T).T
            vals = sp.evaluate(coeffs, ci, ref)
            sides.append(vals @ tang)
        assert np.allclose(sides[0], sides[1], atol=1e-10)


def test_scalar_continuity_across_edges(rng):
    m = square(2)
    sp = FESpace(m, ("P", 3, 0))
    coeffs = rng.standard_normal(sp.dim)
    for ei, edge in enumerate(m.faces(1)):
        cells = m.cells_containing(1, ei)
        if len(cells) != 2:
            continue
        va, vb = m.vertices[edge[0]], m.vertices[edge[1]]
        pts = va[None, :] + np.linspace(0.2, 0.8, 3)[:, None] * (vb - va)[None, :]
        vals = []
        for ci in cells:
            B, off = m.cell_affine(ci)
            ref = np.linalg.solve(B, (pts - off).T).T
            vals.append(sp.evaluate(coeffs, ci, ref)[:, 0])
        assert np.allclose(vals[0], vals[1], atol=1e-10)


def test_mass_matrix_spd(rng):
    m = square(2)
    for spec in (("P", 1, 0), ("P-", 1, 1), ("P", 0, 2)):
        M = FESpace(m, spec).mass_matrix()
        Md = M.toarray() if hasattr(M, "toarray") else np.asarray(M)
        assert np.allclose(Md, Md.T, atol=1e-14)
        vals = np.linalg.eigvalsh(Md)
        assert vals.min() > 0


def test_mass_with_coefficient_scales():
    m = square(2)
    sp = FESpace(m, ("P", 1, 0))
    M1 = sp.mass_matrix()
    M2 = sp.mass_matrix(coeff=lambda p: 2.0 * np.ones((len(p), 1, 1)))
    a = M1.toarray() if hasattr(M1, "toarray") else M1
    b = M2.toarray() if hasattr(M2, "toarray") else M2
    assert np.allclose(2 * a, b, atol=1e-13)


def test_evaluate_at_points_matches_cellwise(rng):
    m = square(3)
    sp = FESpace(m, ("P", 1, 1))
    coeffs = rng.standard_normal(sp.dim)
    pts = rng.random((40, 2)) * 0.98 + 0.01
    vals = sp.evaluate_at_points(coeffs, pts)
    assert vals.shape == (40, 2)
    sampler = sp.as_sampler(coeffs)
    again = sampler.fn(pts)
    assert np.allclose(vals, again)


def test_locate_outside_raises():
    m = square(2)
    sp = FESpace(m, ("P", 1, 0))
    with pytest.raises(ValueError):
        sp.locate(np.array([[2.5, 0.5]]))


def test_load_vector_against_quadrature():
    m = interval(4)
    sp = FESpace(m, ("P", 1, 0))
    s = FormSampler(1, 0, lambda p: np.ones((len(p), 1)), degree=0)
    F = sp.load_vector(s)
    # hat loads: h/2 at ends, h at interior, h = 1/2
    h = 0.5
    bverts = {0, len(m.vertices) - 1}
    for vi in range(sp.dim):
        want = h / 2 if vi in bverts else h
        assert abs(F[vi] - want) < 1e-14


def test_clement_bounded_and_converging():
    def fn(p):
        return np.sin(np.pi * p[:, 0])[:, None] * np.cos(p[:, 1])[:, None]

    s = FormSampler(2, 0, fn)
    errs = []
    m = square(2)
    for _ in range(3):
        sp = FESpace(m, ("P", 1, 0))
        c = sp.clement_interpolate(s)
        errs.append(sp.l2_error(c, s))
        m = refine_uniform(m)
    assert errs[2] < errs[0]
    assert errs[2] < 0.05


def test_dof_table_text_format():
    m = square(1)
    sp = FESpace(m, ("P-", 1, 1))
    lines = sp.dof_table_text().strip().splitlines()
    assert len(lines) == sp.dim
    d, fi, w = lines[0].split()
    assert int(d) == 1 and int(w) == 0


def test_assemble_space_helper():
    m = square(2)
    sp = assemble_space(m, ("P-", 1, 1))
    assert isinstance(sp, FESpace)
    assert sp.dim == 16


def test_check_dimension_formula():
    from feec.spaces import check_dimension_formula

    for bc in ("natural", "essential"):
        check_dimension_formula(FESpace(square(2), ("P-", 2, 1), bc=bc))
