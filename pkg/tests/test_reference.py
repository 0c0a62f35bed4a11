"""Reference elements: degree-of-freedom duality, dimensions, derivatives."""

from fractions import Fraction

import numpy as np
import pytest

from feec.polyforms import PolyForm, SpaceSpec, space_dimension
from feec.reference import (
    ReferenceElement,
    derivative_matrix,
    reference_element,
    whitney_form,
)

F = Fraction


def specs_upto(n_max, r_max):
    for n in range(1, n_max + 1):
        for r in range(1, r_max + 1):
            for k in range(n + 1):
                for fam in ("P", "P-"):
                    yield n, fam, r, k


def test_ndof_matches_dimension_low_order():
    for n, fam, r, k in specs_upto(2, 3):
        el = reference_element(n, fam, r, k)
        assert el.ndof == space_dimension(SpaceSpec(fam, r, k, n)), (n, fam, r, k)


def test_ndof_matches_dimension_3d_spot():
    for fam, r, k in (("P-", 1, 1), ("P-", 2, 1), ("P", 1, 2), ("P", 2, 1), ("P-", 2, 2)):
        el = reference_element(3, fam, r, k)
        assert el.ndof == space_dimension(SpaceSpec(fam, r, k, 3))


def test_dual_basis_identity():
    for n, fam, r, k in ((2, "P-", 1, 1), (2, "P", 2, 0), (2, "P", 1, 1), (3, "P-", 1, 2)):
        el = reference_element(n, fam, r, k)
        for i in range(el.ndof):
            for j in range(el.ndof):
                assert el.apply_dof(i, el.dual[j]) == F(i == j), (n, fam, r, k, i, j)


def test_degenerate_degree_rejected():
    with pytest.raises(ValueError):
        ReferenceElement(2, "P", 0, 1)
    # piecewise constants exist only at top degree
    el = reference_element(2, "P", 0, 2)
    assert el.ndof == 1


def test_whitney_hand_value():
    # edge (0,1) of the reference triangle: (1-y) dx + x dy
    w = whitney_form(2, (0, 1))
    want = {
        ((0, 0), (0,)): F(1),
        ((0, 1), (0,)): F(-1),
        ((1, 0), (1,)): F(1),
    }
    assert w.terms == want


def test_whitney_edge_integrals_are_kronecker():
    # the P1- edge element DOFs are exactly the edge integrals
    el = reference_element(2, "P-", 1, 1)
    edges = [(0, 1), (0, 2), (1, 2)]
    for i, e in enumerate(el.dofs):
        w = whitney_form(2, edges[i])
        for j in range(el.ndof):
            assert el.apply_dof(j, w) == F(i == j)


def test_whitney_tet_face_form():
    # kronecker up to the parametric face measure 1/2
    w = whitney_form(3, (0, 1, 2))
    assert w.k == 2
    el = reference_element(3, "P-", 1, 2)
    vals = [el.apply_dof(j, w) for j in range(el.ndof)]
    assert vals == [F(1, 2), F(0), F(0), F(0)]


def test_derivative_matrix_squares_to_zero():
    d0 = derivative_matrix(2, "P", 1, "P-", 1, 0)
    d1 = derivative_matrix(2, "P-", 1, "P", 0, 1)
    prod = [
        [sum(d1[i][k] * d0[k][j] for k in range(len(d0))) for j in range(len(d0[0]))]
        for i in range(len(d1))
    ]
    assert all(v == 0 for row in prod for v in row)


def test_derivative_matrix_reproduces_gradient():
    # d of the hat function at vertex 0 has edge integrals (-1, -1, 0)
    d0 = derivative_matrix(2, "P", 1, "P-", 1, 0)
    col = [d0[i][0] for i in range(3)]
    assert col == [F(-1), F(-1), F(0)]


def test_derivative_containment_enforced():
    with pytest.raises(ValueError):
        derivative_matrix(2, "P", 2, "P-", 1, 0)


def test_tabulation_matches_exact_evaluation():
    el = reference_element(2, "P", 2, 1)
    pts = np.array([[0.25, 0.25], [0.1, 0.6]])
    vals = el.tabulate(pts)
    assert vals.shape == (2, el.ndof, 2)
    for q, p in enumerate(pts):
        for j in range(el.ndof):
            alt = el.dual[j].evaluate([F(1, 4) if q == 0 else F(1, 10), F(1, 4) if q == 0 else F(3, 5)])
            vec = [float(alt.coeffs.get((c,), 0)) for c in range(2)]
            assert np.allclose(vals[q, j], vec, atol=1e-13)


def test_d_tabulation_matches_exact_derivative():
    el = reference_element(2, "P", 2, 0)
    pts = np.array([[0.3, 0.2]])
    dv = el.tabulate_d(pts)
    assert dv.shape == (1, el.ndof, 2)
    for j in range(el.ndof):
        d = el.dual[j].exterior_derivative()
        alt = d.evaluate([F(3, 10), F(1, 5)])
        vec = [float(alt.coeffs.get((c,), 0)) for c in range(2)]
        assert np.allclose(dv[0, j], vec, atol=1e-13)


def test_reconstruct_roundtrip():
    el = reference_element(2, "P-", 2, 1)
    w = el.dual[3]
    coeffs = [el.apply_dof(i, w) for i in range(el.ndof)]
    back = el.reconstruct(coeffs)
    assert (back - w).is_zero()
