from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feec.altforms import AltForm, hodge_star, increasing_tuples, sort_tuple_sign

F = Fraction


def test_sort_tuple_sign():
    assert sort_tuple_sign((0, 1)) == ((0, 1), 1)
    assert sort_tuple_sign((1, 0)) == ((0, 1), -1)
    assert sort_tuple_sign((2, 0, 1)) == ((0, 1, 2), 1)
    assert sort_tuple_sign((1, 1)) == ((1, 1), 0)


def test_increasing_tuples_counts():
    # C(n, k) tuples in lexicographic order
    assert increasing_tuples(3, 2) == [(0, 1), (0, 2), (1, 2)]
    assert len(increasing_tuples(4, 2)) == 6
    assert increasing_tuples(2, 0) == [()]


def test_wedge_hand_value():
    dx = AltForm.basis(3, 1, (0,))
    dy = AltForm.basis(3, 1, (1,))
    w = dx.wedge(dy)
    assert w.coeffs == {(0, 1): F(1)}
    assert dy.wedge(dx).coeffs == {(0, 1): F(-1)}


def test_wedge_degree_overflow():
    a = AltForm.basis(2, 1, (0,))
    b = AltForm.basis(2, 2, (0, 1))
    with pytest.raises(ValueError):
        a.wedge(b)


def test_star_hand_values():
    # in R^2: *dx = dy, *dy = -dx, *1 = dx^dy
    dx = AltForm.basis(2, 1, (0,))
    dy = AltForm.basis(2, 1, (1,))
    assert dx.star() == dy
    assert dy.star() == dx.scale(F(-1))
    one = AltForm(2, 0, {(): F(1)})
    assert one.star() == AltForm.volume(2)


def test_star_involution_sign():
    # ** = (-1)^{k(n-k)} on k-forms in R^n
    for n in (1, 2, 3):
        for k in range(n + 1):
            for sigma in increasing_tuples(n, k):
                a = AltForm.basis(n, k, sigma)
                twice = a.star().star()
                sign = (-1) ** (k * (n - k))
                assert twice == a.scale(F(sign))


def test_inner_orthonormal_basis():
    forms = [AltForm.basis(3, 2, s) for s in increasing_tuples(3, 2)]
    for i, a in enumerate(forms):
        for j, b in enumerate(forms):
            assert a.inner(b) == F(1 if i == j else 0)


def test_apply_vectors():
    # dx^dy applied to (e1, e2) = 1, to (e2, e1) = -1
    w = AltForm.basis(2, 2, (0, 1))
    e1, e2 = [F(1), F(0)], [F(0), F(1)]
    assert w.apply([e1, e2]) == F(1)
    assert w.apply([e2, e1]) == F(-1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_wedge_anticommutes(seed):
    import random

    r = random.Random(seed)
    n = r.choice([2, 3])
    j = r.randint(0, n)
    k = r.randint(0, n - j)
    a = AltForm(n, j, {s: F(r.randint(-3, 3)) for s in increasing_tuples(n, j)})
    b = AltForm(n, k, {s: F(r.randint(-3, 3)) for s in increasing_tuples(n, k)})
    sign = (-1) ** (j * k)
    assert a.wedge(b) == b.wedge(a).scale(F(sign))


def test_inner_matches_star_wedge():
    # <a, b> vol = a ^ *b
    a = AltForm(3, 1, {(0,): F(2), (2,): F(-1)})
    b = AltForm(3, 1, {(0,): F(1), (1,): F(3)})
    lhs = AltForm.volume(3).scale(a.inner(b))
    assert a.wedge(hodge_star(b)) == lhs
