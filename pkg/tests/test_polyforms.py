"""The polynomial form algebra: derivatives, contraction, the two families.

Dimension assertions use the closed-form binomial counts recomputed inline
as an independent oracle, so a drift in space_dimension cannot hide.
"""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feec.altforms import increasing_tuples
from feec.polyforms import (
    PolyForm,
    SpaceSpec,
    all_sequences,
    basis_for,
    build_sequence,
    coefficient_vector,
    full_basis,
    homogeneous_dimension,
    homotopy_residual,
    koszul_range_dimension,
    membership_reduced,
    space_dimension,
)
from feec.rational import rank

F = Fraction
C = math.comb


def random_homogeneous(rnd, n, r, k):
    terms = {}
    from feec.polyforms import monomial_exponents

    for alpha in monomial_exponents(n, r, homogeneous=True):
        for sigma in increasing_tuples(n, k):
            v = rnd.randint(-3, 3)
            if v:
                terms[(alpha, sigma)] = F(v)
    return PolyForm(n, k, terms)


def test_exterior_derivative_hand_value():
    # d(x y^2 dx) = 2 x y dy ^ dx = -2 x y dx ^ dy
    p = PolyForm.monomial(2, (1, 2), (0,))
    d = p.exterior_derivative()
    assert d.terms == {((1, 1), (0, 1)): F(-2)}


def test_exterior_derivative_top_degree_raises():
    vol = PolyForm.monomial(2, (0, 0), (0, 1))
    with pytest.raises(ValueError):
        vol.exterior_derivative()


def test_koszul_hand_value():
    # contraction of dx^dy with x d/dx + y d/dy = x dy - y dx
    w = PolyForm.monomial(2, (0, 0), (0, 1))
    k = w.koszul()
    assert k.terms == {((1, 0), (1,)): F(1), ((0, 1), (0,)): F(-1)}


def test_koszul_base_point_shift():
    w = PolyForm.monomial(2, (0, 0), (0,))
    k = w.koszul(base_point=(F(1), F(0)))
    # (x - 1) replaces x
    assert k.terms == {((1, 0), ()): F(1), ((0, 0), ()): F(-1)}


def test_koszul_squares_to_zero():
    rnd = random.Random(5)
    for _ in range(20):
        n = rnd.choice([2, 3])
        k = rnd.randint(2, n)
        w = random_homogeneous(rnd, n, rnd.randint(0, 3), k)
        assert w.koszul().koszul().is_zero()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_d_squared_zero(seed):
    rnd = random.Random(seed)
    n = rnd.choice([1, 2, 3])
    k = rnd.randint(0, n - 1) if n > 1 else 0
    if k + 2 > n:
        k = max(0, n - 2)
    w = random_homogeneous(rnd, n, rnd.randint(1, 3), k)
    if k + 2 <= n:
        assert w.exterior_derivative().exterior_derivative().is_zero()


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_homotopy_identity_exact(seed):
    """(d koszul + koszul d) acts as multiplication by r + k, exactly."""
    rnd = random.Random(seed)
    n = rnd.choice([1, 2, 3])
    k = rnd.randint(0, n)
    r = rnd.randint(0, 4)
    if r == 0 and k == 0:
        r = 1
    w = random_homogeneous(rnd, n, r, k)
    assert homotopy_residual(w).is_zero()


def test_dimension_formula_full_family():
    for n in (1, 2, 3):
        for r in range(1, 5):
            for k in range(n + 1):
                want = C(n + r, n) * C(n, k)
                assert space_dimension(SpaceSpec("P", r, k, n)) == want


def test_dimension_formula_reduced_family():
    for n in (1, 2, 3):
        for r in range(1, 5):
            for k in range(n + 1):
                want = C(r + k - 1, k) * C(n + r, n - k)
                assert space_dimension(SpaceSpec("P-", r, k, n)) == want


def test_homogeneous_and_koszul_range_dimensions():
    for n in (2, 3):
        for r in range(0, 4):
            assert homogeneous_dimension(n, r, 0) == C(n + r - 1, n - 1)
            for k in range(1, n + 1):
                want = C(n + r, n - k) * C(r + k - 1, k - 1)
                assert koszul_range_dimension(r, k, n) == want


def test_basis_ranks_match_dimensions():
    for n in (1, 2):
        for r in (1, 2, 3):
            for k in range(n + 1):
                for fam in ("P", "P-"):
                    spec = SpaceSpec(fam, r, k, n)
                    basis = basis_for(spec)
                    assert len(basis) == space_dimension(spec)
                    keys = None
                    from feec.polyforms import _coeff_keys

                    keys = _coeff_keys(n, r, k)
                    mat = [coefficient_vector(w, keys) for w in basis]
                    assert rank(mat) == len(basis)


def test_reduced_between_full_degrees():
    # P_{r-1} subset P_r^- subset P_r, via membership of basis elements
    n, k, r = 2, 1, 2
    for w in full_basis(n, r - 1, k):
        assert membership_reduced(w, r)
    lower = {True: 0, False: 0}
    for w in full_basis(n, r, k):
        lower[membership_reduced(w, r)] += 1
    assert lower[False] > 0  # the reduced space is proper


def test_canonical_coincidences():
    assert SpaceSpec("P-", 2, 0, 2).canonical() == SpaceSpec("P", 2, 0, 2)
    assert SpaceSpec("P-", 2, 2, 2).canonical() == SpaceSpec("P", 1, 2, 2)
    assert space_dimension(SpaceSpec("P-", 3, 0, 3)) == space_dimension(
        SpaceSpec("P", 3, 0, 3)
    )
    assert space_dimension(SpaceSpec("P-", 3, 3, 3)) == space_dimension(
        SpaceSpec("P", 2, 3, 3)
    )


def test_build_sequence_patterns():
    chain = build_sequence(2, 2, (1,))
    assert [s.label() for s in chain] == ["P2L0", "P2-L1", "P1L2"]
    chain = build_sequence(2, 2, (0,))
    assert [s.label() for s in chain] == ["P2L0", "P1L1", "P0L2"]
    chain = build_sequence(3, 1, (1, 1))
    assert [s.label() for s in chain] == ["P1L0", "P1-L1", "P1-L2", "P0L3"]
    with pytest.raises(ValueError):
        build_sequence(2, 1, (0,))  # would need P0 1-forms
    with pytest.raises(ValueError):
        build_sequence(2, 2, (1, 1))  # wrong pattern length


def test_all_sequences_counts():
    assert len(all_sequences(1, 1)) == 1
    assert len(all_sequences(2, 1)) == 1  # only the reduced choice survives
    assert len(all_sequences(2, 2)) == 2
    assert len(all_sequences(3, 1)) == 1
    assert len(all_sequences(3, 3)) == 4


def test_pullback_composes_with_evaluation():
    rnd = random.Random(11)
    w = random_homogeneous(rnd, 2, 2, 1)
    mat = [[F(2), F(1)], [F(0), F(1)]]
    off = [F(1), F(-1)]
    pulled = w.pullback_affine(mat, off)
    y = [F(1, 3), F(1, 2)]
    x = [off[i] + sum(mat[i][j] * y[j] for j in range(2)) for i in range(2)]
    val_pulled = pulled.evaluate(y)
    val_orig = w.evaluate(x)
    # compare by applying to pushed-forward edge vectors
    for vec in ([F(1), F(0)], [F(0), F(1)], [F(2), F(-3)]):
        push = [sum(mat[i][j] * vec[j] for j in range(2)) for i in range(2)]
        assert val_pulled.apply([vec]) == val_orig.apply([push])


def test_sequence_exactness_of_derivative_inclusion():
    # d maps each chain space into the next: verified via membership of d(basis)
    for pattern, chain in all_sequences(2, 2):
        for a, b in zip(chain, chain[1:]):
            for w in basis_for(a):
                if a.k == 2:
                    continue
                dw = w.exterior_derivative()
                target = basis_for(b)
                keys = None
                from feec.polyforms import _coeff_keys

                canon = b.canonical()
                keys = _coeff_keys(b.n, canon.r, b.k + 0)
                mat = [coefficient_vector(t, keys) for t in target]
                vec = coefficient_vector(dw, keys)
                assert rank(mat + [vec]) == rank(mat), (pattern, a.label(), b.label())
