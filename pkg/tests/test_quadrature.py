"""Quadrature exactness against the closed-form monomial integrals.

The oracle: over the unit simplex, the integral of x^alpha equals
alpha! / (|alpha| + n)!, a factorial identity independent of the rule.
"""

import math
from fractions import Fraction
from itertools import product

import numpy as np

from feec.quadrature import (
    barycentric_monomial_integral,
    simplex_monomial_integral,
    simplex_rule,
)


def oracle_integral(alpha):
    n = len(alpha)
    num = 1
    for a in alpha:
        num *= math.factorial(a)
    return Fraction(num, math.factorial(sum(alpha) + n))


def test_monomial_integral_closed_form():
    for n in (1, 2, 3):
        for alpha in product(range(4), repeat=n):
            assert simplex_monomial_integral(alpha) == oracle_integral(alpha)


def test_barycentric_integral_closed_form():
    # volume-normalized: int of lambda^beta = beta! d! / (|beta| + d)!
    for d in (1, 2, 3):
        for beta in product(range(3), repeat=d + 1):
            num = math.factorial(d)
            for b in beta:
                num *= math.factorial(b)
            want = Fraction(num, math.factorial(sum(beta) + d))
            assert barycentric_monomial_integral(beta, d) == want


def test_rule_weights_sum_to_volume():
    for n in (1, 2, 3):
        for deg in (1, 3, 5, 8):
            pts, wts = simplex_rule(n, deg)
            assert abs(wts.sum() - 1.0 / math.factorial(n)) < 1e-14
            assert pts.shape[1] == n
            assert np.all(pts >= -1e-14)
            assert np.all(pts.sum(axis=1) <= 1 + 1e-14)


def test_rule_exactness_to_degree():
    for n in (1, 2, 3):
        for deg in range(1, 9):
            pts, wts = simplex_rule(n, deg)
            for alpha in product(range(deg + 1), repeat=n):
                if sum(alpha) > deg:
                    continue
                approx = float(wts @ np.prod(pts ** np.array(alpha), axis=1))
                exact = float(oracle_integral(alpha))
                assert abs(approx - exact) < 5e-14, (n, deg, alpha)
