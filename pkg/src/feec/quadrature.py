"""Quadrature on the reference simplex.

Conical product rules: the unit simplex is the image of the unit cube under
the collapsing map x_i = t_i * prod_{j<i}(1 - t_j), whose Jacobian factors
into one-dimensional Jacobi weights (1-t)^(n-j).  A rule with m points per
direction integrates polynomials of total degree 2m-1 exactly, so every rule
here carries the degree it was built for and callers can demand exactness.

simplex_monomial_integral gives the closed-form rational value of a monomial
integral over the reference simplex; the tests use it as the independent
oracle for the floating point rules.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@lru_cache(maxsize=None)
def simplex_rule(n, degree):
    """Points (m, n) and weights (m,) exact for total degree <= degree.

    Reference simplex: x_i >= 0, sum x_i <= 1 (vertices 0, e_1, ..., e_n).
    Weights sum to 1/n!.
    """
    if n < 0:
        raise ValueError("negative dimension")
    if n == 0:
        return np.zeros((1, 0)), np.ones(1)
    m = max(degree, 0) // 2 + 1
    nodes, wts = [], []
    for j in range(1, n + 1):
        a = n - j
        x, w = roots_jacobi(m, a, 0.0)
        nodes.append(0.5 * (x + 1.0))
        wts.append(w * 0.5 ** (a + 1))
    count = m**n
    points = np.empty((count, n))
    weights = np.empty(count)
    for idx, combo in enumerate(itertools.product(range(m), repeat=n)):
        acc = 1.0
        w = 1.0
        for j in range(n):
            t = nodes[j][combo[j]]
            points[idx, j] = t * acc
            acc *= 1.0 - t
            w *= wts[j][combo[j]]
        weights[idx] = w
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


def simplex_monomial_integral(alpha):
    """Exact integral of prod x_i^alpha_i over the reference simplex in R^n.

    Closed form (prod alpha_i!) / (|alpha| + n)! with n = len(alpha).
    """
    alpha = tuple(alpha)
    if any(a < 0 for a in alpha):
        raise ValueError("negative exponent")
    n = len(alpha)
    num = 1
    for a in alpha:
        num *= math.factorial(a)
    return Fraction(num, math.factorial(sum(alpha) + n))


def barycentric_monomial_integral(exponents, d):
    """Exact integral over a d-simplex of unit volume of a barycentric monomial.

    ``exponents`` lists the powers of all d+1 barycentric coordinates.  The
    value is normalized to a simplex of volume 1; multiply by the measure of
    the actual simplex.
    """
    exponents = tuple(exponents)
    if len(exponents) != d + 1:
        raise ValueError("need one exponent per barycentric coordinate")
    num = math.factorial(d)
    for a in exponents:
        num *= math.factorial(a)
    return Fraction(num, math.factorial(sum(exponents) + d))
