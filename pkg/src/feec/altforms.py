r"""Alternating multilinear forms on R^n with exact rational coefficients.

A constant k-form is stored as a map from strictly increasing index tuples
sigma = (s_1 < ... < s_k), 0-based subsets of {0, ..., n-1}, to rational
coefficients.  The basis {dx_sigma} is orthonormal for the inner product
induced by the Euclidean one, so the inner product of two forms is the dot
product of their coefficient maps, and the Hodge star is determined by

    omega ^ mu = <star omega, mu> vol,   vol = dx_0 ^ ... ^ dx_{n-1}.

All operations are exact; float views are derived on demand.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def sort_tuple_sign(indices):
    """Sort an index tuple, returning (sorted tuple, permutation sign).

    Sign is 0 when an index repeats.  Insertion sort keeps it exact for the
    short tuples that occur here (length <= n <= 3 in practice).
    """
    idx = list(indices)
    sign = 1
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return tuple(idx), 0
    return tuple(idx), sign


def increasing_tuples(n, k):
    """All strictly increasing k-tuples from {0, ..., n-1}, lexicographic."""
    return list(itertools.combinations(range(n), k))


class AltForm:
    """A constant alternating k-form on R^n."""

    __slots__ = ("n", "k", "coeffs")

    def __init__(self, n, k, coeffs=None):
        if not 0 <= k <= n:
            raise ValueError(f"form degree {k} out of range for n={n}")
        self.n = n
        self.k = k
        data = {}
        if coeffs:
            for sigma, c in coeffs.items():
                c = Fraction(c)
                if c == 0:
                    continue
                tup, sign = sort_tuple_sign(tuple(sigma))
                if sign == 0:
                    continue
                if len(tup) != k or any(not 0 <= i < n for i in tup):
                    raise ValueError(f"bad index tuple {sigma} for Alt^{k}(R^{n})")
                data[tup] = data.get(tup, Fraction(0)) + sign * c
                if data[tup] == 0:
                    del data[tup]
        self.coeffs = data

    @classmethod
    def basis(cls, n, k, sigma):
        return cls(n, k, {tuple(sigma): Fraction(1)})

    @classmethod
    def zero(cls, n, k):
        return cls(n, k)

    @classmethod
    def volume(cls, n):
        return cls.basis(n, n, tuple(range(n)))

    def __eq__(self, other):
        return (
            isinstance(other, AltForm)
            and self.n == other.n
            and self.k == other.k
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.n, self.k, tuple(sorted(self.coeffs.items()))))

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        self._check_like(other)
        out = dict(self.coeffs)
        for sigma, c in other.coeffs.items():
            out[sigma] = out.get(sigma, Fraction(0)) + c
        return AltForm(self.n, self.k, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return AltForm(self.n, self.k, {s: -c for s, c in self.coeffs.items()})

    def scale(self, a):
        a = Fraction(a)
        return AltForm(self.n, self.k, {s: a * c for s, c in self.coeffs.items()})

    __mul__ = scale
    __rmul__ = scale

    def _check_like(self, other, same_degree=True):
        if not isinstance(other, AltForm) or other.n != self.n:
            raise ValueError("ambient dimension mismatch")
        if same_degree and other.k != self.k:
            raise ValueError("form degree mismatch")

    def wedge(self, other):
        self._check_like(other, same_degree=False)
        k = self.k + other.k
        if k > self.n:
            raise ValueError(
                f"wedge degree {self.k}+{other.k} exceeds ambient dimension {self.n}"
            )
        out = {}
        for sa, ca in self.coeffs.items():
            for sb, cb in other.coeffs.items():
                tup, sign = sort_tuple_sign(sa + sb)
                if sign == 0:
                    continue
                out[tup] = out.get(tup, Fraction(0)) + sign * ca * cb
        return AltForm(self.n, k, out)

    def __xor__(self, other):
        return self.wedge(other)

    def inner(self, other):
        """Euclidean inner product; the increasing basis tuples are orthonormal."""
        self._check_like(other)
        total = Fraction(0)
        for sigma, c in self.coeffs.items():
            oc = other.coeffs.get(sigma)
            if oc is not None:
                total += c * oc
        return total

    def star(self):
        """Hodge star determined by omega ^ mu = <star omega, mu> vol."""
        n = self.n
        out = {}
        full = range(n)
        for sigma, c in self.coeffs.items():
            comp = tuple(i for i in full if i not in sigma)
            _, sign = sort_tuple_sign(sigma + comp)
            out[comp] = sign * c
        return AltForm(n, n - self.k, out)

    def apply(self, vectors):
        """Evaluate on k vectors (sequences of rationals), exactly."""
        if len(vectors) != self.k:
            raise ValueError(f"expected {self.k} vectors")
        vecs = [[Fraction(x) for x in v] for v in vectors]
        total = Fraction(0)
        for sigma, c in self.coeffs.items():
            # det of the k x k submatrix with rows sigma
            det = Fraction(0)
            for perm in itertools.permutations(range(self.k)):
                _, sign = sort_tuple_sign(perm)
                if sign == 0:
                    continue
                prod = Fraction(1)
                for row, col in enumerate(perm):
                    prod *= vecs[col][sigma[row]]
                det += sign * prod
            total += c * det
        return total

    def coefficient_vector(self):
        """Coefficients on the lexicographic increasing-tuple basis."""
        return [self.coeffs.get(s, Fraction(0)) for s in increasing_tuples(self.n, self.k)]

    def __repr__(self):
        if not self.coeffs:
            return f"AltForm({self.n}, {self.k}, 0)"
        parts = []
        for sigma in sorted(self.coeffs):
            c = self.coeffs[sigma]
            name = "1" if not sigma else "dx" + "^dx".join(str(i) for i in sigma)
            parts.append(f"{c}*{name}")
        return " + ".join(parts)


def wedge(a, b):
    return a.wedge(b)


def alt_inner(a, b):
    return a.inner(b)


def hodge_star(a):
    return a.star()
