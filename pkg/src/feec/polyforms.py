r"""Polynomial differential forms on R^n and the operators d and kappa.

A PolyForm is a finite sum  sum_{alpha, sigma} c_{alpha,sigma} x^alpha dx_sigma
with exact rational coefficients, monomial exponent vectors alpha in N^n, and
strictly increasing index tuples sigma.  On top of the representation this
module provides:

* the exterior derivative d and the contraction kappa with the position field
  anchored at a chosen base point,
* monomial bases for the full and homogeneous polynomial form spaces and a
  spanning construction for the reduced family,
* the closed-form dimension counts and their rank cross-checks,
* the chains of spaces P_r Lambda^0 -> ... -> Lambda^n obtainable by choosing,
  at each degree, either the reduced space or the full space of one lower
  polynomial degree.

Everything is exact: coefficients are fractions.Fraction throughout and the
float view is only taken by downstream assembly code.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .altforms import AltForm, increasing_tuples, sort_tuple_sign
from . import rational


def _binom(a, b):
    if b < 0 or a < 0 or b > a:
        return 0
    return math.comb(a, b)


def monomial_exponents(n, r, homogeneous=False):
    """Exponent vectors alpha in N^n with |alpha| == r (or <= r)."""
    degrees = [r] if homogeneous else range(r + 1)
    out = []
    for total in degrees:
        for alpha in itertools.product(range(total + 1), repeat=n):
            if sum(alpha) == total:
                out.append(alpha)
    return out


class PolyForm:
    """Polynomial differential k-form on R^n with rational coefficients."""

    __slots__ = ("n", "k", "terms")

    def __init__(self, n, k, terms=None):
        if not 0 <= k <= n:
            raise ValueError(f"form degree {k} out of range for n={n}")
        self.n = n
        self.k = k
        data = {}
        if terms:
            for (alpha, sigma), c in terms.items():
                c = Fraction(c)
                if c == 0:
                    continue
                alpha = tuple(alpha)
                if len(alpha) != n or any(a < 0 for a in alpha):
                    raise ValueError(f"bad exponent vector {alpha}")
                tup, sign = sort_tuple_sign(tuple(sigma))
                if sign == 0:
                    continue
                if len(tup) != k or any(not 0 <= i < n for i in tup):
                    raise ValueError(f"bad index tuple {sigma}")
                key = (alpha, tup)
                data[key] = data.get(key, Fraction(0)) + sign * c
                if data[key] == 0:
                    del data[key]
        self.terms = data

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, n, k):
        return cls(n, k)

    @classmethod
    def monomial(cls, n, alpha, sigma, coeff=1):
        return cls(n, len(tuple(sigma)), {(tuple(alpha), tuple(sigma)): Fraction(coeff)})

    @classmethod
    def constant(cls, n, value):
        return cls(n, 0, {((0,) * n, ()): Fraction(value)})

    @classmethod
    def coordinate(cls, n, i):
        alpha = tuple(1 if j == i else 0 for j in range(n))
        return cls(n, 0, {(alpha, ()): Fraction(1)})

    @classmethod
    def from_alt(cls, alt):
        return cls(alt.n, alt.k, {((0,) * alt.n, s): c for s, c in alt.coeffs.items()})

    # ---- ring structure ----------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, PolyForm)
            and (self.n, self.k) == (other.n, other.k)
            and self.terms == other.terms
        )

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        self._check_like(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, Fraction(0)) + c
        return PolyForm(self.n, self.k, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return PolyForm(self.n, self.k, {key: -c for key, c in self.terms.items()})

    def scale(self, a):
        a = Fraction(a)
        return PolyForm(self.n, self.k, {key: a * c for key, c in self.terms.items()})

    __mul__ = scale
    __rmul__ = scale

    def _check_like(self, other, same_degree=True):
        if not isinstance(other, PolyForm) or other.n != self.n:
            raise ValueError("ambient dimension mismatch")
        if same_degree and other.k != self.k:
            raise ValueError("form degree mismatch")

    def wedge(self, other):
        self._check_like(other, same_degree=False)
        k = self.k + other.k
        if k > self.n:
            raise ValueError("wedge degree exceeds ambient dimension")
        out = {}
        for (aa, sa), ca in self.terms.items():
            for (ab, sb), cb in other.terms.items():
                tup, sign = sort_tuple_sign(sa + sb)
                if sign == 0:
                    continue
                alpha = tuple(x + y for x, y in zip(aa, ab))
                key = (alpha, tup)
                out[key] = out.get(key, Fraction(0)) + sign * ca * cb
        return PolyForm(self.n, k, out)

    # ---- calculus -----------------------------------------------------

    def degree(self):
        """Polynomial degree (max total degree of a surviving monomial); -inf for 0."""
        if not self.terms:
            return -1
        return max(sum(alpha) for alpha, _ in self.terms)

    def homogeneous_part(self, j):
        return PolyForm(
            self.n,
            self.k,
            {key: c for key, c in self.terms.items() if sum(key[0]) == j},
        )

    def homogeneous_degrees(self):
        return sorted({sum(alpha) for alpha, _ in self.terms})

    def exterior_derivative(self):
        n, k = self.n, self.k
        if k == n:
            raise ValueError("no exterior derivative of a top-degree form")
        out = {}
        for (alpha, sigma), c in self.terms.items():
            for j in range(n):
                if alpha[j] == 0 or j in sigma:
                    continue
                beta = tuple(a - 1 if i == j else a for i, a in enumerate(alpha))
                tup, sign = sort_tuple_sign((j,) + sigma)
                if sign == 0:
                    continue
                key = (beta, tup)
                out[key] = out.get(key, Fraction(0)) + sign * c * alpha[j]
        return PolyForm(n, k + 1, out)

    def koszul(self, base_point=None):
        """Contraction with the position field anchored at base_point (default 0)."""
        n, k = self.n, self.k
        if k == 0:
            return PolyForm(n, 0, {})
        y = [Fraction(0)] * n if base_point is None else [Fraction(v) for v in base_point]
        out = {}
        for (alpha, sigma), c in self.terms.items():
            for i, si in enumerate(sigma):
                rest = sigma[:i] + sigma[i + 1 :]
                sgn = (-1) ** i
                # (x_si - y_si) * x^alpha, split into the two monomials
                up = tuple(a + 1 if j == si else a for j, a in enumerate(alpha))
                key = (up, rest)
                out[key] = out.get(key, Fraction(0)) + sgn * c
                if y[si] != 0:
                    key = (alpha, rest)
                    out[key] = out.get(key, Fraction(0)) - sgn * c * y[si]
        return PolyForm(n, k - 1, out)

    # ---- pullback and evaluation --------------------------------------

    def pullback_affine(self, matrix, offset):
        """Pullback through the affine map x = offset + matrix @ y.

        ``matrix`` is n x m (rational entries), ``offset`` length n; the result
        is a k-form in m variables.  Used for traces onto faces and for
        reference-to-face changes of coordinates, all exact.
        """
        n, k = self.n, self.k
        m = len(matrix[0]) if matrix else 0
        mat = [[Fraction(v) for v in row] for row in matrix]
        off = [Fraction(v) for v in offset]
        # coordinate 0-forms x_i = off_i + sum_j mat[i][j] y_j
        coords = []
        for i in range(n):
            t = {((0,) * m, ()): off[i]}
            for j in range(m):
                if mat[i][j] != 0:
                    ej = tuple(1 if l == j else 0 for l in range(m))
                    t[(ej, ())] = mat[i][j]
            coords.append(PolyForm(m, 0, t))
        if k > m:
            raise ValueError(f"cannot pull a {k}-form back to {m} variables")
        # constant 1-forms dx_i pulled back, built on demand so that 0-forms
        # can be restricted to points
        dcache = {}

        def dcoord(i):
            if i not in dcache:
                t = {}
                for j in range(m):
                    if mat[i][j] != 0:
                        t[((0,) * m, (j,))] = mat[i][j]
                dcache[i] = PolyForm(m, 1, t)
            return dcache[i]

        out = PolyForm(m, k, {})
        for (alpha, sigma), c in self.terms.items():
            piece = PolyForm.constant(m, c)
            for i, a in enumerate(alpha):
                for _ in range(a):
                    piece = piece.wedge(coords[i])
            for si in sigma:
                piece = piece.wedge(dcoord(si))
            if piece.k != k:
                raise AssertionError("pullback degree bookkeeping failed")
            out = out + piece
        return out

    def evaluate(self, point):
        """Evaluate coefficients at a point, returning an AltForm (exact)."""
        xs = [Fraction(v) for v in point]
        out = {}
        for (alpha, sigma), c in self.terms.items():
            val = c
            for i, a in enumerate(alpha):
                if a:
                    val *= xs[i] ** a
            if val != 0:
                out[sigma] = out.get(sigma, Fraction(0)) + val
        return AltForm(self.n, self.k, out)

    def coefficient_functions(self):
        """Map sigma -> dict(alpha -> coeff), one scalar polynomial per tuple."""
        out = {s: {} for s in increasing_tuples(self.n, self.k)}
        for (alpha, sigma), c in self.terms.items():
            out[sigma][alpha] = c
        return out

    def __repr__(self):
        if not self.terms:
            return f"PolyForm({self.n}, {self.k}, 0)"
        parts = []
        for alpha, sigma in sorted(self.terms):
            c = self.terms[(alpha, sigma)]
            mono = "".join(f"x{i}^{a}" if a > 1 else (f"x{i}" if a else "") for i, a in enumerate(alpha))
            base = "dx" + "^dx".join(str(i) for i in sigma) if sigma else ""
            parts.append(f"{c}*{mono or '1'}{'*' if base else ''}{base}")
        return " + ".join(parts)


def exterior_derivative(omega):
    return omega.exterior_derivative()


def koszul(omega, base_point=None):
    return omega.koszul(base_point)


def homotopy_residual(omega):
    """(d kappa + kappa d) omega - (r + k) omega for homogeneous omega.

    The contraction identity makes this exactly zero; callers assert on it.
    Raises ValueError when omega is not homogeneous.
    """
    degs = omega.homogeneous_degrees()
    if len(degs) > 1:
        raise ValueError("homotopy identity applies per homogeneous degree")
    if not degs:
        return PolyForm(omega.n, omega.k, {})
    r = degs[0]
    if omega.k == 0:
        lhs = omega.exterior_derivative().koszul()
    elif omega.k == omega.n:
        lhs = omega.koszul().exterior_derivative()
    else:
        lhs = omega.koszul().exterior_derivative() + omega.exterior_derivative().koszul()
    return lhs - (r + omega.k) * omega


# ---- space specifications and bases -----------------------------------


@dataclass(frozen=True)
class SpaceSpec:
    """A polynomial form space: family 'P' or 'P-', degree r, form degree k, dim n."""

    family: str
    r: int
    k: int
    n: int

    def __post_init__(self):
        if self.family not in ("P", "P-"):
            raise ValueError("family must be 'P' or 'P-'")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"form degree {self.k} out of range for n={self.n}")

    def canonical(self):
        """Resolve the coincidences at the ends of the form-degree range.

        The reduced space of 0-forms is the full space of the same degree and
        the reduced space of n-forms is the full space of one lower degree.
        """
        if self.family == "P-" and self.k == 0:
            return SpaceSpec("P", self.r, 0, self.n)
        if self.family == "P-" and self.k == self.n:
            return SpaceSpec("P", self.r - 1, self.n, self.n)
        return self

    def label(self):
        tag = "P%d" % self.r if self.family == "P" else "P%d-" % self.r
        return f"{tag}L{self.k}"


def space_dimension(spec: SpaceSpec) -> int:
    spec = spec.canonical()
    n, k, r = spec.n, spec.k, spec.r
    if spec.family == "P":
        if r < 0:
            return 0
        return _binom(n + r, n) * _binom(n, k)
    if r <= 0:
        return 0
    return _binom(r + k - 1, k) * _binom(n + r, n - k)


def homogeneous_dimension(n, r, k) -> int:
    if r < 0:
        return 0
    return _binom(n + r - 1, n - 1) * _binom(n, k)


def koszul_range_dimension(r, k, n) -> int:
    """dim kappa H_r Lambda^k = dim d H_{r+1} Lambda^{k-1}, closed form."""
    if not 1 <= k <= n:
        raise ValueError(f"form degree {k} must satisfy 1 <= k <= n")
    if r < 0:
        return 0
    return _binom(n + r, n - k) * _binom(r + k - 1, k - 1)


def full_basis(n, r, k, homogeneous=False):
    """Monomial basis of P_r Lambda^k (or H_r Lambda^k)."""
    if r < 0:
        return []
    out = []
    for alpha in monomial_exponents(n, r, homogeneous=homogeneous):
        for sigma in increasing_tuples(n, k):
            out.append(PolyForm.monomial(n, alpha, sigma))
    return out


def _coeff_keys(n, r, k):
    keys = []
    for alpha in monomial_exponents(n, r):
        for sigma in increasing_tuples(n, k):
            keys.append((alpha, sigma))
    return keys


def coefficient_vector(omega, keys):
    vec = [Fraction(0)] * len(keys)
    index = {key: i for i, key in enumerate(keys)}
    for key, c in omega.terms.items():
        try:
            vec[index[key]] = c
        except KeyError:
            raise ValueError(f"form has a term {key} outside the coordinate range")
    return vec


def reduced_spanning_set(n, r, k):
    """Spanning set of the reduced space: P_{r-1} monomials plus kappa of H_{r-1}^{k+1}.

    Not linearly independent in general; see reduced_basis for an extracted
    basis.  Empty for r <= 0.
    """
    if r <= 0:
        return []
    out = full_basis(n, r - 1, k)
    if k < n:
        out.extend(w.koszul() for w in full_basis(n, r - 1, k + 1, homogeneous=True))
    return out


def basis_for(spec: SpaceSpec):
    """A basis (list of PolyForms) for the requested space.

    Full spaces get the plain monomial basis.  Reduced spaces get the
    deterministic independent subset of the spanning set, whose length is
    checked against the closed-form dimension.
    """
    spec = spec.canonical()
    if spec.family == "P":
        return full_basis(spec.n, spec.r, spec.k)
    span = reduced_spanning_set(spec.n, spec.r, spec.k)
    keys = _coeff_keys(spec.n, spec.r, spec.k)
    vectors = [coefficient_vector(w, keys) for w in span]
    kept = rational.independent_subset(vectors)
    basis = [span[i] for i in kept]
    expected = space_dimension(spec)
    if len(basis) != expected:
        raise AssertionError(
            f"reduced basis size {len(basis)} != closed-form dimension {expected}"
        )
    return basis


def membership_reduced(omega, r) -> bool:
    """Is omega in the reduced space of degree r?

    The criterion: the contraction of the top homogeneous part vanishes,
    equivalently kappa omega stays within degree r.  Base-point independent.
    The 0-form and top-form coincidences are resolved first.
    """
    if omega.is_zero():
        return True
    if omega.k == 0:
        return omega.degree() <= r
    if omega.k == omega.n:
        return omega.degree() <= r - 1
    if r < 1 or omega.degree() > r:
        return False
    return omega.homogeneous_part(r).koszul().is_zero()


def build_sequence(n, r, pattern):
    """The subcomplex of polynomial form spaces selected by ``pattern``.

    ``pattern`` is a bit sequence of length n-1; bit k-1 chooses the space of
    k-forms: 1 keeps the polynomial degree and takes the reduced space, 0
    drops the degree and takes the full space.  The 0-form space is always
    the full space of degree r and the n-form space is forced by the degree
    reached.  Raises ValueError when a chosen space would be empty or when
    the pattern length is wrong.
    """
    pattern = tuple(int(b) for b in pattern)
    if len(pattern) != max(n - 1, 0):
        raise ValueError(f"pattern must have length {n - 1}")
    if any(b not in (0, 1) for b in pattern):
        raise ValueError("pattern bits must be 0 or 1")
    if r < 1:
        raise ValueError("sequences start at degree r >= 1")
    chain = [SpaceSpec("P", r, 0, n)]
    s = r
    for k in range(1, n):
        if pattern[k - 1]:
            chain.append(SpaceSpec("P-", s, k, n))
        else:
            s -= 1
            chain.append(SpaceSpec("P", s, k, n))
    if n >= 1:
        s -= 1
        chain.append(SpaceSpec("P", s, n, n))
    for spec in chain:
        canon = spec.canonical()
        # element spaces need degree >= 1 except piecewise constants at k = n
        floor_degree = 0 if canon.k == n else 1
        if canon.r < floor_degree:
            raise ValueError(
                f"pattern {pattern} with r={r} reaches the illegal space {spec.label()}"
            )
    return chain


def all_sequences(n, r):
    """Every legal pattern for (n, r), as a list of (pattern, chain) pairs."""
    out = []
    for bits in itertools.product((0, 1), repeat=max(n - 1, 0)):
        try:
            out.append((bits, build_sequence(n, r, bits)))
        except ValueError:
            continue
    return out
