r"""Reference elements: shape spaces, trace-moment degrees of freedom, dual bases.

Everything on the reference n-simplex (vertices at the origin and the unit
coordinate vectors) is exact: shape bases are rational PolyForms, degrees of
freedom are face moments evaluated through exact pullbacks and closed-form
monomial integrals, and the dual basis comes from inverting the rational
Vandermonde matrix.  Floating point enters only through tabulation at
quadrature points, which downstream assembly consumes.

Degrees of freedom follow the geometric decomposition: for the full family of
degree r the weight space on a face of dimension d is the reduced space of
degree r+k-d in form degree d-k; for the reduced family it is the full space
of degree r+k-d-1.  A degree of freedom is the functional

    omega  |->  integral over the face of (trace of omega) wedge (weight)

computed in the face's own reference coordinates through the increasing-vertex
parametrization.  Because global faces are also stored with increasing vertex
order, the same functional is induced from every cell containing the face and
all local-to-global signs are +1.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import rational
from .altforms import increasing_tuples, sort_tuple_sign
from .polyforms import (
    PolyForm,
    SpaceSpec,
    basis_for,
    space_dimension,
)
from .quadrature import simplex_monomial_integral, simplex_rule


def reference_vertices(n):
    """Vertices of the reference n-simplex as exact coordinate tuples."""
    out = [tuple(Fraction(0) for _ in range(n))]
    for i in range(n):
        out.append(tuple(Fraction(1 if j == i else 0) for j in range(n)))
    return out


@lru_cache(maxsize=None)
def weight_basis(family, r, k, d):
    """Weight-space basis for the face block of dimension d; empty if none."""
    if d < k:
        return ()
    if family == "P":
        spec = SpaceSpec("P-", r + k - d, d - k, d)
    else:
        spec = SpaceSpec("P", r + k - d - 1, d - k, d)
    spec = spec.canonical()
    if spec.r < 0 or space_dimension(spec) == 0:
        return ()
    return tuple(basis_for(spec))


def face_embedding(n, face):
    """Exact affine map of the reference d-simplex onto a face of the reference n-simplex."""
    verts = reference_vertices(n)
    d = len(face) - 1
    offset = list(verts[face[0]])
    matrix = [[verts[face[j + 1]][i] - verts[face[0]][i] for j in range(d)] for i in range(n)]
    return matrix, offset


def integrate_top_form(omega):
    """Exact integral of a top-degree form over the reference simplex of its dimension."""
    if omega.k != omega.n:
        raise ValueError("expected a top-degree form")
    total = Fraction(0)
    for (alpha, _sigma), c in omega.terms.items():
        total += c * simplex_monomial_integral(alpha)
    return total


class ReferenceElement:
    """Shape basis, DOFs, and dual basis for one (n, family, r, k) element."""

    def __init__(self, n, family, r, k):
        spec = SpaceSpec(family, r, k, n).canonical()
        if spec.r < 1 and not (spec.k == n and spec.r == 0):
            raise ValueError(
                f"no element for {spec.label()}: degree must be >= 1 "
                "(degree-0 spaces exist only for top-degree forms)"
            )
        self.n = n
        self.k = k
        self.spec = spec
        self.shape = basis_for(spec)

        self.block = {}
        self.dofs = []
        for d in range(k, n + 1):
            wb = weight_basis(spec.family, spec.r, spec.k, d)
            self.block[d] = len(wb)
            if not wb:
                continue
            for face in itertools.combinations(range(n + 1), d + 1):
                for widx in range(len(wb)):
                    self.dofs.append((d, face, widx))
        self.ndof = len(self.dofs)
        if self.ndof != len(self.shape):
            raise AssertionError(
                f"{spec.label()}: {self.ndof} functionals vs {len(self.shape)} shape functions"
            )

        self.vandermonde = [
            [self.apply_dof(i, w) for w in self.shape] for i in range(self.ndof)
        ]
        coeffs = rational.invert(self.vandermonde)
        self.dual = []
        for j in range(self.ndof):
            psi = PolyForm.zero(n, k)
            for m in range(self.ndof):
                if coeffs[m][j] != 0:
                    psi = psi + coeffs[m][j] * self.shape[m]
            self.dual.append(psi)

    def apply_dof(self, i, omega):
        """Evaluate functional i on a PolyForm over the reference cell, exactly."""
        d, face, widx = self.dofs[i]
        eta = weight_basis(self.spec.family, self.spec.r, self.spec.k, d)[widx]
        matrix, offset = face_embedding(self.n, face)
        pulled = omega.pullback_affine(matrix, offset)
        return integrate_top_form(pulled.wedge(eta))

    def reconstruct(self, coefficients):
        """The PolyForm with the given dual-basis coefficients."""
        out = PolyForm.zero(self.n, self.k)
        for c, psi in zip(coefficients, self.dual):
            if c != 0:
                out = out + Fraction(c) * psi
        return out

    # ---- float tabulation --------------------------------------------

    def tabulate(self, points):
        """Dual-basis coefficient values: array (npoints, ndof, C(n,k))."""
        pts = np.asarray(points, dtype=float).reshape(-1, max(self.n, 1))
        tuples = increasing_tuples(self.n, self.k)
        tindex = {t: i for i, t in enumerate(tuples)}
        out = np.zeros((len(pts), self.ndof, len(tuples)))
        for j, psi in enumerate(self.dual):
            for (alpha, sigma), c in psi.terms.items():
                mono = np.ones(len(pts))
                for ax, a in enumerate(alpha):
                    if a:
                        mono = mono * pts[:, ax] ** a
                out[:, j, tindex[sigma]] += float(c) * mono
        return out

    @lru_cache(maxsize=8)
    def tabulation(self, quad_degree):
        """Cached (points, weights, values) at a reference rule of given degree."""
        pts, wts = simplex_rule(self.n, quad_degree)
        vals = self.tabulate(pts)
        vals.setflags(write=False)
        return pts, wts, vals

    def tabulate_d(self, points):
        """Coefficient values of d applied to the dual basis: (npoints, ndof, C(n,k+1))."""
        if self.k >= self.n:
            raise ValueError("no exterior derivative tabulation for top-degree forms")
        pts = np.asarray(points, dtype=float).reshape(-1, self.n)
        tuples = increasing_tuples(self.n, self.k + 1)
        tindex = {t: i for i, t in enumerate(tuples)}
        out = np.zeros((len(pts), self.ndof, len(tuples)))
        for j, psi in enumerate(self.dual):
            for (alpha, sigma), c in psi.exterior_derivative().terms.items():
                mono = np.ones(len(pts))
                for ax, a in enumerate(alpha):
                    if a:
                        mono = mono * pts[:, ax] ** a
                out[:, j, tindex[sigma]] += float(c) * mono
        return out

    @lru_cache(maxsize=8)
    def d_tabulation(self, quad_degree):
        pts, wts, vals = self.tabulation(quad_degree)
        dvals = self.tabulate_d(pts)
        dvals.setflags(write=False)
        return pts, wts, dvals

    @lru_cache(maxsize=8)
    def weight_tabulation(self, d, quad_degree):
        """Face-block weight data for interpolation at one face dimension.

        Returns (points, weights, eta_values, signs, trace_tuples) where
        eta_values has shape (nweights, npoints, C(d, d-k)) indexed by the
        complement tuple, signs[t] is the wedge sign pairing trace tuple t
        with its complement, and trace_tuples lists the k-tuples in order.
        """
        wb = weight_basis(self.spec.family, self.spec.r, self.spec.k, d)
        pts, wts = simplex_rule(d, quad_degree)
        trace_tuples = increasing_tuples(d, self.k)
        comp_tuples = increasing_tuples(d, d - self.k)
        cindex = {t: i for i, t in enumerate(comp_tuples)}
        signs = np.empty(len(trace_tuples))
        comp_of = []
        for ti, t in enumerate(trace_tuples):
            comp = tuple(sorted(set(range(d)) - set(t)))
            _, s = sort_tuple_sign(t + comp)
            signs[ti] = float(s)
            comp_of.append(cindex[comp])
        vals = np.zeros((len(wb), len(pts), len(comp_tuples)))
        for m, eta in enumerate(wb):
            for (alpha, sigma), c in eta.terms.items():
                mono = np.ones(len(pts))
                for ax, a in enumerate(alpha):
                    if a:
                        mono = mono * pts[:, ax] ** a
                vals[m, :, cindex[sigma]] += float(c) * mono
        for arr in (vals, signs):
            arr.setflags(write=False)
        return pts, wts, vals, signs, tuple(comp_of)

    def max_weight_degree(self):
        out = 0
        for d in range(self.k, self.n + 1):
            for eta in weight_basis(self.spec.family, self.spec.r, self.spec.k, d):
                out = max(out, max(eta.degree(), 0))
        return out

    def __repr__(self):
        return f"ReferenceElement({self.spec.label()}, n={self.n}, dim={self.ndof})"


@lru_cache(maxsize=None)
def reference_element(n, family, r, k):
    return ReferenceElement(n, family, r, k)


@lru_cache(maxsize=None)
def derivative_matrix(n, family_a, r_a, family_b, r_b, k):
    """Exact matrix of d from element (family_a, r_a, k) into (family_b, r_b, k+1).

    The same rational matrix applies on every physical cell because d commutes
    with affine pullback; assembly just scatters it.  Raises if d of some
    basis function leaves the target space.
    """
    src = reference_element(n, family_a, r_a, k)
    dst = reference_element(n, family_b, r_b, k + 1)
    cols = []
    for psi in src.dual:
        dpsi = psi.exterior_derivative()
        col = [dst.apply_dof(i, dpsi) for i in range(dst.ndof)]
        if not (dst.reconstruct(col) - dpsi).is_zero():
            raise ValueError(
                f"d does not map {src.spec.label()} into {dst.spec.label()}"
            )
        cols.append(col)
    return tuple(
        tuple(cols[j][i] for j in range(src.ndof)) for i in range(dst.ndof)
    )


def whitney_form(n, face):
    """The lowest-order basis form attached to a k-face of the reference simplex.

    The alternating-sum formula over the face's barycentric coordinates;
    face is an increasing tuple of local vertex ids, k = len(face) - 1.
    """
    lam = []
    for i in range(n + 1):
        if i == 0:
            terms = {((0,) * n, ()): Fraction(1)}
            for j in range(n):
                ej = tuple(1 if l == j else 0 for l in range(n))
                terms[(ej, ())] = Fraction(-1)
            lam.append(PolyForm(n, 0, terms))
        else:
            ej = tuple(1 if l == i - 1 else 0 for l in range(n))
            lam.append(PolyForm(n, 0, {(ej, ()): Fraction(1)}))
    k = len(face) - 1
    out = PolyForm.zero(n, k)
    for i in range(k + 1):
        piece = lam[face[i]]
        for j in range(k + 1):
            if j == i:
                continue
            piece = piece.wedge(lam[face[j]].exterior_derivative())
        out = out + Fraction((-1) ** i) * piece
    return out
