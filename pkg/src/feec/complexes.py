"""Discrete subcomplexes: chained form spaces with differentials and metrics.

A complex holds one assembled space per form degree, taken from a compatible
degree sequence, together with sparse differential matrices, mass matrices,
harmonic representatives, and the derived quantities (cohomology dimensions,
Hodge splitting, Poincare constants).

The differential matrix is purely combinatorial: on every cell the same exact
reference matrix relates source and target coefficients, so assembly writes
entries by assignment rather than accumulation and cross-cell agreement is a
structural fact, not a rounding accident.
"""

from __future__ import annotations

import math
import os

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import reference
from .linalg import (
    TOL,
    factor_spd,
    gram_schmidt,
    rank_and_nullspace,
    subspace_gap,
    sym_generalized_eig,
    write_coo,
)
from .polyforms import build_sequence
from .spaces import FESpace


class DiscreteComplex:
    """De Rham subcomplex on a mesh for one degree sequence.

    ``pattern`` selects the family at each step as in ``build_sequence``;
    ``coefficients`` optionally maps a form degree to a pointwise symmetric
    matrix weight used in that degree's mass matrix.
    """

    def __init__(self, mesh, r, pattern=None, bc="natural", coefficients=None):
        n = mesh.n
        if pattern is None:
            pattern = (1,) * (n - 1)
        specs = build_sequence(n, r, pattern)
        self.mesh = mesh
        self.r = r
        self.pattern = tuple(pattern)
        self.bc = bc
        self.coefficients = dict(coefficients or {})
        self.spaces = [FESpace(mesh, s, bc) for s in specs]
        self.n = n
        self._d = {}
        self._mass = {}
        self._mass_factor = {}
        self._harmonic = {}
        self._rank_d = {}

    def space(self, k):
        return self.spaces[k]

    def dim(self, k):
        return self.spaces[k].dim

    # ---- operators ----------------------------------------------------

    def derivative(self, k):
        """Sparse matrix of d : degree k -> k+1 in the global coefficient bases."""
        if not 0 <= k < self.n:
            raise ValueError(f"no differential out of degree {k} in dimension {self.n}")
        if k not in self._d:
            src, dst = self.spaces[k], self.spaces[k + 1]
            local = reference.derivative_matrix(
                self.n, src.spec.family, src.spec.r, dst.spec.family, dst.spec.r, k
            )
            loc = np.array([[float(x) for x in row] for row in local])
            entries = {}
            for ci in range(len(self.mesh.cells)):
                rows = dst.cell_dofs(ci)
                cols = src.cell_dofs(ci)
                for li, gi in enumerate(rows):
                    if gi < 0:
                        continue
                    for lj, gj in enumerate(cols):
                        if gj < 0:
                            continue
                        v = loc[li, lj]
                        if v != 0.0:
                            entries[(gi, gj)] = v
            if entries:
                ij = np.array(list(entries.keys()), dtype=int)
                vals = np.array(list(entries.values()))
                D = sp.csr_matrix((vals, (ij[:, 0], ij[:, 1])), shape=(dst.dim, src.dim))
            else:
                D = sp.csr_matrix((dst.dim, src.dim))
            self._d[k] = D
        return self._d[k]

    def mass(self, k):
        if k not in self._mass:
            coeff = self.coefficients.get(k)
            self._mass[k] = self.spaces[k].mass_matrix(coeff=coeff)
        return self._mass[k]

    def mass_factor(self, k):
        if k not in self._mass_factor:
            self._mass_factor[k] = factor_spd(self.mass(k))
        return self._mass_factor[k]

    def inner(self, k, u, v):
        return float(np.asarray(u) @ (self.mass(k) @ np.asarray(v)))

    def norm(self, k, v):
        return math.sqrt(max(self.inner(k, v, v), 0.0))

    def coderivative(self, k, v):
        """Coefficients of the discrete adjoint differential applied to v.

        Solves with the mass matrix; the inverse is never formed.
        """
        if not 1 <= k <= self.n:
            raise ValueError(f"no adjoint differential into degree {k - 1}")
        rhs = self.derivative(k - 1).T @ (self.mass(k) @ np.asarray(v, dtype=float))
        return self.mass_factor(k - 1).solve(rhs)

    def stiffness(self, k):
        """D_k^T M_{k+1} D_k, the weak form of (d ., d .) at degree k."""
        D = self.derivative(k)
        return (D.T @ self.mass(k + 1) @ D).tocsr()

    def _derivative_rank(self, k):
        if k not in self._rank_d:
            if k < 0 or k >= self.n:
                self._rank_d[k] = 0
            else:
                D = self.derivative(k).toarray()
                rank, _ = rank_and_nullspace(D)
                self._rank_d[k] = rank
        return self._rank_d[k]

    # ---- cohomology ---------------------------------------------------

    def betti_number(self, k):
        """dim ker d_k - dim range d_{k-1}, computed from matrix ranks."""
        return self.dim(k) - self._derivative_rank(k) - self._derivative_rank(k - 1)

    def betti_numbers(self):
        return tuple(self.betti_number(k) for k in range(self.n + 1))

    def harmonic_basis(self, k):
        """M-orthonormal basis of the discrete harmonic space at degree k.

        Harmonic means annihilated by d and orthogonal to the range of d, so
        the basis spans the null space of the stacked system
        [D_k ; D_{k-1}^T M_k].
        """
        if k not in self._harmonic:
            blocks = []
            if k < self.n:
                blocks.append(self.derivative(k).toarray())
            if k > 0:
                blocks.append(self.derivative(k - 1).T.toarray() @ self.mass(k).toarray())
            if not blocks:
                stacked = np.zeros((0, self.dim(k)))
            else:
                stacked = np.vstack(blocks)
            _, null = rank_and_nullspace(stacked)
            M = self.mass(k)
            H = gram_schmidt(null, lambda v: M @ v)
            if H.shape[1] != self.betti_number(k):
                raise RuntimeError(
                    f"harmonic space dim {H.shape[1]} disagrees with rank count "
                    f"{self.betti_number(k)} at degree {k}"
                )
            self._harmonic[k] = H
        return self._harmonic[k]

    # ---- Hodge splitting ----------------------------------------------

    def hodge_decompose(self, k, v):
        """Split v into exact, harmonic, and coexact parts, all in coefficients.

        Returns (v_B, v_H, v_Bstar) with v = v_B + v_H + v_Bstar, mutually
        M-orthogonal: v_B in range d, v_H harmonic, v_Bstar the remainder
        (range of the adjoint differential).
        """
        v = np.asarray(v, dtype=float)
        M = self.mass(k)
        H = self.harmonic_basis(k)
        v_H = H @ (H.T @ (M @ v)) if H.shape[1] else np.zeros_like(v)
        if k == 0:
            v_B = np.zeros_like(v)
        else:
            D = self.derivative(k - 1)
            A = (D.T @ M @ D).tocsr()
            rhs = D.T @ (M @ v)
            if A.shape[0] <= TOL.dense_threshold:
                w, *_ = np.linalg.lstsq(A.toarray(), rhs, rcond=None)
            else:
                w, info = spla.cg(A, rhs, rtol=1e-12, atol=1e-14 * np.linalg.norm(rhs))
                if info < 0:
                    raise RuntimeError("conjugate gradients failed on the exact-part system")
            v_B = D @ w
        v_Bstar = v - v_B - v_H
        nv = self.norm(k, v)
        scale = max(nv * nv, 1e-30)
        cross = max(
            abs(self.inner(k, v_B, v_H)),
            abs(self.inner(k, v_B, v_Bstar)),
            abs(self.inner(k, v_H, v_Bstar)),
        )
        pyth = abs(
            nv * nv
            - self.inner(k, v_B, v_B)
            - self.inner(k, v_H, v_H)
            - self.inner(k, v_Bstar, v_Bstar)
        )
        if cross > 1e-8 * scale or pyth > 1e-8 * scale:
            raise RuntimeError(
                f"Hodge splitting lost orthogonality: cross {cross:.2e}, "
                f"Pythagoras defect {pyth:.2e} at scale {scale:.2e}"
            )
        return v_B, v_H, v_Bstar

    # ---- derived scalars ----------------------------------------------

    def poincare_constant(self, k):
        """Discrete Poincare data at degree k.

        mu is the smallest positive generalized singular value of d restricted
        to the orthogonal complement of its kernel; the bound on the graph
        norm is sqrt(1 + mu^2)/mu and the bound in the plain L2 norm is 1/mu.
        Returns {'mu', 'constant_v', 'constant_w'}.
        """
        if not 0 <= k < self.n:
            raise ValueError(f"no differential out of degree {k}")
        C = self.stiffness(k)
        M = self.mass(k)
        nzero = self.dim(k) - self._derivative_rank(k)
        count = None
        if self.dim(k) > TOL.dense_threshold:
            count = min(self.dim(k), nzero + 6)
        vals, _ = sym_generalized_eig(C, M, count=count)
        scale = max(abs(vals[-1]), 1.0)
        positive = vals[vals > 1e-8 * scale]
        if len(positive) == 0:
            raise RuntimeError("differential vanishes at this degree")
        mu = math.sqrt(float(positive[0]))
        return {
            "mu": mu,
            "constant_v": math.sqrt(1.0 + mu * mu) / mu,
            "constant_w": 1.0 / mu,
        }

    def harmonic_gap(self, k, samplers, quad_degree=None):
        """Principal-angle gap between discrete harmonics and projected fields.

        Each sampler is L2-projected onto the degree-k space; the gap is
        measured in the mass inner product.
        """
        space = self.spaces[k]
        cols = []
        for s in samplers:
            load = space.load_vector(s, quad_degree=quad_degree)
            cols.append(self.mass_factor(k).solve(load))
        V = np.column_stack(cols) if cols else np.zeros((self.dim(k), 0))
        M = self.mass(k)
        return subspace_gap(self.harmonic_basis(k), V, lambda v: M @ v)

    # ---- io ------------------------------------------------------------

    def export_matrices(self, directory):
        """Write every differential and mass matrix in coordinate text form."""
        os.makedirs(directory, exist_ok=True)
        paths = []
        for k in range(self.n):
            p = os.path.join(directory, f"D{k}.coo")
            write_coo(self.derivative(k), p)
            paths.append(p)
        for k in range(self.n + 1):
            p = os.path.join(directory, f"M{k}.coo")
            write_coo(self.mass(k), p)
            paths.append(p)
        return paths

    def __repr__(self):
        labels = ", ".join(s.spec.label() for s in self.spaces)
        return f"DiscreteComplex([{labels}], bc={self.bc})"


def complex_for(mesh, r, pattern=None, bc="natural", coefficients=None):
    return DiscreteComplex(mesh, r, pattern, bc, coefficients)
