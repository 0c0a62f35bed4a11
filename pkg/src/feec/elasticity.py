"""Mixed linear elasticity in the plane with exactly divergence-conforming
symmetric stresses.

The stress element on a triangle is the 24-dimensional space of symmetric
matrix fields with cubic entries whose divergence is linear, determined by
vertex values, four moments of the normal traction per edge, and the three
componentwise means.  Displacements are discontinuous linear vectors.  The
pair transfers the equilibrium equation exactly: div sigma_h equals the
elementwise L2 projection of the load.

The scalar potential operator J q = (d^2q/dy^2, -d^2q/dxdy; ., d^2q/dx^2)
links this construction to the scalar world: J annihilates affine functions
and div o J = 0, which is what makes the 24-dimensional shape space close
under the constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.polynomial.legendre import leggauss

from .linalg import TripletBuilder, factor_symmetric_indefinite, rank_and_nullspace
from .polyforms import PolyForm
from .quadrature import simplex_rule

_EXP3 = [(a, b) for tot in range(4) for a in range(tot, -1, -1) for b in [tot - a]]
_NCH = 3  # components 11, 12, 22 of a symmetric matrix


def _mono_values(pts, exps):
    out = np.ones((len(pts), len(exps)))
    for j, (a, b) in enumerate(exps):
        if a:
            out[:, j] *= pts[:, 0] ** a
        if b:
            out[:, j] *= pts[:, 1] ** b
    return out


def _deriv_coeffs(exps, axis):
    """Matrix taking monomial coefficients to coefficients of the derivative."""
    index = {e: i for i, e in enumerate(exps)}
    D = np.zeros((len(exps), len(exps)))
    for j, e in enumerate(exps):
        p = e[axis]
        if p == 0:
            continue
        tgt = (e[0] - 1, e[1]) if axis == 0 else (e[0], e[1] - 1)
        D[index[tgt], j] = p
    return D


@lru_cache(maxsize=1)
def _shape_nullspace():
    """30 x 24 basis of cubic symmetric fields with linear divergence.

    Coefficients are over the monomial basis per channel; the constraint
    kills the quadratic part of both divergence components.
    """
    dx = _deriv_coeffs(_EXP3, 0)
    dy = _deriv_coeffs(_EXP3, 1)
    quad_rows = [i for i, e in enumerate(_EXP3) if sum(e) == 2]
    nm = len(_EXP3)
    C = np.zeros((2 * len(quad_rows), _NCH * nm))
    for ri, row in enumerate(quad_rows):
        C[ri, 0 * nm : 1 * nm] = dx[row]
        C[ri, 1 * nm : 2 * nm] = dy[row]
        C[len(quad_rows) + ri, 1 * nm : 2 * nm] = dx[row]
        C[len(quad_rows) + ri, 2 * nm : 3 * nm] = dy[row]
    rank, null = rank_and_nullspace(C)
    if rank != 6 or null.shape[1] != 24:
        raise RuntimeError(f"divergence constraint has rank {rank}, null dim {null.shape[1]}")
    return null


@dataclass
class StressElement:
    verts: np.ndarray
    center: np.ndarray
    scale: float
    dof_matrix: np.ndarray
    basis: np.ndarray  # 30 x 24 monomial coefficients of the dual basis
    cond: float


def _edge_rule(npts=4):
    x, w = leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


def stress_element(verts):
    """Construct the element on one physical triangle.

    DOF order: per vertex the three components (9), per edge in sorted-pair
    order the constant then linear moments of both traction components (12),
    then the three componentwise means (3).
    """
    verts = np.asarray(verts, dtype=float)
    center = verts.mean(axis=0)
    scale = max(np.linalg.norm(verts[i] - verts[j]) for i in range(3) for j in range(i))
    N = _shape_nullspace()
    nm = len(_EXP3)

    def xi(x):
        return (np.asarray(x, dtype=float) - center[None, :]) / scale

    V = np.zeros((24, 30))
    # vertex values
    mv = _mono_values(xi(verts), _EXP3)  # 3 x nm
    for a in range(3):
        for ch in range(_NCH):
            V[3 * a + ch, ch * nm : (ch + 1) * nm] = mv[a]
    # edge traction moments
    s_q, w_q = _edge_rule()
    row = 9
    for a, b in ((0, 1), (0, 2), (1, 2)):
        t = verts[b] - verts[a]
        nrm = np.array([t[1], -t[0]]) / np.linalg.norm(t)
        x = verts[a][None, :] + s_q[:, None] * t[None, :]
        mvals = _mono_values(xi(x), _EXP3)  # q x nm
        for mom in range(2):
            lq = w_q if mom == 0 else w_q * (2.0 * s_q - 1.0)
            m_int = lq @ mvals  # nm
            # traction components: (sig n)_x = s11 nx + s12 ny ; (sig n)_y = s12 nx + s22 ny
            V[row, 0 * nm : 1 * nm] = nrm[0] * m_int
            V[row, 1 * nm : 2 * nm] = nrm[1] * m_int
            row += 1
            V[row, 1 * nm : 2 * nm] = nrm[0] * m_int
            V[row, 2 * nm : 3 * nm] = nrm[1] * m_int
            row += 1
    # interior means
    pts, wts = simplex_rule(2, 4)
    B = (verts[1:] - verts[0]).T
    det = abs(np.linalg.det(B))
    area = det / 2.0
    x = verts[0][None, :] + pts @ B.T
    mvals = _mono_values(xi(x), _EXP3)
    m_mean = (wts * det) @ mvals / area
    for ch in range(_NCH):
        V[row + ch, ch * nm : (ch + 1) * nm] = m_mean

    Vc = V @ N  # 24 x 24
    cond = float(np.linalg.cond(Vc))
    basis = N @ np.linalg.inv(Vc)
    return StressElement(verts, center, scale, Vc, basis, cond)


# ---- scalar potential -------------------------------------------------


def _partial(q, axis):
    if q.k != 0 or q.n != 2:
        raise ValueError("expected a scalar in two variables")
    if q.is_zero():
        return PolyForm.zero(2, 0)
    dq = q.exterior_derivative()
    terms = {}
    for (alpha, sigma), c in dq.terms.items():
        if sigma == (axis,):
            terms[(alpha, ())] = c
    return PolyForm(2, 0, terms)


def airy(q):
    """Symmetric matrix field (s11, s12, s22) built from second derivatives of q."""
    return (
        _partial(_partial(q, 1), 1),
        -_partial(_partial(q, 0), 1),
        _partial(_partial(q, 0), 0),
    )


def field_divergence(s11, s12, s22):
    return (
        _partial(s11, 0) + _partial(s12, 1),
        _partial(s12, 0) + _partial(s22, 1),
    )


def airy_kernel_dimension(r):
    """Dimension of the kernel of the potential operator on scalars of degree <= r."""
    from .polyforms import monomial_exponents
    from .rational import rank as rat_rank

    exps = monomial_exponents(2, r)
    out_exps = monomial_exponents(2, max(r - 2, 0))
    oidx = {e: i for i, e in enumerate(out_exps)}
    rows = []
    for e in exps:
        q = PolyForm.monomial(2, e, ())
        cols = [0] * (3 * len(out_exps))
        for ch, comp in enumerate(airy(q)):
            for (alpha, _sig), c in comp.terms.items():
                cols[ch * len(out_exps) + oidx[alpha]] = c
        rows.append(cols)
    return len(exps) - rat_rank(rows)


def divfree_shape_dimension():
    """dim of divergence-free fields inside the 24-dimensional shape space."""
    N = _shape_nullspace()
    dx = _deriv_coeffs(_EXP3, 0)
    dy = _deriv_coeffs(_EXP3, 1)
    nm = len(_EXP3)
    Dv = np.zeros((2 * nm, 3 * nm))
    Dv[:nm, 0 * nm : 1 * nm] = dx
    Dv[:nm, 1 * nm : 2 * nm] = dy
    Dv[nm:, 1 * nm : 2 * nm] = dx
    Dv[nm:, 2 * nm : 3 * nm] = dy
    r, _ = rank_and_nullspace(Dv @ N)
    return 24 - r


def potential_range_dimension(r):
    """dim of the image of scalars of degree <= r under the potential operator."""
    from .polyforms import monomial_exponents

    return len(monomial_exponents(2, r)) - airy_kernel_dimension(r)


# ---- the assembled pair ----------------------------------------------


class ElasticityPair:
    """Stress/displacement pair on a 2D mesh with clamped boundary.

    Global stress DOFs: 3 per vertex, 4 per edge, 3 per cell; displacements
    are 6 per cell.  The clamped condition enters naturally through the
    missing boundary term, so no DOFs are removed.
    """

    def __init__(self, mesh, mu=1.0, lam=1.0):
        if mesh.n != 2:
            raise ValueError("plane elasticity needs a 2D mesh")
        self.mesh = mesh
        self.mu = float(mu)
        self.lam = float(lam)
        nv = len(mesh.vertices)
        ne = mesh.num_faces(1)
        nc = len(mesh.cells)
        self.dim_sigma = 3 * nv + 4 * ne + 3 * nc
        self.dim_u = 6 * nc
        self._vbase = 0
        self._ebase = 3 * nv
        self._cbase = 3 * nv + 4 * ne
        self.elements = [
            stress_element(np.asarray([mesh.vertices[v] for v in mesh.cells[ci]]))
            for ci in range(nc)
        ]
        self._assembled = None

    def cell_sigma_dofs(self, ci):
        mesh = self.mesh
        cell = mesh.cells[ci]
        ids = []
        for v in cell:
            ids.extend(self._vbase + 3 * v + ch for ch in range(3))
        for a, b in ((0, 1), (0, 2), (1, 2)):
            e = (cell[a], cell[b])
            ei = mesh.face_index(1, e)
            ids.extend(self._ebase + 4 * ei + w for w in range(4))
        ids.extend(self._cbase + 3 * ci + ch for ch in range(3))
        return np.array(ids, dtype=int)

    def cell_u_dofs(self, ci):
        return np.arange(6 * ci, 6 * ci + 6, dtype=int)

    def _compliance_apply(self, s):
        """Pointwise compliance on stacked channel values (..., 3)."""
        mu, lam = self.mu, self.lam
        tr = s[..., 0] + s[..., 2]
        factor = lam / (2.0 * mu + 2.0 * lam)
        out = np.empty_like(s)
        out[..., 0] = (s[..., 0] - factor * tr) / (2.0 * mu)
        out[..., 1] = s[..., 1] / (2.0 * mu)
        out[..., 2] = (s[..., 2] - factor * tr) / (2.0 * mu)
        return out

    @staticmethod
    def _frob_weights():
        # symmetric Frobenius pairing: s:t = s11 t11 + 2 s12 t12 + s22 t22
        return np.array([1.0, 2.0, 1.0])

    def _cell_tabulations(self, ci, quad_degree=7):
        el = self.elements[ci]
        pts, wts = simplex_rule(2, quad_degree)
        B = (el.verts[1:] - el.verts[0]).T
        det = abs(np.linalg.det(B))
        x = el.verts[0][None, :] + pts @ B.T
        mvals = _mono_values((x - el.center[None, :]) / el.scale, _EXP3)
        nm = len(_EXP3)
        phi = np.empty((len(pts), 24, 3))
        for ch in range(3):
            phi[:, :, ch] = mvals @ el.basis[ch * nm : (ch + 1) * nm, :]
        return x, wts * det, phi, el

    def _div_coeff_matrix(self, ci):
        """Columns: coefficients of div of each stress shape over the local u basis."""
        el = self.elements[ci]
        nm = len(_EXP3)
        dx = _deriv_coeffs(_EXP3, 0) / el.scale
        dy = _deriv_coeffs(_EXP3, 1) / el.scale
        divx = dx @ el.basis[0:nm] + dy @ el.basis[nm : 2 * nm]
        divy = dx @ el.basis[nm : 2 * nm] + dy @ el.basis[2 * nm :]
        lin = [i for i, e in enumerate(_EXP3) if sum(e) <= 1]
        higher = [i for i in range(nm) if i not in lin]
        if max(
            np.abs(divx[higher]).max(initial=0.0), np.abs(divy[higher]).max(initial=0.0)
        ) > 1e-9 * max(np.abs(el.basis).max(), 1.0):
            raise RuntimeError("stress shape divergence left the linear space")
        out = np.zeros((6, 24))
        for li, mono in enumerate(lin):
            out[2 * li, :] = divx[mono]
            out[2 * li + 1, :] = divy[mono]
        return out, lin

    def _u_mass_and_monos(self, ci, quad_degree=5):
        el = self.elements[ci]
        pts, wts = simplex_rule(2, quad_degree)
        B = (el.verts[1:] - el.verts[0]).T
        det = abs(np.linalg.det(B))
        x = el.verts[0][None, :] + pts @ B.T
        lin_exps = [(0, 0), (1, 0), (0, 1)]
        monos = _mono_values((x - el.center[None, :]) / el.scale, lin_exps)
        scal = np.einsum("q,qa,qb->ab", wts * det, monos, monos)
        M = np.zeros((6, 6))
        M[0::2, 0::2] = scal
        M[1::2, 1::2] = scal
        return M, x, monos, wts * det

    def assemble(self):
        if self._assembled is not None:
            return self._assembled
        w3 = self._frob_weights()
        ab = TripletBuilder(self.dim_sigma, self.dim_sigma)
        bb = TripletBuilder(self.dim_u, self.dim_sigma)
        mb = TripletBuilder(self.dim_u, self.dim_u)
        for ci in range(len(self.mesh.cells)):
            x, w, phi, el = self._cell_tabulations(ci)
            aphi = self._compliance_apply(phi)
            localA = np.einsum("q,qic,c,qjc->ij", w, aphi, w3, phi)
            sids = self.cell_sigma_dofs(ci)
            ab.add_block(sids, sids, localA)
            Dc, lin = self._div_coeff_matrix(ci)
            Mu, xq, monos, wq = self._u_mass_and_monos(ci)
            # int div(sig) . v : expand both over the scaled monomials
            localB = np.zeros((6, 24))
            gram = np.einsum("q,qa,qb->ab", wq, monos, monos)
            for li in range(3):
                for lj in range(3):
                    localB[2 * li, :] += gram[li, lj] * Dc[2 * lj, :]
                    localB[2 * li + 1, :] += gram[li, lj] * Dc[2 * lj + 1, :]
            uids = self.cell_u_dofs(ci)
            bb.add_block(uids, sids, localB)
            mb.add_block(uids, uids, Mu)
        self._assembled = (ab.to_csr(), bb.to_csr(), mb.to_csr())
        return self._assembled

    def solve(self, f):
        """Solve for (sigma, u) with load f(points)->(m,2); returns coefficient pair."""
        A, B, Mu = self.assemble()
        F = np.zeros(self.dim_u)
        for ci in range(len(self.mesh.cells)):
            _, xq, monos, wq = self._u_mass_and_monos(ci)
            fv = np.asarray(f(xq), dtype=float)
            loc = np.zeros(6)
            loc[0::2] = np.einsum("q,qa,q->a", wq, monos, fv[:, 0])
            loc[1::2] = np.einsum("q,qa,q->a", wq, monos, fv[:, 1])
            F[self.cell_u_dofs(ci)] = loc
        K = sp.bmat([[A, B.T], [B, None]], format="csr")
        rhs = np.concatenate([np.zeros(self.dim_sigma), F])
        fac = factor_symmetric_indefinite(K)
        x = fac.solve(rhs)
        resid = np.linalg.norm(K @ x - rhs) / max(np.linalg.norm(rhs), 1e-30)
        if resid > 1e-8:
            raise RuntimeError(f"elasticity saddle residual {resid:.2e}")
        return x[: self.dim_sigma], x[self.dim_sigma :], resid

    # ---- measures ------------------------------------------------------

    def stress_error(self, sigma, exact, quad_degree=9):
        """L2 error of the stress field; ``exact`` maps points to (m,3) channels."""
        w3 = self._frob_weights()
        total = 0.0
        for ci in range(len(self.mesh.cells)):
            x, w, phi, el = self._cell_tabulations(ci, quad_degree)
            vals = np.einsum("i,qic->qc", sigma[self.cell_sigma_dofs(ci)], phi)
            diff = vals - np.asarray(exact(x), dtype=float)
            total += float(np.einsum("q,qc,c->", w, diff**2, w3))
        return math.sqrt(max(total, 0.0))

    def displacement_error(self, u, exact, quad_degree=7):
        total = 0.0
        for ci in range(len(self.mesh.cells)):
            _, xq, monos, wq = self._u_mass_and_monos(ci, quad_degree)
            loc = u[self.cell_u_dofs(ci)]
            vals = np.column_stack([monos @ loc[0::2], monos @ loc[1::2]])
            diff = vals - np.asarray(exact(xq), dtype=float)
            total += float(np.einsum("q,qs->", wq, diff**2))
        return math.sqrt(max(total, 0.0))

    def equilibrium_defect(self, sigma, f):
        """|| div sigma_h - P f || with P the elementwise L2 projection.

        Uses the same quadrature as the assembled load so the identity is
        structural: the measured defect is solver residual, not quadrature
        disagreement about a non-polynomial f.
        """
        total = 0.0
        for ci in range(len(self.mesh.cells)):
            Dc, lin = self._div_coeff_matrix(ci)
            Mu, xq, monos, wq = self._u_mass_and_monos(ci)
            loc = Dc @ sigma[self.cell_sigma_dofs(ci)]
            fv = np.asarray(f(xq), dtype=float)
            rhs = np.zeros(6)
            rhs[0::2] = np.einsum("q,qa,q->a", wq, monos, fv[:, 0])
            rhs[1::2] = np.einsum("q,qa,q->a", wq, monos, fv[:, 1])
            proj = np.linalg.solve(Mu, rhs)
            dloc = loc - proj
            vals = np.column_stack([monos @ dloc[0::2], monos @ dloc[1::2]])
            total += float(np.einsum("q,qs->", wq, vals**2))
        return math.sqrt(max(total, 0.0))

    def infsup_proxy(self):
        """min |eig| of the saddle pencil against the graph norms; dense."""
        from .linalg import sym_generalized_eig

        A, B, Mu = self.assemble()
        Sdd = (B.T @ spla.spsolve(Mu.tocsc(), B.tocsc())).tocsr()
        K = sp.bmat([[A, B.T], [B, None]], format="csr")
        N = sp.block_diag([(A + Sdd).tocsr(), Mu], format="csr")
        vals, _ = sym_generalized_eig(K.toarray(), N.toarray(), check=False)
        return float(np.min(np.abs(vals)))
