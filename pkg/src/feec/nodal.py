"""Continuous piecewise-linear vector fields on 2D meshes.

This is the classical nodal discretization used as a counterpoint to the
compatible spaces: two unknowns per vertex, boundary conditions imposed by
constraining the vector at boundary vertices.  It assembles the rotation and
divergence quadratic forms, solves source problems, and computes constrained
eigenvalue problems.  None of its failure modes are worked around; they are
what the comparisons are after.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .linalg import TripletBuilder, rank_and_nullspace

CORNER_ANGLE = math.radians(20.0)


class VectorLagrangeP1:
    """Vector P1 space with optional boundary constraint.

    ``constraint`` is None (free), 'normal' (zero normal component on the
    boundary), or 'tangential' (zero tangential component).  A boundary
    vertex whose two boundary edges bend by more than ~20 degrees counts as a
    corner and is clamped completely; milder bends (a polygon approximating a
    smooth curve) keep one degree of freedom along the averaged direction.
    """

    def __init__(self, mesh, constraint=None):
        if mesh.n != 2:
            raise ValueError("nodal comparison spaces are two-dimensional")
        if constraint not in (None, "normal", "tangential"):
            raise ValueError("constraint must be None, 'normal', or 'tangential'")
        self.mesh = mesh
        self.constraint = constraint
        nv = len(mesh.vertices)
        self.nfull = 2 * nv

        cols = []
        if constraint is None:
            R = sp.identity(self.nfull, format="csr")
        else:
            edge_dirs = {}
            for e in mesh.boundary_facets():
                t = np.asarray(mesh.vertices[e[1]]) - np.asarray(mesh.vertices[e[0]])
                t = t / np.linalg.norm(t)
                for v in e:
                    edge_dirs.setdefault(v, []).append(t)
            for v in range(nv):
                if v not in edge_dirs:
                    cols.append((2 * v, np.array([1.0, 0.0])))
                    cols.append((2 * v, np.array([0.0, 1.0])))
                    continue
                dirs = edge_dirs[v]
                if len(dirs) != 2:
                    continue
                t0, t1 = dirs
                if t0 @ t1 < 0:
                    t1 = -t1
                if abs(t0[0] * t1[1] - t0[1] * t1[0]) > math.sin(CORNER_ANGLE):
                    continue
                tbar = t0 + t1
                tbar = tbar / np.linalg.norm(tbar)
                nbar = np.array([tbar[1], -tbar[0]])
                allowed = tbar if constraint == "normal" else nbar
                cols.append((2 * v, allowed))
            b = TripletBuilder(self.nfull, len(cols))
            for j, (row0, vec) in enumerate(cols):
                b.add(row0, j, vec[0])
                b.add(row0 + 1, j, vec[1])
            R = b.to_csr()
        self.R = R
        self.dim = R.shape[1]

    # ---- element quantities -------------------------------------------

    def _cell_gradients(self, ci):
        """Gradients of the three barycentric hat functions and the area."""
        mesh = self.mesh
        cell = mesh.cells[ci]
        B, offset = mesh.cell_affine(ci)
        det = np.linalg.det(B)
        Cinv = np.linalg.inv(B)
        grads = np.zeros((3, 2))
        grads[1:] = Cinv
        grads[0] = -Cinv.sum(axis=0)
        return cell, grads, abs(det) / 2.0

    def _scatter(self, cell):
        out = np.empty(6, dtype=int)
        for a, v in enumerate(cell):
            out[2 * a] = 2 * v
            out[2 * a + 1] = 2 * v + 1
        return out

    def _form_matrix(self, kind):
        b = TripletBuilder(self.nfull, self.nfull)
        for ci in range(len(self.mesh.cells)):
            cell, grads, area = self._cell_gradients(ci)
            if kind == "curl":
                # curl(phi e_x) = -dphi/dy, curl(phi e_y) = dphi/dx
                row = np.empty(6)
                row[0::2] = -grads[:, 1]
                row[1::2] = grads[:, 0]
                local = area * np.outer(row, row)
            elif kind == "div":
                row = np.empty(6)
                row[0::2] = grads[:, 0]
                row[1::2] = grads[:, 1]
                local = area * np.outer(row, row)
            else:
                raise ValueError(kind)
            ids = self._scatter(cell)
            b.add_block(ids, ids, local)
        return b.to_csr()

    def curl_matrix(self):
        return self._form_matrix("curl")

    def div_matrix(self):
        return self._form_matrix("div")

    def mass_matrix(self):
        b = TripletBuilder(self.nfull, self.nfull)
        base = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
        for ci in range(len(self.mesh.cells)):
            cell, grads, area = self._cell_gradients(ci)
            local = np.zeros((6, 6))
            local[0::2, 0::2] = area * base
            local[1::2, 1::2] = area * base
            ids = self._scatter(cell)
            b.add_block(ids, ids, local)
        return b.to_csr()

    def load_vector(self, fx, quad_degree=4):
        """Moments of a vector field given as fx(points)->(m,2)."""
        from .quadrature import simplex_rule

        pts, wts = simplex_rule(2, quad_degree)
        lam = np.column_stack([1.0 - pts.sum(axis=1), pts[:, 0], pts[:, 1]])
        out = np.zeros(self.nfull)
        for ci in range(len(self.mesh.cells)):
            cell = self.mesh.cells[ci]
            B, offset = self.mesh.cell_affine(ci)
            det = abs(np.linalg.det(B))
            x = offset[None, :] + pts @ B.T
            f = np.asarray(fx(x), dtype=float)
            w = wts * det
            for a, v in enumerate(cell):
                out[2 * v] += float(np.sum(w * lam[:, a] * f[:, 0]))
                out[2 * v + 1] += float(np.sum(w * lam[:, a] * f[:, 1]))
        return out

    # ---- reductions ----------------------------------------------------

    def reduce(self, A):
        return (self.R.T @ A @ self.R).tocsr()

    def expand(self, x):
        return self.R @ x

    # ---- solves ---------------------------------------------------------

    def solve_vector_laplacian(self, fx):
        """Least-energy solve of the rot-rot + div-div form against f.

        Returns full-length coefficients (2 per vertex).  A singular or
        nearly singular reduced operator falls back to the pseudoinverse
        solution, which is the honest outcome of applying this method where
        it does not work.
        """
        A = self.reduce(self.curl_matrix() + self.div_matrix())
        F = self.R.T @ self.load_vector(fx)
        Ad = A.toarray()
        try:
            x = np.linalg.solve(Ad, F)
            if not np.all(np.isfinite(x)) or np.linalg.norm(Ad @ x - F) > 1e-8 * max(
                np.linalg.norm(F), 1e-30
            ):
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            x, *_ = np.linalg.lstsq(Ad, F, rcond=None)
        return self.expand(x)

    def eigenvalues_penalized(self, count):
        """Smallest eigenvalues of the rot-rot + div-div form."""
        from scipy.linalg import eigh

        A = self.reduce(self.curl_matrix() + self.div_matrix()).toarray()
        M = self.reduce(self.mass_matrix()).toarray()
        vals = eigh(A, M, eigvals_only=True)
        return vals[:count]

    def eigenvalues_constrained_curl(self, count):
        """Eigenvalues of the rot-rot form on discretely divergence-free fields.

        The divergence constraint is tested against continuous P1 scalars
        vanishing on the boundary; the reduced pencil is solved densely.
        """
        from scipy.linalg import eigh

        mesh = self.mesh
        nv = len(mesh.vertices)
        boundary = set(v for e in mesh.boundary_facets() for v in e)
        interior = [v for v in range(nv) if v not in boundary]
        qcol = {v: i for i, v in enumerate(interior)}
        b = TripletBuilder(len(interior), self.nfull)
        for ci in range(len(mesh.cells)):
            cell, grads, area = self._cell_gradients(ci)
            lam_int = area / 3.0
            for aq, vq in enumerate(cell):
                if vq not in qcol:
                    continue
                for av, vv in enumerate(cell):
                    # int (phi_v e_x) . grad lam_q and the e_y partner
                    b.add(qcol[vq], 2 * vv, lam_int * grads[aq, 0])
                    b.add(qcol[vq], 2 * vv + 1, lam_int * grads[aq, 1])
        Cmat = b.to_csr()
        Cred = (Cmat @ self.R).toarray()
        _, Z = rank_and_nullspace(Cred)
        A = Z.T @ self.reduce(self.curl_matrix()).toarray() @ Z
        M = Z.T @ self.reduce(self.mass_matrix()).toarray() @ Z
        vals = eigh(0.5 * (A + A.T), 0.5 * (M + M.T), eigvals_only=True)
        return vals[:count]

    # ---- evaluation -----------------------------------------------------

    def values_on_cell(self, coeffs, ci, ref_points):
        cell = self.mesh.cells[ci]
        lam = np.column_stack(
            [1.0 - ref_points.sum(axis=1), ref_points[:, 0], ref_points[:, 1]]
        )
        vx = sum(lam[:, a] * coeffs[2 * v] for a, v in enumerate(cell))
        vy = sum(lam[:, a] * coeffs[2 * v + 1] for a, v in enumerate(cell))
        return np.column_stack([vx, vy])


def l2_difference(space, coeffs, nodal, nodal_coeffs, quad_degree=None):
    """Relative L2 distance between an FE 1-form field and a nodal vector field.

    Both are evaluated cellwise on the shared mesh; the 1-form components are
    read as a vector field.  Returns ||u_fe - u_nodal|| / ||u_fe||.
    """
    if space.mesh is not nodal.mesh:
        raise ValueError("fields live on different meshes")
    qd = (2 * space.r + 3) if quad_degree is None else quad_degree
    from .quadrature import simplex_rule

    pts, wts = simplex_rule(2, qd)
    num = 0.0
    den = 0.0
    for ci in range(len(space.mesh.cells)):
        det = abs(space.cell_geometry(ci)[2])
        ufe = space.evaluate(coeffs, ci, pts)
        uno = nodal.values_on_cell(nodal_coeffs, ci, pts)
        w = wts * det
        num += float(np.einsum("q,qs->", w, (ufe - uno) ** 2))
        den += float(np.einsum("q,qs->", w, ufe**2))
    return math.sqrt(num / max(den, 1e-300))
