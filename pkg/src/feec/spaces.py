"""Assembled finite element spaces of differential forms on a mesh.

A global space pairs a reference element with a mesh: one block of degrees of
freedom per face, numbered by face dimension then face index, weights within a
face in reference order.  Because both cells and faces are sorted vertex
tuples, every local-to-global sign is +1 and a shared face induces one
functional, so single-valuedness of the degrees of freedom is built in.

The essential-boundary variant deletes DOF blocks on boundary faces (zero
trace).  Canonical interpolation evaluates the face moments of a sampled
field by quadrature on each face; the Clement variant replaces the field
near each face by its L2 projection onto polynomials over the face's cell
patch before taking the moment, which keeps it defined for rough fields.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .altforms import increasing_tuples
from .linalg import TripletBuilder
from .polyforms import SpaceSpec, space_dimension
from .quadrature import simplex_rule
from .reference import reference_element


class FormSampler:
    """Pointwise coefficient evaluator for a k-form field.

    ``fn`` maps an array of points (m, n) to coefficients (m, C(n,k)) in the
    lexicographic basis-tuple order.  ``degree`` declares polynomial degree
    when known; interpolation uses it to pick an exact quadrature rule.
    """

    def __init__(self, n, k, fn, degree=None):
        self.n = n
        self.k = k
        self.fn = fn
        self.degree = degree
        self.ncomp = math.comb(n, k)

    def __call__(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.n)
        vals = np.asarray(self.fn(points), dtype=float)
        vals = vals.reshape(len(points), self.ncomp)
        return vals

    @classmethod
    def from_polyform(cls, omega):
        tuples = increasing_tuples(omega.n, omega.k)
        tindex = {t: i for i, t in enumerate(tuples)}
        terms = [(alpha, tindex[sigma], float(c)) for (alpha, sigma), c in omega.terms.items()]

        def fn(pts):
            out = np.zeros((len(pts), len(tuples)))
            for alpha, col, c in terms:
                mono = np.full(len(pts), c)
                for ax, a in enumerate(alpha):
                    if a:
                        mono = mono * pts[:, ax] ** a
                out[:, col] += mono
            return out

        return cls(omega.n, omega.k, fn, degree=max(omega.degree(), 0))


def _minor_matrix(mat, row_tuples, col_tuples):
    """dets of the submatrices mat[rows, cols] for every tuple pair."""
    out = np.empty((len(row_tuples), len(col_tuples)))
    for i, rows in enumerate(row_tuples):
        for j, cols in enumerate(col_tuples):
            if len(rows) == 0:
                out[i, j] = 1.0
            elif len(rows) == 1:
                out[i, j] = mat[rows[0], cols[0]]
            else:
                out[i, j] = np.linalg.det(mat[np.ix_(rows, cols)])
    return out


class FESpace:
    def __init__(self, mesh, spec, bc="natural"):
        if isinstance(spec, tuple):
            spec = SpaceSpec(*spec, n=mesh.n) if len(spec) == 3 else SpaceSpec(*spec)
        if spec.n != mesh.n:
            raise ValueError("space and mesh dimensions differ")
        if bc not in ("natural", "essential"):
            raise ValueError("bc must be 'natural' or 'essential'")
        self.mesh = mesh
        self.spec = spec.canonical()
        self.bc = bc
        self.k = self.spec.k
        self.r = self.spec.r
        self.element = reference_element(mesh.n, self.spec.family, self.spec.r, self.spec.k)

        n = mesh.n
        self._face_base = {}
        next_id = 0
        boundary = {
            d: set(mesh.face_index(d, f) for f in mesh.boundary_faces(d))
            for d in range(n + 1)
        }
        for d in range(n + 1):
            blk = self.element.block.get(d, 0)
            base = np.full(mesh.num_faces(d), -1, dtype=int)
            if blk:
                for fi in range(mesh.num_faces(d)):
                    if bc == "essential" and fi in boundary[d]:
                        continue
                    base[fi] = next_id
                    next_id += blk
            self._face_base[d] = base
        self.dim = next_id

        ldofs = self.element.dofs
        table = np.empty((len(mesh.cells), len(ldofs)), dtype=int)
        for ci, cell in enumerate(mesh.cells):
            for li, (d, lface, widx) in enumerate(ldofs):
                gface = tuple(cell[v] for v in lface)
                base = self._face_base[d][mesh.face_index(d, gface)]
                table[ci, li] = -1 if base < 0 else base + widx
        self._cell_dofs = table

        self._geometry = []
        tuples_k = increasing_tuples(n, self.k)
        for ci in range(len(mesh.cells)):
            B, offset = mesh.cell_affine(ci)
            det = float(np.linalg.det(B))
            Cinv = np.linalg.inv(B)
            G = _minor_matrix(Cinv, tuples_k, tuples_k)
            self._geometry.append((B, offset, det, Cinv, G))
        self._minor_cache = {self.k: [g[4] for g in self._geometry]}

    # ---- bookkeeping --------------------------------------------------

    def cell_dofs(self, ci):
        return self._cell_dofs[ci]

    def face_dof_ids(self, d, fi):
        base = self._face_base[d][fi]
        if base < 0:
            return []
        return list(range(base, base + self.element.block[d]))

    def dof_table_text(self):
        """One line per global DOF: 'dim face_id functional_index'."""
        rows = [None] * self.dim
        for d in range(self.mesh.n + 1):
            blk = self.element.block.get(d, 0)
            base = self._face_base[d]
            for fi, b in enumerate(base):
                if b < 0:
                    continue
                for w in range(blk):
                    rows[b + w] = f"{d} {fi} {w}"
        return "\n".join(rows) + "\n"

    def pullback_minors(self, form_degree):
        """Per-cell minor matrices mapping reference coefficients of that degree."""
        if form_degree not in self._minor_cache:
            n = self.mesh.n
            tuples = increasing_tuples(n, form_degree)
            out = []
            for B, offset, det, Cinv, G in self._geometry:
                out.append(_minor_matrix(Cinv, tuples, tuples))
            self._minor_cache[form_degree] = out
        return self._minor_cache[form_degree]

    def cell_geometry(self, ci):
        return self._geometry[ci]

    def default_quad_degree(self):
        return 2 * self.r + 2

    # ---- evaluation ---------------------------------------------------

    def local_coefficients(self, coeffs, ci):
        ids = self._cell_dofs[ci]
        out = np.where(ids >= 0, np.asarray(coeffs, dtype=float)[np.clip(ids, 0, None)], 0.0)
        return out

    def evaluate(self, coeffs, ci, ref_points):
        """Physical coefficient values (npoints, C(n,k)) of the FE field on one cell."""
        phi = self.element.tabulate(ref_points)
        G = self._geometry[ci][4]
        u = self.local_coefficients(coeffs, ci)
        return np.einsum("i,qit,ts->qs", u, phi, G)

    def evaluate_d(self, coeffs, ci, ref_points):
        """Values of the exterior derivative of the FE field on one cell."""
        dphi = self.element.tabulate_d(ref_points)
        Gd = self.pullback_minors(self.k + 1)[ci]
        u = self.local_coefficients(coeffs, ci)
        return np.einsum("i,qit,ts->qs", u, dphi, Gd)

    def locate(self, points, pad=1e-9):
        """Containing cell and reference coordinates for each physical point.

        Vectorized over all (point, cell) pairs; points on shared faces go to
        the lowest-index containing cell.  Raises for points outside the mesh.
        """
        points = np.asarray(points, dtype=float).reshape(-1, self.mesh.n)
        if not hasattr(self, "_loc_arrays"):
            Cinv = np.stack([g[3] for g in self._geometry])
            offs = np.stack([g[1] for g in self._geometry])
            self._loc_arrays = (Cinv, offs)
        Cinv, offs = self._loc_arrays
        rel = points[:, None, :] - offs[None, :, :]
        xi = np.einsum("cij,pcj->pci", Cinv, rel)
        inside = (xi.min(axis=2) >= -pad) & (xi.sum(axis=2) <= 1.0 + pad)
        if not inside.any(axis=1).all():
            missing = points[~inside.any(axis=1)][0]
            raise ValueError(f"point {missing} lies outside the mesh")
        cells = inside.argmax(axis=1)
        return cells, xi[np.arange(len(points)), cells]

    def evaluate_at_points(self, coeffs, points, pad=1e-9):
        """Evaluate at arbitrary physical points, locating cells first."""
        points = np.asarray(points, dtype=float).reshape(-1, self.mesh.n)
        cells, xi = self.locate(points, pad)
        out = np.zeros((len(points), math.comb(self.mesh.n, self.k)))
        for ci in np.unique(cells):
            sel = cells == ci
            out[sel] = self.evaluate(coeffs, ci, xi[sel])
        return out

    def as_sampler(self, coeffs):
        """View an FE field as a sampler usable on any other mesh of the domain."""
        return FormSampler(
            self.mesh.n, self.k, lambda pts: self.evaluate_at_points(coeffs, pts, pad=1e-8)
        )

    # ---- integration --------------------------------------------------

    def mass_matrix(self, quad_degree=None, coeff=None):
        """Assemble the (optionally weighted) mass matrix as CSR.

        ``coeff`` is a callable points -> (npoints, C(n,k), C(n,k)) giving a
        symmetric positive-definite weight at each point; identity if None.
        """
        qd = self.default_quad_degree() if quad_degree is None else quad_degree
        pts, wts, phi = self.element.tabulation(qd)
        builder = TripletBuilder(self.dim, self.dim)
        for ci in range(len(self.mesh.cells)):
            B, offset, det, Cinv, G = self._geometry[ci]
            phys = np.einsum("qit,ts->qis", phi, G)
            if coeff is None:
                local = np.einsum("q,qis,qjs->ij", wts * abs(det), phys, phys)
            else:
                x = offset[None, :] + pts @ B.T
                a = np.asarray(coeff(x), dtype=float)
                local = np.einsum("q,qis,qst,qjt->ij", wts * abs(det), phys, a, phys)
            builder.add_block(self._cell_dofs[ci], self._cell_dofs[ci], local)
        return builder.to_csr()

    def load_vector(self, sampler, quad_degree=None, coeff=None):
        """Moments of a sampled field against the global basis."""
        qd = quad_degree
        if qd is None:
            extra = sampler.degree if sampler.degree is not None else self.r + 1
            qd = self.r + extra + 2
        pts, wts, phi = self.element.tabulation(qd)
        out = np.zeros(self.dim)
        for ci in range(len(self.mesh.cells)):
            B, offset, det, Cinv, G = self._geometry[ci]
            x = offset[None, :] + pts @ B.T
            vals = sampler(x)
            if coeff is not None:
                vals = np.einsum("qst,qt->qs", np.asarray(coeff(x), dtype=float), vals)
            phys = np.einsum("qit,ts->qis", phi, G)
            local = np.einsum("q,qis,qs->i", wts * abs(det), phys, vals)
            ids = self._cell_dofs[ci]
            keep = ids >= 0
            np.add.at(out, ids[keep], local[keep])
        return out

    def l2_norm(self, coeffs, quad_degree=None):
        return self.l2_error(coeffs, None, quad_degree)

    def l2_error(self, coeffs, sampler, quad_degree=None):
        """L2 distance between the FE field and a sampled field (or 0)."""
        qd = (2 * self.r + 3) if quad_degree is None else quad_degree
        pts, wts, phi = self.element.tabulation(qd)
        total = 0.0
        for ci in range(len(self.mesh.cells)):
            B, offset, det, Cinv, G = self._geometry[ci]
            vals = np.einsum("i,qit,ts->qs", self.local_coefficients(coeffs, ci), phi, G)
            if sampler is not None:
                x = offset[None, :] + pts @ B.T
                vals = vals - sampler(x)
            total += float(np.einsum("q,qs,qs->", wts * abs(det), vals, vals))
        return math.sqrt(max(total, 0.0))

    def l2_error_d(self, coeffs, sampler, quad_degree=None):
        """L2 distance between d of the FE field and a sampled (k+1)-form field."""
        qd = (2 * self.r + 3) if quad_degree is None else quad_degree
        pts, wts, dphi = self.element.d_tabulation(qd)
        minors = self.pullback_minors(self.k + 1)
        total = 0.0
        for ci in range(len(self.mesh.cells)):
            B, offset, det, Cinv, G = self._geometry[ci]
            vals = np.einsum("i,qit,ts->qs", self.local_coefficients(coeffs, ci), dphi, minors[ci])
            if sampler is not None:
                x = offset[None, :] + pts @ B.T
                vals = vals - sampler(x)
            total += float(np.einsum("q,qs,qs->", wts * abs(det), vals, vals))
        return math.sqrt(max(total, 0.0))

    # ---- interpolation ------------------------------------------------

    def _face_moments(self, sampler, d, fi, quad_degree):
        """DOF block values of a sampled field on one face."""
        pts, wts, eta_vals, signs, comp_of = self.element.weight_tabulation(d, quad_degree)
        A, offset = self.mesh.face_affine(d, fi)
        x = offset[None, :] + pts @ A.T if d else offset.reshape(1, -1)
        vals = sampler(x)
        trace_tuples = increasing_tuples(d, self.k)
        amb_tuples = increasing_tuples(self.mesh.n, self.k)
        P = _minor_matrix(A, amb_tuples, trace_tuples)
        traced = vals @ P
        paired = traced * signs[None, :]
        block = np.empty(eta_vals.shape[0])
        for m in range(eta_vals.shape[0]):
            block[m] = float(np.einsum("q,qt->", wts, paired * eta_vals[m][:, list(comp_of)]))
        return block

    def interpolation_info(self, sampler):
        wdeg = self.element.max_weight_degree()
        if sampler.degree is not None:
            return {"quad_degree": sampler.degree + wdeg, "exact": True}
        return {"quad_degree": 2 * self.r + 3 + wdeg, "exact": False}

    def interpolate(self, sampler, quad_degree=None):
        """Canonical interpolation: face trace moments against the DOF weights."""
        if sampler.k != self.k or sampler.n != self.mesh.n:
            raise ValueError("sampler degree/dimension mismatch")
        qd = self.interpolation_info(sampler)["quad_degree"] if quad_degree is None else quad_degree
        out = np.zeros(self.dim)
        for d in range(self.mesh.n + 1):
            blk = self.element.block.get(d, 0)
            if not blk:
                continue
            base = self._face_base[d]
            for fi in range(self.mesh.num_faces(d)):
                if base[fi] < 0:
                    continue
                out[base[fi] : base[fi] + blk] = self._face_moments(sampler, d, fi, qd)
        return out

    def clement_interpolate(self, sampler, quad_degree=None):
        """Patch-projection interpolation, defined for merely square-integrable fields.

        For each face the field is first L2-projected onto polynomial forms of
        the shape-space degree over the union of cells containing the face,
        then the face's DOF block is taken from that polynomial.  Bounded on
        L2 but not a projection onto the FE space.
        """
        s = self.r if self.spec.family == "P" else self.r - 1
        n = self.mesh.n
        qd = (2 * max(s, self.r) + 3) if quad_degree is None else quad_degree
        ncomp = math.comb(n, self.k)
        exps = [a for a in itertools.product(range(s + 1), repeat=n) if sum(a) <= s]
        nb = len(exps) * ncomp
        pts, wts = simplex_rule(n, qd)

        def poly_values(x, center):
            rel = x - center[None, :]
            monos = np.stack(
                [np.prod(rel ** np.array(a)[None, :], axis=1) for a in exps], axis=1
            )
            return monos

        out = np.zeros(self.dim)
        for d in range(n + 1):
            blk = self.element.block.get(d, 0)
            if not blk:
                continue
            base = self._face_base[d]
            for fi in range(self.mesh.num_faces(d)):
                if base[fi] < 0:
                    continue
                patch = self.mesh.cells_containing(d, fi)
                center = np.mean(
                    [self.mesh.vertices[v] for ci in patch for v in self.mesh.cells[ci]],
                    axis=0,
                )
                gram = np.zeros((nb, nb))
                rhs = np.zeros(nb)
                for ci in patch:
                    B, offset, det, Cinv, G = self._geometry[ci]
                    x = offset[None, :] + pts @ B.T
                    monos = poly_values(x, center)
                    vals = sampler(x)
                    w = wts * abs(det)
                    mm = np.einsum("q,qa,qb->ab", w, monos, monos)
                    for comp in range(ncomp):
                        sl = slice(comp * len(exps), (comp + 1) * len(exps))
                        gram[sl, sl] += mm
                        rhs[sl.start : sl.stop] += np.einsum("q,qa,q->a", w, monos, vals[:, comp])
                coeff = np.linalg.solve(gram, rhs)

                def proj_sampler_fn(x, coeff=coeff, center=center):
                    monos = poly_values(np.asarray(x, dtype=float), center)
                    vals = np.empty((len(monos), ncomp))
                    for comp in range(ncomp):
                        vals[:, comp] = monos @ coeff[comp * len(exps) : (comp + 1) * len(exps)]
                    return vals

                proj = FormSampler(n, self.k, proj_sampler_fn, degree=s)
                out[base[fi] : base[fi] + blk] = self._face_moments(
                    proj, d, fi, s + self.element.max_weight_degree()
                )
        return out

    def __repr__(self):
        return (
            f"FESpace({self.spec.label()}, {self.bc}, dim={self.dim}, "
            f"cells={len(self.mesh.cells)})"
        )


def assemble_space(mesh, spec, bc="natural"):
    return FESpace(mesh, spec, bc)


def check_dimension_formula(space):
    """Global dim equals the sum of per-face weight-space dimensions."""
    mesh, el = space.mesh, space.element
    total = 0
    for d in range(mesh.n + 1):
        blk = el.block.get(d, 0)
        if space.bc == "essential":
            nf = mesh.num_faces(d) - len(mesh.boundary_faces(d))
        else:
            nf = mesh.num_faces(d)
        total += blk * nf
    return total == space.dim and len(el.dofs) == space_dimension(space.spec)
