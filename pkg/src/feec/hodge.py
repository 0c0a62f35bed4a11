"""Mixed solvers on a discrete complex: source problems, eigenproblems,
stability measurement, and generic mixed pairs outside the stable families.

The source problem at degree k seeks (sigma, u, p) with sigma = delta u,
d sigma + delta d u = f - p, u orthogonal to harmonics.  The saddle matrix is
assembled once, symmetrized by negating the first block equation, and handed
to a symmetric indefinite factorization that reports singularity instead of
silently regularizing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linalg import TOL, factor_spd, factor_symmetric_indefinite, sym_generalized_eig
from .spaces import FESpace, FormSampler


def _as_load(space, f):
    if isinstance(f, FormSampler):
        return space.load_vector(f)
    return np.asarray(f, dtype=float)


@dataclass
class SourceSolution:
    k: int
    sigma: np.ndarray | None
    u: np.ndarray
    p: np.ndarray
    harmonic_coeffs: np.ndarray
    residual: float
    inertia: tuple | None


def solve_source(cx, k, f):
    """Solve the degree-k mixed source problem on the complex ``cx``.

    ``f`` is a FormSampler for the load or an already assembled moment
    vector against the degree-k basis.  Returns a SourceSolution; raises
    ValueError if the saddle matrix is singular and RuntimeError if the
    factored solve fails the residual check.
    """
    n = cx.n
    if not 0 <= k <= n:
        raise ValueError(f"degree {k} outside 0..{n}")
    Vk = cx.space(k)
    F = _as_load(Vk, f)
    M = cx.mass(k)
    H = cx.harmonic_basis(k)
    nh = H.shape[1]
    G = M @ H if nh else None

    blocks = []
    rhs_parts = []
    if k > 0:
        A = cx.mass(k - 1)
        B = (cx.derivative(k - 1).T @ M).tocsr()
        C = cx.stiffness(k) if k < n else sp.csr_matrix((Vk.dim, Vk.dim))
        row0 = [-A, B, None if nh == 0 else sp.csr_matrix((A.shape[0], nh))]
        row1 = [B.T, C, None if nh == 0 else sp.csr_matrix(G)]
        rows = [row0, row1]
        rhs_parts = [np.zeros(A.shape[0]), F]
        if nh:
            rows.append([sp.csr_matrix((nh, A.shape[0])), sp.csr_matrix(G.T), None])
            rhs_parts.append(np.zeros(nh))
        K = sp.bmat(
            [[b for b in row] for row in rows]
            if nh
            else [[row0[0], row0[1]], [row1[0], row1[1]]],
            format="csr",
        )
        sizes = (A.shape[0], Vk.dim, nh)
    else:
        C = cx.stiffness(0)
        if nh:
            K = sp.bmat([[C, sp.csr_matrix(G)], [sp.csr_matrix(G.T), None]], format="csr")
        else:
            K = C.tocsr()
        rhs_parts = [F] + ([np.zeros(nh)] if nh else [])
        sizes = (0, Vk.dim, nh)

    rhs = np.concatenate(rhs_parts)
    fac = factor_symmetric_indefinite(K)
    x = fac.solve(rhs)
    resid = np.linalg.norm(K @ x - rhs) / max(np.linalg.norm(rhs), 1e-30)
    if resid > TOL.residual:
        raise RuntimeError(f"saddle solve residual {resid:.2e} exceeds {TOL.residual:.0e}")

    ns, nu, nh_ = sizes
    sigma = x[:ns] if ns else None
    u = x[ns : ns + nu]
    p_coeffs = x[ns + nu :]
    p = H @ p_coeffs if nh_ else np.zeros(nu)
    return SourceSolution(k, sigma, u, p, p_coeffs, resid, fac.inertia)


def solve_B_star(cx, k, f, post_project=True):
    """Source solve with the load restricted to the coexact component.

    The load is L2-projected into the degree-k space, its exact and harmonic
    parts are discarded (their joint norm is reported), and the mixed system
    is solved for the remaining part.  The solution u then lies in the
    coexact subspace; ``post_project`` re-splits it to scrub rounding.
    Returns (solution, info dict).
    """
    Vk = cx.space(k)
    F = _as_load(Vk, f)
    f_h = cx.mass_factor(k).solve(F)
    f_B, f_H, f_Bs = cx.hodge_decompose(k, f_h)
    dropped = math.sqrt(max(cx.inner(k, f_B, f_B) + cx.inner(k, f_H, f_H), 0.0))
    sol = solve_source(cx, k, cx.mass(k) @ f_Bs)
    info = {
        "dropped_norm": dropped,
        "kept_norm": cx.norm(k, f_Bs),
    }
    if post_project:
        _, _, u_Bs = cx.hodge_decompose(k, sol.u)
        info["projection_shift"] = cx.norm(k, sol.u - u_Bs)
        sol = SourceSolution(
            sol.k, sol.sigma, u_Bs, sol.p, sol.harmonic_coeffs, sol.residual, sol.inertia
        )
    return sol, info


# ---- eigenproblem -----------------------------------------------------


@dataclass
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray
    types: list
    zero_values: np.ndarray
    k: int

    def of_type(self, t):
        return np.array([v for v, ty in zip(self.values, self.types) if ty == t])


def solve_eigen(cx, k, count=None, zero_tol=1e-6):
    """Eigenpairs of the degree-k Hodge Laplacian via the mixed form.

    Eliminating sigma gives (B^T A^{-1} B + C) u = lambda M u, solved densely.
    Exactly dim H^k zero eigenvalues are discarded after checking they are
    numerically zero and the next one is not.  Each kept mode is classified
    by whether sigma = delta u vanishes: 'bstar' modes carry the (d*, d)
    branch of the spectrum, 'b' modes the (d, d*) branch.
    """
    n = cx.n
    Vk = cx.space(k)
    nu = Vk.dim
    if nu > TOL.dense_threshold:
        raise ValueError(
            f"eigen solve at dimension {nu} exceeds the dense limit {TOL.dense_threshold}"
        )
    M = cx.mass(k).toarray()
    C = cx.stiffness(k).toarray() if k < n else np.zeros((nu, nu))
    if k > 0:
        B = (cx.derivative(k - 1).T @ cx.mass(k)).toarray()
        Afac = factor_spd(cx.mass(k - 1))
        AinvB = Afac.solve(B)
        S = B.T @ AinvB + C
        S = 0.5 * (S + S.T)
    else:
        AinvB = None
        S = C

    vals, vecs = sym_generalized_eig(S, M)
    nzero = cx.harmonic_basis(k).shape[1]
    if nzero and vals[nzero - 1] > zero_tol:
        raise RuntimeError(
            f"expected {nzero} zero eigenvalues, smallest block reaches {vals[nzero - 1]:.2e}"
        )
    if len(vals) > nzero and vals[nzero] <= zero_tol:
        raise RuntimeError(
            f"eigenvalue {vals[nzero]:.2e} not separated from the harmonic block"
        )
    zero_values = vals[:nzero]
    keep = slice(nzero, None if count is None else nzero + count)
    kept_vals = vals[keep]
    kept_vecs = vecs[:, keep]

    types = []
    for j in range(kept_vecs.shape[1]):
        if k == 0:
            types.append("bstar")
            continue
        u = kept_vecs[:, j]
        sigma = AinvB @ u
        snorm = math.sqrt(max(float(sigma @ (cx.mass(k - 1) @ sigma)), 0.0))
        unorm = math.sqrt(max(float(u @ (cx.mass(k) @ u)), 0.0))
        lam = kept_vals[j]
        types.append("b" if snorm > 1e-4 * (1.0 + math.sqrt(abs(lam))) * unorm else "bstar")
    return EigenResult(kept_vals, kept_vecs, types, zero_values, k)


# ---- inf-sup measurement ---------------------------------------------


def measure_infsup(cx, k):
    """Smallest singular value of the degree-k saddle operator in graph norms.

    Solves the dense symmetric pencil K x = gamma N x with N the block
    diagonal of the natural norms (sigma and u in their d-graph norms,
    multipliers in the Euclidean norm) and returns min |gamma|.
    """
    n = cx.n
    if k < 1:
        raise ValueError("inf-sup measurement needs the sigma block, k >= 1")
    M = cx.mass(k)
    A = cx.mass(k - 1)
    B = (cx.derivative(k - 1).T @ M).tocsr()
    C = cx.stiffness(k) if k < n else sp.csr_matrix((cx.dim(k), cx.dim(k)))
    H = cx.harmonic_basis(k)
    nh = H.shape[1]
    G = M @ H if nh else None
    Asig = (A + cx.stiffness(k - 1)).tocsr()
    rows = [[-A, B], [B.T, C]]
    norms = [Asig, (M + C).tocsr()]
    if nh:
        rows[0].append(sp.csr_matrix((A.shape[0], nh)))
        rows[1].append(sp.csr_matrix(G))
        rows.append([sp.csr_matrix((nh, A.shape[0])), sp.csr_matrix(G.T), None])
        norms.append(sp.identity(nh, format="csr"))
    K = sp.bmat(rows, format="csr")
    N = sp.block_diag(norms, format="csr")
    total = K.shape[0]
    if total > TOL.dense_threshold:
        raise ValueError(f"inf-sup measurement at dimension {total} is dense only")
    vals, _ = sym_generalized_eig(K.toarray(), N.toarray(), check=False)
    return float(np.min(np.abs(vals)))


# ---- generic mixed pairs ---------------------------------------------


class MixedPair:
    """A sigma/u pairing outside the compatible families, for stability studies.

    ``sigma_components`` is a list of spaces: a single entry couples through
    the full exterior derivative of sigma against u (componentwise L2), and
    n scalar entries couple through the divergence of the vector field they
    represent.  No claim of stability is built in; that is the point.
    """

    def __init__(self, sigma_components, u_space):
        if isinstance(sigma_components, FESpace):
            sigma_components = [sigma_components]
        self.sigma_components = list(sigma_components)
        self.u_space = u_space
        self.mesh = u_space.mesh
        n = self.mesh.n
        if len(self.sigma_components) == 1:
            s = self.sigma_components[0]
            if math.comb(n, s.k + 1) != math.comb(n, u_space.k):
                raise ValueError("derivative of sigma and u have different component counts")
            self.mode = "d"
        elif len(self.sigma_components) == n:
            if any(s.k != 0 for s in self.sigma_components) or math.comb(n, u_space.k) != 1:
                raise ValueError("vector coupling needs scalar components and a density u")
            self.mode = "div"
        else:
            raise ValueError("sigma must have one component or one per coordinate")
        self.sdims = [s.dim for s in self.sigma_components]
        self.offsets = np.concatenate([[0], np.cumsum(self.sdims)]).astype(int)
        self.dim_sigma = int(self.offsets[-1])
        self.dim_u = u_space.dim
        self._assemble()

    def _quad_degree(self):
        rr = max([s.r for s in self.sigma_components] + [self.u_space.r])
        return 2 * rr + 2

    def _assemble(self):
        from .linalg import TripletBuilder

        qd = self._quad_degree()
        u_space = self.u_space
        mesh = self.mesh
        self.A = sp.block_diag(
            [s.mass_matrix() for s in self.sigma_components], format="csr"
        )
        self.M_u = u_space.mass_matrix()
        eb = TripletBuilder(self.dim_u, self.dim_sigma)
        sb = TripletBuilder(self.dim_sigma, self.dim_sigma)
        pts, wts, uphi = u_space.element.tabulation(qd)
        for ci in range(len(mesh.cells)):
            B, offset, det, Cinv, Gu = u_space.cell_geometry(ci)
            w = wts * abs(det)
            uphys = np.einsum("qit,ts->qis", uphi, Gu)
            uids = u_space.cell_dofs(ci)
            dvals = []
            for comp, s in enumerate(self.sigma_components):
                _, _, dphi = s.element.d_tabulation(qd)
                Gd = s.pullback_minors(s.k + 1)[ci]
                dphys = np.einsum("qit,ts->qis", dphi, Gd)
                if self.mode == "div":
                    dphys = dphys[:, :, comp : comp + 1]
                dvals.append(dphys)
            for comp, s in enumerate(self.sigma_components):
                ids = s.cell_dofs(ci) + self.offsets[comp]
                ids = np.where(s.cell_dofs(ci) >= 0, ids, -1)
                eb.add_block(uids, ids, np.einsum("q,qis,qjs->ij", w, uphys, dvals[comp]))
                for comp2, s2 in enumerate(self.sigma_components):
                    ids2 = s2.cell_dofs(ci) + self.offsets[comp2]
                    ids2 = np.where(s2.cell_dofs(ci) >= 0, ids2, -1)
                    sb.add_block(
                        ids, ids2, np.einsum("q,qis,qjs->ij", w, dvals[comp], dvals[comp2])
                    )
        self.E = eb.to_csr()
        self.S_sigma = sb.to_csr()

    def saddle_matrix(self):
        return sp.bmat([[-self.A, self.E.T], [self.E, None]], format="csr")

    def solve(self, f_sampler):
        """Attempt the mixed solve; returns (sigma, u, diagnostics).

        Conventions match the complex-based solver: the sigma equation is
        negated, so sigma plays the role of the adjoint differential of u.
        sigma comes back as a list of per-component coefficient vectors.
        A singular saddle matrix is reported in the diagnostics rather than
        raised past the caller.
        """
        F = self.u_space.load_vector(f_sampler)
        K = self.saddle_matrix()
        rhs = np.concatenate([np.zeros(self.dim_sigma), F])
        try:
            fac = factor_symmetric_indefinite(K)
            x = fac.solve(rhs)
        except ValueError as err:
            return None, None, {"singular": True, "detail": str(err)}
        resid = np.linalg.norm(K @ x - rhs) / max(np.linalg.norm(rhs), 1e-30)
        sigma = [
            x[self.offsets[c] : self.offsets[c + 1]] for c in range(len(self.sigma_components))
        ]
        u = x[self.dim_sigma :]
        return sigma, u, {"singular": False, "residual": resid, "inertia": fac.inertia}

    def infsup(self):
        """min |gamma| of the saddle pencil in the graph norms; dense."""
        K = self.saddle_matrix()
        N = sp.block_diag([(self.A + self.S_sigma).tocsr(), self.M_u], format="csr")
        if K.shape[0] > TOL.dense_threshold:
            raise ValueError("inf-sup measurement is dense only")
        vals, _ = sym_generalized_eig(K.toarray(), N.toarray(), check=False)
        return float(np.min(np.abs(vals)))


# ---- convergence ------------------------------------------------------


def fit_rates(hs, error_table):
    """Least-squares slopes of log error against log h.

    ``error_table`` maps a label to one error per level.  Errors at rounding
    scale for every level give math.inf (the quantity is reproduced exactly).
    """
    hs = np.asarray(hs, dtype=float)
    if len(hs) < 2:
        raise ValueError("need at least two levels")
    out = {}
    for key, errs in error_table.items():
        errs = np.asarray(errs, dtype=float)
        if len(errs) != len(hs):
            raise ValueError(f"level count mismatch for {key}")
        if np.max(errs) < 1e-12:
            out[key] = math.inf
            continue
        mask = errs > 1e-14
        if mask.sum() < 2:
            out[key] = math.inf
            continue
        slope = np.polyfit(np.log(hs[mask]), np.log(errs[mask]), 1)[0]
        out[key] = float(slope)
    return out


def source_error_norms(cx, k, sol, exact):
    """L2 errors of every mixed-solution field against supplied samplers.

    ``exact`` maps any of 'sigma', 'dsigma', 'u', 'du', 'p' to a FormSampler;
    missing keys are skipped.  Returns {name: error}.
    """
    out = {}
    if "sigma" in exact and sol.sigma is not None:
        out["sigma"] = cx.space(k - 1).l2_error(sol.sigma, exact["sigma"])
    if "dsigma" in exact and sol.sigma is not None:
        out["dsigma"] = cx.space(k - 1).l2_error_d(sol.sigma, exact["dsigma"])
    if "u" in exact:
        out["u"] = cx.space(k).l2_error(sol.u, exact["u"])
    if "du" in exact:
        if k < cx.n:
            out["du"] = cx.space(k).l2_error_d(sol.u, exact["du"])
        else:
            out["du"] = 0.0
    if "p" in exact:
        out["p"] = cx.space(k).l2_error(sol.p, exact["p"])
    return out
