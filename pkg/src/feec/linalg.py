"""Linear algebra kernels shared by assembly and solvers.

Thin, checked wrappers over numpy/scipy: triplet assembly to CSR, dense and
sparse symmetric factorizations with residual verification, a generalized
symmetric eigensolver, rank/null-space with threshold-stability warnings,
Gram-Schmidt in an arbitrary SPD inner product, and coordinate-format text
import/export.  All tolerances live in one configuration record; every
factorization the package trusts is verified against a residual here rather
than at call sites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla


@dataclass(frozen=True)
class Tolerances:
    residual: float = 1e-10
    rank_rel: float = 1e-9
    eig_residual: float = 1e-8
    symmetry: float = 1e-13
    dense_threshold: int = 2000


TOL = Tolerances()


class RankWarning(RuntimeError):
    """Raised when a rank decision is unstable under a decade of threshold."""


class NotSymmetricError(ValueError):
    pass


class TripletBuilder:
    """Accumulating sparse builder; duplicate entries sum."""

    def __init__(self, nrows, ncols):
        self.shape = (nrows, ncols)
        self.rows = []
        self.cols = []
        self.vals = []

    def add(self, i, j, v):
        if v != 0.0:
            self.rows.append(i)
            self.cols.append(j)
            self.vals.append(v)

    def add_block(self, row_ids, col_ids, block):
        block = np.asarray(block, dtype=float)
        for a, i in enumerate(row_ids):
            if i < 0:
                continue
            for b, j in enumerate(col_ids):
                if j >= 0 and block[a, b] != 0.0:
                    self.rows.append(i)
                    self.cols.append(j)
                    self.vals.append(block[a, b])

    def to_csr(self):
        m = sp.coo_matrix(
            (self.vals, (self.rows, self.cols)), shape=self.shape
        ).tocsr()
        m.sum_duplicates()
        return m


def check_symmetric(A, tol=None):
    tol = TOL.symmetry if tol is None else tol
    scale = max(abs(A).max() if A.shape[0] else 0.0, 1.0)
    gap = abs(A - A.T).max()
    if gap > tol * scale:
        raise NotSymmetricError(f"matrix asymmetry {gap:.3e} exceeds {tol:.0e} * scale")
    return float(gap)


def _dense(A):
    return A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)


class SPDFactor:
    def __init__(self, A):
        n = A.shape[0]
        self._A = A
        if n <= TOL.dense_threshold:
            try:
                self._chol = scipy.linalg.cho_factor(_dense(A))
            except scipy.linalg.LinAlgError as exc:
                raise ValueError(f"not SPD: {exc}") from exc
            self._lu = None
        else:
            self._chol = None
            self._lu = spla.splu(sp.csc_matrix(A))

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if self._chol is not None:
            x = scipy.linalg.cho_solve(self._chol, b)
        else:
            x = self._lu.solve(b)
        bn = np.linalg.norm(b)
        if bn > 0:
            res = np.linalg.norm(self._A @ x - b) / bn
            if res > TOL.residual * 1e2:
                raise RuntimeError(f"SPD solve residual {res:.3e}")
        return x


def factor_spd(A):
    return SPDFactor(A)


class SymIndefFactor:
    """Symmetric indefinite factorization with inertia on the dense path."""

    def __init__(self, A, singular_tol=None):
        A = sp.csr_matrix(A) if sp.issparse(A) else np.asarray(A, dtype=float)
        self._A = A
        n = A.shape[0]
        self.inertia = None
        tol = TOL.rank_rel if singular_tol is None else singular_tol
        if n <= TOL.dense_threshold:
            dense = _dense(A)
            lu, d, _perm = scipy.linalg.ldl(dense)
            evals = []
            i = 0
            while i < n:
                if i + 1 < n and d[i + 1, i] != 0.0:
                    evals.extend(np.linalg.eigvalsh(d[i : i + 2, i : i + 2]))
                    i += 2
                else:
                    evals.append(d[i, i])
                    i += 1
            evals = np.array(evals)
            scale = max(np.abs(evals).max(), 1e-300)
            zeros = int((np.abs(evals) <= tol * scale).sum())
            if zeros:
                raise ValueError(
                    f"singular matrix: {zeros} vanishing pivots "
                    f"(relative threshold {tol:.0e})"
                )
            self.inertia = (
                int((evals > 0).sum()),
                int((evals < 0).sum()),
                zeros,
            )
            self._solve = scipy.linalg.lu_factor(dense)
            self._lu = None
        else:
            try:
                self._lu = spla.splu(sp.csc_matrix(A))
            except RuntimeError as exc:
                raise ValueError(f"singular matrix: {exc}") from exc
            self._solve = None

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if self._solve is not None:
            x = scipy.linalg.lu_solve(self._solve, b)
        else:
            x = self._lu.solve(b)
        bn = np.linalg.norm(b)
        if bn > 0:
            res = np.linalg.norm(self._A @ x - b) / bn
            if res > 1e-6:
                raise ValueError(f"singular or ill-conditioned system: residual {res:.3e}")
        return x


def factor_symmetric_indefinite(A, singular_tol=None):
    return SymIndefFactor(A, singular_tol)


def sym_generalized_eig(A, B, count=None, check=True, force_dense=False):
    """Smallest eigenpairs of A v = lambda B v, A symmetric, B SPD.

    Dense below the size threshold, shift-invert Lanczos above.  Vectors are
    B-orthonormal; residuals verified when check is set.  A full spectrum
    (count None) above the threshold requires force_dense.
    """
    n = A.shape[0]
    if count is None:
        count = n
        force_dense = True
    if force_dense or n <= TOL.dense_threshold:
        vals, vecs = scipy.linalg.eigh(_dense(A), _dense(B))
        vals, vecs = vals[:count], vecs[:, :count]
    else:
        Asp = sp.csc_matrix(A)
        Bsp = sp.csc_matrix(B)
        scale = abs(Asp).sum() / max(abs(Bsp).sum(), 1e-300)
        sigma = -1e-8 * max(scale, 1.0)
        vals, vecs = spla.eigsh(Asp, k=count, M=Bsp, sigma=sigma, which="LM")
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    if check:
        Bv = B @ vecs
        gram = vecs.T @ Bv
        if abs(gram - np.eye(len(vals))).max() > TOL.eig_residual:
            raise RuntimeError("eigenvectors lost B-orthonormality")
        Av = A @ vecs
        for i in range(len(vals)):
            num = np.linalg.norm(Av[:, i] - vals[i] * Bv[:, i])
            den = max(np.linalg.norm(Av[:, i]), abs(vals[i]), 1.0)
            if num / den > TOL.eig_residual:
                raise RuntimeError(
                    f"eigen residual {num / den:.3e} at eigenvalue {vals[i]:.6g}"
                )
    return vals, vecs


def rank_and_nullspace(A, tol_rel=None, require_stable=True):
    """(rank, null-space basis) by SVD with a relative threshold.

    The rank must be identical at threshold/10 and threshold*10, else
    RankWarning; Betti numbers must never be tolerance accidents.
    """
    tol_rel = TOL.rank_rel if tol_rel is None else tol_rel
    dense = _dense(A)
    if dense.size == 0 or not dense.any():
        null = np.eye(dense.shape[1])
        return 0, null
    u, s, vt = np.linalg.svd(dense, full_matrices=True)
    top = s[0]
    rank = int((s > tol_rel * top).sum())
    if require_stable:
        lo = int((s > tol_rel * 0.1 * top).sum())
        hi = int((s > tol_rel * 10.0 * top).sum())
        if lo != rank or hi != rank:
            raise RankWarning(
                f"rank unstable across threshold decade: {lo}/{rank}/{hi}"
            )
    return rank, vt[rank:].T.copy()


def gram_schmidt(V, inner):
    """Orthonormalize columns of V in the inner product, with reorthogonalization.

    ``inner`` maps a vector to its image under the SPD Gram operator.  Columns
    that vanish after projection are dropped.
    """
    V = np.asarray(V, dtype=float)
    out = []
    images = []
    for j in range(V.shape[1]):
        v = V[:, j].copy()
        norm0 = float(np.sqrt(max(v @ inner(v), 0.0)))
        if norm0 == 0.0:
            continue
        for _sweep in range(2):
            for q, Mq in zip(out, images):
                v -= (Mq @ v) * q
        Mv = inner(v)
        norm = float(np.sqrt(max(v @ Mv, 0.0)))
        if norm < 1e-10 * norm0:
            continue
        v /= norm
        out.append(v)
        images.append(inner(v))
    if not out:
        return np.zeros((V.shape[0], 0))
    return np.column_stack(out)


def subspace_gap(E, F, inner):
    """Symmetric gap between the column spans in the given inner product."""

    def directed(P, Q):
        if P.shape[1] == 0:
            return 0.0
        if Q.shape[1] == 0:
            return 1.0
        cross = np.array([[inner(q) @ p for q in Q.T] for p in P.T])
        s = np.linalg.svd(cross, compute_uv=False)
        smallest = s[P.shape[1] - 1] if P.shape[1] <= Q.shape[1] else 0.0
        return float(np.sqrt(max(1.0 - min(smallest, 1.0) ** 2, 0.0)))

    QE = gram_schmidt(E, inner)
    QF = gram_schmidt(F, inner)
    return max(directed(QE, QF), directed(QF, QE))


def write_coo(A, path):
    """Coordinate text export: header 'rows cols nnz', then 'i j value' lines."""
    coo = sp.coo_matrix(A)
    with open(path, "w") as fh:
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {float(v)!r}\n")


def read_coo(path):
    with open(path) as fh:
        header = fh.readline().split()
        rows, cols, nnz = int(header[0]), int(header[1]), int(header[2])
        data, ii, jj = [], [], []
        for _ in range(nnz):
            parts = fh.readline().split()
            ii.append(int(parts[0]))
            jj.append(int(parts[1]))
            data.append(float(parts[2]))
    return sp.coo_matrix((data, (ii, jj)), shape=(rows, cols)).tocsr()
