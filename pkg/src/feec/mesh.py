"""Simplicial meshes of polyhedral domains in R^n, n = 1, 2, 3.

Cells and faces are stored as sorted vertex-index tuples.  Sorting fixes a
global orientation convention: the embedding permutation of a face into any
containing cell is increasing, so every face is parametrized the same way
from both sides and no relative sign bookkeeping is needed anywhere
downstream.

Provides the subsimplex lattice, conformity validation, boundary extraction,
signed boundary incidence matrices, shape measures, built-in generators
(interval, square, crisscross square, L-shape, polygonal annulus, cube),
uniform red refinement, seeded interior jitter, and a plain text format that
round-trips exactly.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


class SimplicialMesh:
    def __init__(self, n, vertices, cells, validate=True):
        if n not in (1, 2, 3):
            raise ValueError(f"dimension {n} not supported")
        self.n = n
        self.vertices = np.array(vertices, dtype=float).reshape(-1, n)
        seen = set()
        self.cells = []
        for c in cells:
            tup = tuple(sorted(int(v) for v in c))
            if len(set(tup)) != n + 1:
                raise ValueError(f"cell {c} is not an n-simplex")
            if tup in seen:
                raise ValueError(f"duplicate cell {tup}")
            seen.add(tup)
            self.cells.append(tup)
        if not self.cells:
            raise ValueError("mesh has no cells")
        if max(v for c in self.cells for v in c) >= len(self.vertices):
            raise ValueError("cell references a missing vertex")

        self._faces = {}
        self._face_index = {}
        for d in range(n + 1):
            fs = set()
            for c in self.cells:
                fs.update(itertools.combinations(c, d + 1))
            ordered = sorted(fs)
            self._faces[d] = ordered
            self._face_index[d] = {f: i for i, f in enumerate(ordered)}

        facet_count = {}
        for c in self.cells:
            for f in itertools.combinations(c, n):
                facet_count[f] = facet_count.get(f, 0) + 1
        self._boundary_facets = sorted(f for f, m in facet_count.items() if m == 1)
        self._face_cells = {}

        if validate:
            bad = [f for f, m in facet_count.items() if m > 2]
            if bad:
                raise ValueError(f"non-conforming mesh: facet {bad[0]} in {facet_count[bad[0]]} cells")
            if any(v not in self._face_index[0] for v in [(i,) for i in range(len(self.vertices))]):
                raise ValueError("mesh has isolated vertices")
            for ci in range(len(self.cells)):
                if abs(self.cell_det(ci)) < 1e-14 * max(self.diameter(ci), 1.0) ** n:
                    raise ValueError(f"degenerate cell {self.cells[ci]}")

    # ---- lattice ------------------------------------------------------

    def faces(self, d):
        return self._faces[d]

    def face_index(self, d, f):
        return self._face_index[d][tuple(f)]

    def num_faces(self, d):
        return len(self._faces[d])

    def boundary_facets(self):
        return list(self._boundary_facets)

    def boundary_faces(self, d):
        """Faces of dimension d lying on the domain boundary, as a sorted list."""
        if d == self.n:
            return []
        out = set()
        for f in self._boundary_facets:
            out.update(itertools.combinations(f, d + 1))
        return sorted(out)

    def euler_characteristic(self):
        return sum((-1) ** d * len(self._faces[d]) for d in range(self.n + 1))

    def cells_containing(self, d, fi):
        """Indices of cells whose vertex set contains face fi of dimension d."""
        if d not in self._face_cells:
            table = [[] for _ in self._faces[d]]
            for ci, c in enumerate(self.cells):
                for f in itertools.combinations(c, d + 1):
                    table[self._face_index[d][f]].append(ci)
            self._face_cells[d] = table
        return self._face_cells[d][fi]

    def incidence_matrix(self, d):
        """Signed boundary incidence Delta_d -> Delta_{d-1} as integer triplets.

        Row = index of the (d-1)-face, column = index of the d-face, value =
        (-1)^i for dropping vertex i of the sorted tuple.  Satisfies the
        boundary-of-boundary identity; tests use the rational ranks of these
        matrices as the combinatorial cohomology oracle.
        """
        if not 1 <= d <= self.n:
            raise ValueError("incidence defined for 1 <= d <= n")
        triplets = []
        for col, f in enumerate(self._faces[d]):
            for i in range(d + 1):
                sub = f[:i] + f[i + 1 :]
                triplets.append((self._face_index[d - 1][sub], col, (-1) ** i))
        return triplets

    # ---- geometry -----------------------------------------------------

    def cell_affine(self, ci):
        """Affine map x = offset + B @ xi from the reference simplex to cell ci."""
        vs = self.vertices[list(self.cells[ci])]
        return vs[1:].T - vs[0][:, None], vs[0]

    def cell_det(self, ci):
        B, _ = self.cell_affine(ci)
        return float(np.linalg.det(B))

    def cell_volume(self, ci):
        return abs(self.cell_det(ci)) / math.factorial(self.n)

    def face_affine(self, d, fi):
        """Affine map from the reference d-simplex onto face fi of dimension d."""
        vs = self.vertices[list(self._faces[d][fi])]
        return vs[1:].T - vs[0][:, None], vs[0]

    def face_measure(self, d, fi):
        if d == 0:
            return 1.0
        A, _ = self.face_affine(d, fi)
        g = A.T @ A
        return math.sqrt(max(float(np.linalg.det(g)), 0.0)) / math.factorial(d)

    def diameter(self, ci):
        vs = self.vertices[list(self.cells[ci])]
        return max(
            float(np.linalg.norm(vs[i] - vs[j]))
            for i in range(len(vs))
            for j in range(i + 1, len(vs))
        )

    def h(self):
        return max(self.diameter(ci) for ci in range(len(self.cells)))

    def circumradius(self, ci):
        vs = self.vertices[list(self.cells[ci])]
        A = 2.0 * (vs[1:] - vs[0])
        b = np.array([vs[i] @ vs[i] - vs[0] @ vs[0] for i in range(1, len(vs))])
        center = np.linalg.solve(A, b)
        return float(np.linalg.norm(center - vs[0]))

    def inradius(self, ci):
        vol = self.cell_volume(ci)
        c = self.cells[ci]
        surface = 0.0
        for f in itertools.combinations(c, self.n):
            fi = self._face_index[self.n - 1][f]
            surface += self.face_measure(self.n - 1, fi)
        return self.n * vol / surface

    def shape_constant(self):
        """Max over cells of circumradius / inradius."""
        if self.n == 1:
            return 1.0
        return max(self.circumradius(ci) / self.inradius(ci) for ci in range(len(self.cells)))

    # ---- I/O ----------------------------------------------------------

    def to_text(self):
        lines = [f"{self.n} {len(self.vertices)} {len(self.cells)}"]
        for v in self.vertices:
            lines.append(" ".join(repr(float(x)) for x in v))
        for c in self.cells:
            lines.append(" ".join(str(i) for i in c))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        n, nv, nc = (int(t) for t in lines[0].split())
        verts = [[float(t) for t in ln.split()] for ln in lines[1 : 1 + nv]]
        cells = [[int(t) for t in ln.split()] for ln in lines[1 + nv : 1 + nv + nc]]
        return cls(n, verts, cells)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())

    def __repr__(self):
        return (
            f"SimplicialMesh(n={self.n}, vertices={len(self.vertices)}, "
            f"cells={len(self.cells)})"
        )


# ---- refinement -------------------------------------------------------


def refine_uniform(mesh):
    """Red refinement: every cell split into 2^n children through edge midpoints."""
    n = mesh.n
    verts = [tuple(v) for v in mesh.vertices]
    mid = {}

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in mid:
            verts.append(tuple((mesh.vertices[a] + mesh.vertices[b]) / 2.0))
            mid[key] = len(verts) - 1
        return mid[key]

    cells = []
    for c in mesh.cells:
        if n == 1:
            a, b = c
            m = midpoint(a, b)
            cells += [(a, m), (m, b)]
        elif n == 2:
            a, b, c2 = c
            ab, ac, bc = midpoint(a, b), midpoint(a, c2), midpoint(b, c2)
            cells += [(a, ab, ac), (b, ab, bc), (c2, ac, bc), (ab, ac, bc)]
        else:
            x0, x1, x2, x3 = c
            m01, m02, m03 = midpoint(x0, x1), midpoint(x0, x2), midpoint(x0, x3)
            m12, m13, m23 = midpoint(x1, x2), midpoint(x1, x3), midpoint(x2, x3)
            cells += [
                (x0, m01, m02, m03),
                (x1, m01, m12, m13),
                (x2, m02, m12, m23),
                (x3, m03, m13, m23),
                # octahedron cut along the m02-m13 diagonal
                (m01, m02, m03, m13),
                (m01, m02, m12, m13),
                (m02, m03, m13, m23),
                (m02, m12, m13, m23),
            ]
    return SimplicialMesh(n, np.array(verts), cells)


def perturb(mesh, seed, amount=0.2):
    """Jitter interior vertices by a fraction of the shortest incident edge.

    amount < 0.25 keeps every cell non-degenerate for the generators here;
    construction re-validates.  Deterministic for a fixed seed.
    """
    if not 0 <= amount < 0.25:
        raise ValueError("amount must lie in [0, 0.25)")
    rng = np.random.default_rng(seed)
    interior = set(range(len(mesh.vertices)))
    for f in mesh.boundary_facets():
        interior.difference_update(f)
    shortest = np.full(len(mesh.vertices), np.inf)
    for a, b in mesh.faces(1):
        length = float(np.linalg.norm(mesh.vertices[a] - mesh.vertices[b]))
        shortest[a] = min(shortest[a], length)
        shortest[b] = min(shortest[b], length)
    verts = mesh.vertices.copy()
    for v in sorted(interior):
        step = rng.uniform(-1.0, 1.0, size=mesh.n)
        norm = float(np.linalg.norm(step))
        if norm > 0:
            radius = amount * shortest[v] * rng.uniform(0.2, 1.0)
            verts[v] += step / norm * radius
    return SimplicialMesh(mesh.n, verts, mesh.cells)


# ---- generators -------------------------------------------------------


def interval(N, a=-1.0, b=1.0):
    if N < 1:
        raise ValueError("N must be >= 1")
    xs = np.linspace(a, b, N + 1).reshape(-1, 1)
    return SimplicialMesh(1, xs, [(i, i + 1) for i in range(N)])


def square(N, a=0.0, b=1.0):
    """N x N grid on (a,b)^2, each square split along one diagonal."""
    if N < 1:
        raise ValueError("N must be >= 1")
    xs = np.linspace(a, b, N + 1)
    verts = [(xs[i], xs[j]) for j in range(N + 1) for i in range(N + 1)]

    def vid(i, j):
        return j * (N + 1) + i

    cells = []
    for j in range(N):
        for i in range(N):
            p00, p10 = vid(i, j), vid(i + 1, j)
            p01, p11 = vid(i, j + 1), vid(i + 1, j + 1)
            cells += [(p00, p10, p11), (p00, p01, p11)]
    return SimplicialMesh(2, np.array(verts), cells)


def square_crisscross(N, a=0.0, b=1.0):
    """N x N grid with every square cut into 4 triangles through its center."""
    if N < 1:
        raise ValueError("N must be >= 1")
    xs = np.linspace(a, b, N + 1)
    verts = [(xs[i], xs[j]) for j in range(N + 1) for i in range(N + 1)]

    def vid(i, j):
        return j * (N + 1) + i

    cells = []
    for j in range(N):
        for i in range(N):
            cx = 0.5 * (xs[i] + xs[i + 1])
            cy = 0.5 * (xs[j] + xs[j + 1])
            verts.append((cx, cy))
            c = len(verts) - 1
            p00, p10 = vid(i, j), vid(i + 1, j)
            p01, p11 = vid(i, j + 1), vid(i + 1, j + 1)
            cells += [(p00, p10, c), (p10, p11, c), (p11, p01, c), (p01, p00, c)]
    return SimplicialMesh(2, np.array(verts), cells)


def lshape(N):
    """(-1,1)^2 with the closed quadrant (0,1)x(-1,0) removed; h = 1/N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    index = {}
    verts = []

    def vid(i, j):
        if (i, j) not in index:
            verts.append((-1.0 + i / N, -1.0 + j / N))
            index[(i, j)] = len(verts) - 1
        return index[(i, j)]

    cells = []
    for j in range(2 * N):
        for i in range(2 * N):
            if i >= N and j < N:
                continue
            p00, p10 = vid(i, j), vid(i + 1, j)
            p01, p11 = vid(i, j + 1), vid(i + 1, j + 1)
            cells += [(p00, p10, p11), (p00, p01, p11)]
    return SimplicialMesh(2, np.array(verts), cells)


def annulus(N, r_in=0.5, r_out=1.0):
    """Polygonal annulus: N radial layers, 8N angular sectors.

    The computational domain is this polygon itself, not the true annulus.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0 < r_in < r_out:
        raise ValueError("need 0 < r_in < r_out")
    nt = 8 * N
    verts = []
    for l in range(N + 1):
        r = r_in + (r_out - r_in) * l / N
        for t in range(nt):
            th = 2.0 * math.pi * t / nt
            verts.append((r * math.cos(th), r * math.sin(th)))

    def vid(l, t):
        return l * nt + t % nt

    cells = []
    for l in range(N):
        for t in range(nt):
            p00, p10 = vid(l, t), vid(l + 1, t)
            p01, p11 = vid(l, t + 1), vid(l + 1, t + 1)
            cells += [(p00, p10, p11), (p00, p01, p11)]
    return SimplicialMesh(2, np.array(verts), cells)


def cube(N, a=0.0, b=1.0):
    """N^3 grid of cubes on (a,b)^3, each cut into 6 tetrahedra along lattice paths."""
    if N < 1:
        raise ValueError("N must be >= 1")
    xs = np.linspace(a, b, N + 1)
    verts = [
        (xs[i], xs[j], xs[k])
        for k in range(N + 1)
        for j in range(N + 1)
        for i in range(N + 1)
    ]

    def vid(i, j, k):
        return (k * (N + 1) + j) * (N + 1) + i

    cells = []
    for k in range(N):
        for j in range(N):
            for i in range(N):
                for perm in itertools.permutations(range(3)):
                    path = [(i, j, k)]
                    for axis in perm:
                        x, y, z = path[-1]
                        step = [x, y, z]
                        step[axis] += 1
                        path.append(tuple(step))
                    cells.append(tuple(vid(*p) for p in path))
    return SimplicialMesh(3, np.array(verts), cells)


_GENERATORS = {
    "interval": interval,
    "square": square,
    "square_crisscross": square_crisscross,
    "lshape": lshape,
    "annulus": annulus,
    "cube": cube,
}


def generate(kind, *args, **kwargs):
    try:
        gen = _GENERATORS[kind]
    except KeyError:
        raise ValueError(f"unknown mesh kind {kind!r}; options: {sorted(_GENERATORS)}")
    return gen(*args, **kwargs)
