"""Structured triangulations of the 2D reference domains."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import geometry as geo


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray  # (n, 2)
    triangles: np.ndarray  # (m, 3), counter-clockwise
    boundary: np.ndarray  # (n,) bool
    h: float
    component: np.ndarray  # (n,) int, nonzero only on a disjoint pair
    level: int = 0

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    def areas(self, nodes=None) -> np.ndarray:
        p = self.nodes if nodes is None else nodes
        a, b, c = (p[self.triangles[:, i]] for i in range(3))
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    def angles(self) -> np.ndarray:
        """Interior angles of every triangle, shape (m, 3), radians."""
        p = self.nodes[self.triangles]
        out = np.empty(self.triangles.shape)
        for i in range(3):
            u = p[:, (i + 1) % 3] - p[:, i]
            v = p[:, (i + 2) % 3] - p[:, i]
            cosang = np.sum(u * v, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
            out[:, i] = np.arccos(np.clip(cosang, -1.0, 1.0))
        return out


def square_mesh(n: int) -> Mesh:
    """n x n cells on [0, pi]^2, each split into two right triangles.

    Diagonals alternate in a checkerboard ("union jack") pattern so that for
    even n the mesh carries the full symmetry group of the square.
    """
    if n < 1:
        raise MeshError("need at least one cell per side")
    xs = np.linspace(0.0, math.pi, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    nodes = np.stack([X.ravel(), Y.ravel()], axis=1)
    idx = lambda i, j: i * (n + 1) + j  # noqa: E731
    tris = []
    for i in range(n):
        for j in range(n):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            if (i + j) % 2 == 0:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    tris = np.array(tris, dtype=np.int64)
    i, j = np.divmod(np.arange(nodes.shape[0]), n + 1)
    bnd = (i == 0) | (i == n) | (j == 0) | (j == n)
    return Mesh(nodes, tris, bnd, math.pi / n, np.zeros(nodes.shape[0], dtype=int))


def disk_mesh(n: int) -> Mesh:
    """Concentric rings r = i/n with 6 i equally spaced nodes, fan-closed at the centre.

    Each sextant between rings i-1 and i is strip-triangulated, giving 6 n^2
    triangles with sixfold rotational symmetry.  Boundary nodes lie exactly on
    the unit circle.
    """
    if n < 1:
        raise MeshError("need at least one ring")
    pts = [np.zeros((1, 2))]
    start = [0]
    for i in range(1, n + 1):
        th = 2 * math.pi * np.arange(6 * i) / (6 * i)
        r = i / n
        ring = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
        if i == n:
            ring /= np.linalg.norm(ring, axis=1)[:, None]
        start.append(sum(p.shape[0] for p in pts))
        pts.append(ring)
    nodes = np.concatenate(pts)

    def node(i, l):
        if i == 0:
            return 0
        return start[i] + (l % (6 * i))

    tris = []
    for i in range(1, n + 1):
        for s in range(6):
            inner = [node(i - 1, s * (i - 1) + j) for j in range(i)]
            outer = [node(i, s * i + j) for j in range(i + 1)]
            for j in range(i):
                tris.append((inner[j], outer[j], outer[j + 1]))
            for j in range(i - 1):
                tris.append((inner[j], outer[j + 1], inner[j + 1]))
    tris = np.array(tris, dtype=np.int64)
    bnd = np.zeros(nodes.shape[0], dtype=bool)
    bnd[start[n]:] = True
    return Mesh(nodes, tris, bnd, 1.0 / n, np.zeros(nodes.shape[0], dtype=int))


def _pair_mesh(pair: geo.DisjointPair, n: int) -> Mesh:
    if not isinstance(pair.base, geo.UnitDisk):
        raise MeshError("pair meshing supports disk components only")
    m = disk_mesh(n)
    off = np.asarray(pair.offset)
    k = m.n_nodes
    return Mesh(
        np.concatenate([m.nodes, m.nodes + off]),
        np.concatenate([m.triangles, m.triangles + k]),
        np.concatenate([m.boundary, m.boundary]),
        m.h,
        np.concatenate([np.zeros(k, dtype=int), np.ones(k, dtype=int)]),
    )


def mesh_domain(domain, level: int) -> Mesh:
    """Mesh with 2**level cells per side (square) or rings (disk), h = size / 2**level."""
    if level < 0:
        raise MeshError("refinement level must be >= 0")
    n = 2**level
    if isinstance(domain, geo.Square):
        m = square_mesh(n)
    elif isinstance(domain, geo.UnitDisk):
        m = disk_mesh(n)
    elif isinstance(domain, geo.DisjointPair):
        m = _pair_mesh(domain, n)
    else:
        raise MeshError(f"no 2D mesher for {getattr(domain, 'kind', domain)!r}")
    return Mesh(m.nodes, m.triangles, m.boundary, m.h, m.component, level)


def write_mesh(mesh: Mesh, path) -> None:
    """Plain-text dump.

    Line 1: ``<n_nodes> <n_triangles>``; then one ``x y boundary_flag`` line
    per node; then one ``i j k`` line (0-based node indices) per triangle.
    """
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_nodes} {mesh.triangles.shape[0]}\n")
        for (x, y), b in zip(mesh.nodes, mesh.boundary):
            fh.write(f"{float(x)!r} {float(y)!r} {int(b)}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")


def read_mesh(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    with open(path) as fh:
        n, m = (int(v) for v in fh.readline().split())
        rows = [fh.readline().split() for _ in range(n)]
        tris = [tuple(int(v) for v in fh.readline().split()) for _ in range(m)]
    nodes = np.array([[float(r[0]), float(r[1])] for r in rows])
    bnd = np.array([r[2] == "1" for r in rows])
    return nodes, np.array(tris, dtype=np.int64), bnd
