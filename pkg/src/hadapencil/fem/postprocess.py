"""Boundary quantities recovered from P1 solutions."""
from __future__ import annotations

import numpy as np

from .assemble import element_matrices
from .mesh import Mesh


def element_gradients(mesh: Mesh, u_full: np.ndarray, nodes=None) -> tuple[np.ndarray, np.ndarray]:
    """Constant gradient of u on each triangle, shape (m, 2), and the areas."""
    p = (mesh.nodes if nodes is None else nodes)[mesh.triangles]
    x, y = p[:, :, 0], p[:, :, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    _, _, area = element_matrices(p)
    uk = u_full[mesh.triangles]
    g = np.stack([np.sum(b * uk, axis=1), np.sum(c * uk, axis=1)], axis=1) / (2 * area[:, None])
    return g, area


def recovered_gradients(mesh: Mesh, u_full: np.ndarray) -> np.ndarray:
    """Area-weighted average of element gradients at every node."""
    g, area = element_gradients(mesh, u_full)
    acc = np.zeros((mesh.n_nodes, 2))
    wsum = np.zeros(mesh.n_nodes)
    for i in range(3):
        np.add.at(acc, mesh.triangles[:, i], g * area[:, None])
        np.add.at(wsum, mesh.triangles[:, i], area)
    return acc / np.maximum(wsum, 1e-300)[:, None]


def boundary_edges(mesh: Mesh) -> np.ndarray:
    """Edges (i, j) with both ends on the boundary and one adjacent triangle, oriented counter-clockwise."""
    tri = mesh.triangles
    e = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    key = np.sort(e, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    single = counts[inv.ravel()] == 1
    return e[single]


def rellich_flux(mesh: Mesh, u_full: np.ndarray, center=(0.0, 0.0)) -> float:
    """Trapezoidal int (x - c).nu (du/dnu)^2 over the boundary from recovered gradients."""
    g = recovered_gradients(mesh, u_full)
    edges = boundary_edges(mesh)
    a, b = mesh.nodes[edges[:, 0]], mesh.nodes[edges[:, 1]]
    t = b - a
    length = np.linalg.norm(t, axis=1)
    nu = np.stack([t[:, 1], -t[:, 0]], axis=1) / length[:, None]  # outward for CCW boundary
    c = np.asarray(center)
    total = 0.0
    for end in (a, edges[:, 0]), (b, edges[:, 1]):
        pts, idx = end
        dn = np.sum(g[idx] * nu, axis=1)
        total += 0.5 * np.sum(length * np.sum((pts - c) * nu, axis=1) * dn**2)
    return float(total)
