"""P1 stiffness and mass matrices on a node-mapped mesh."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sps

from ..geometry import PerturbFamily
from .mesh import Mesh


class InvertedElementError(ValueError):
    pass


def element_matrices(p: np.ndarray):
    """Stiffness and mass for triangles with vertex coords ``p`` of shape (m, 3, 2).

    Returns (K_e, M_e, area), each of shape (m, 3, 3) / (m,).
    """
    x, y = p[:, :, 0], p[:, :, 1]
    # gradients of barycentric coordinates: (b_i, c_i) / (2 area)
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area[:, None, None])
    me = (area / 12.0)[:, None, None] * (np.ones((3, 3)) + np.eye(3))[None]
    return ke, me, area


def mapped_nodes(mesh: Mesh, family: PerturbFamily | None, t: float) -> np.ndarray:
    if family is None or t == 0:
        return mesh.nodes
    return family.map(t, mesh.nodes, component=mesh.component if family.pair is not None else None)


def assemble(mesh: Mesh, family: PerturbFamily | None = None, t: float = 0.0, eliminate: bool = True):
    """Global (K, M) in CSR form on phi_t(mesh).

    With ``eliminate`` the Dirichlet rows and columns are dropped and the
    matrices act on ``mesh.interior`` unknowns.
    """
    nodes = mapped_nodes(mesh, family, t)
    ke, me, area = element_matrices(nodes[mesh.triangles])
    if np.any(area <= 0):
        bad = int(np.sum(area <= 0))
        raise InvertedElementError(f"{bad} elements inverted or degenerate at t = {t}")
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    n = mesh.n_nodes
    K = sps.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sps.coo_matrix((me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    if eliminate:
        keep = mesh.interior
        K = K[keep][:, keep].tocsr()
        M = M[keep][:, keep].tocsr()
    K.sum_duplicates()
    M.sum_duplicates()
    return K, M


def prolong(mesh: Mesh, u_interior: np.ndarray) -> np.ndarray:
    """Extend interior values by zero to all mesh nodes."""
    full = np.zeros((mesh.n_nodes,) + u_interior.shape[1:])
    full[mesh.interior] = u_interior
    return full
