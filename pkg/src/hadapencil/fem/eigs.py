"""Lowest eigenpairs of K u = lambda M u by shift-invert block Lanczos.

The Krylov basis is kept M-orthonormal with full (twice-applied classical
Gram-Schmidt) reorthogonalisation; Ritz pairs come from the Rayleigh quotient
of K on that basis.  Blocks of several vectors make exactly degenerate
eigenvalues (symmetric meshes) visible, which a single-vector Lanczos run
would only find through rounding noise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
import scipy.sparse.linalg as spla


class FactorizationError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigResult:
    values: np.ndarray
    vectors: np.ndarray  # (n, m), M-orthonormal columns
    residuals: np.ndarray  # ||K u - lambda M u|| / ||M u||
    iterations: int


class ShiftedFactor:
    """Symmetric sparse factorisation of K - sigma M.

    SuperLU in symmetric mode (minimum degree on A^T + A, no off-diagonal
    pivoting) so the factorisation is an L D L^T in disguise; positivity of
    every pivot certifies that the shifted matrix is positive definite.
    """

    def __init__(self, K, M, sigma: float = 0.0, require_definite: bool = True):
        A = (K - sigma * M).tocsc() if sigma else K.tocsc()
        try:
            self._lu = spla.splu(
                A,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError as exc:
            raise FactorizationError(f"factorisation of K - {sigma} M failed: {exc}") from exc
        piv = self._lu.U.diagonal()
        if require_definite and not np.all(piv > 0):
            raise FactorizationError(
                f"K - {sigma} M is not positive definite ({int(np.sum(piv <= 0))} nonpositive pivots)"
            )

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self._lu.solve(rhs)


def _m_orthonormalize(W, M, basis, drop_tol=1e-10):
    for _ in range(2):
        for Q, MQ in basis:
            W = W - Q @ (MQ.T @ W)
    MW = M @ W
    G = W.T @ MW
    G = 0.5 * (G + G.T)
    w, U = np.linalg.eigh(G)
    keep = w > drop_tol * max(w.max(), 1e-300)
    if not np.any(keep):
        return None, None
    T = U[:, keep] / np.sqrt(w[keep])
    return W @ T, MW @ T


def lowest_eigs(
    K,
    M,
    count: int,
    shift: float = 0.0,
    block: int = 4,
    tol: float = 1e-10,
    max_basis: int = 600,
    seed: int = 0,
) -> EigResult:
    """The ``count`` smallest generalized eigenpairs of (K, M).

    ``shift`` must lie below the lowest eigenvalue (K - shift M is factored
    by a definite symmetric factorisation).  Residuals are the relative
    ``||K u - lambda M u|| / ||M u||``; iteration stops once all wanted pairs
    are below ``tol``.
    """
    K = sps.csr_matrix(K)
    M = sps.csr_matrix(M)
    n = K.shape[0]
    if count < 1 or count > n:
        raise ValueError(f"cannot compute {count} eigenpairs of a {n}-dimensional problem")
    fac = ShiftedFactor(K, M, shift)
    rng = np.random.default_rng(seed)
    block = max(1, min(block, n))
    Q, MQ = _m_orthonormalize(rng.standard_normal((n, block)), M, [])
    basis = [(Q, MQ)]
    KQs = [K @ Q]
    last = Q
    steps = 0
    while True:
        steps += 1
        W = fac.solve(M @ last)
        Q, MQ = _m_orthonormalize(W, M, basis)
        if Q is not None:
            basis.append((Q, MQ))
            KQs.append(K @ Q)
            last = Q
        V = np.hstack([b[0] for b in basis])
        KV = np.hstack(KQs)
        dim = V.shape[1]
        if dim >= count + block or Q is None:
            H = V.T @ KV
            H = 0.5 * (H + H.T)
            theta, S = sla.eigh(H)
            theta, S = theta[:count], S[:, :count]
            X = V @ S
            MX = M @ X
            R = KV @ S - MX * theta
            res = np.linalg.norm(R, axis=0) / np.linalg.norm(MX, axis=0)
            if np.all(res <= tol) or Q is None or dim >= min(max_basis, n):
                if np.all(res <= tol) or dim >= n:
                    return EigResult(theta, X, res, steps)
                raise ConvergenceError(
                    f"block Lanczos stalled at basis size {dim}; max residual {res.max():.2e}"
                )


def m_gram(vectors: np.ndarray, M) -> np.ndarray:
    return vectors.T @ (M @ vectors)
