"""Small dense symmetric-definite pencils det(A - s B) = 0.

Roots come from a Cholesky reduction B = L L^T, C = L^-1 A L^-T, followed by
a cyclic Jacobi eigensolver on C.  :func:`char_poly_eval` evaluates the
determinant directly by partial-pivot LU and serves as an independent check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_DIM = 16
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 50
MAX_CONDITION = 1e8


class PencilError(ValueError):
    pass


class NotDefiniteError(PencilError):
    """B is not (numerically) symmetric positive definite."""


@dataclass(frozen=True)
class PencilRoots:
    roots: np.ndarray
    vectors: np.ndarray
    simple: np.ndarray
    tolerance: float

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.roots)

    def __len__(self) -> int:
        return self.roots.size


def _as_square(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PencilError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise PencilError(f"dimension {a.shape[0]} exceeds {MAX_DIM}")
    return a


def cholesky(b: np.ndarray) -> np.ndarray:
    """Lower-triangular L with B = L L^T; raises NotDefiniteError on failure."""
    n = b.shape[0]
    low = np.zeros_like(b)
    for j in range(n):
        d = b[j, j] - low[j, :j] @ low[j, :j]
        if not d > 0.0:
            raise NotDefiniteError("Cholesky factorisation of B failed")
        low[j, j] = np.sqrt(d)
        for i in range(j + 1, n):
            low[i, j] = (b[i, j] - low[i, :j] @ low[j, :j]) / low[j, j]
    return low


def _forward(low: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    out = np.array(rhs, dtype=float)
    for i in range(low.shape[0]):
        out[i] = (out[i] - low[i, :i] @ out[:i]) / low[i, i]
    return out


def _backward_t(low: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # solve L^T x = rhs
    out = np.array(rhs, dtype=float)
    n = low.shape[0]
    for i in range(n - 1, -1, -1):
        out[i] = (out[i] - low[i + 1 :, i] @ out[i + 1 :]) / low[i, i]
    return out


def jacobi_eigh(c: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi rotations for a symmetric matrix.

    Returns ascending eigenvalues and orthonormal eigenvectors (columns).
    Stops when the off-diagonal Frobenius norm drops below ``tol`` times the
    matrix norm.
    """
    a = 0.5 * (c + c.T)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                cs = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * cs
                rot = np.array([[cs, sn], [-sn, cs]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ rot
    else:
        raise PencilError("Jacobi iteration did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def simplicity_flags(roots: np.ndarray, tol: float) -> np.ndarray:
    """root i is simple iff its distance to every other root exceeds ``tol``."""
    n = roots.size
    flags = np.ones(n, dtype=bool)
    for i in range(n):
        others = np.delete(roots, i)
        if others.size and np.min(np.abs(others - roots[i])) <= tol:
            flags[i] = False
    return flags


def default_gap_tolerance(roots: np.ndarray) -> float:
    radius = float(np.max(np.abs(roots))) if roots.size else 0.0
    return max(1e-8, 1e-6 * radius)


def generalized_roots(a, b, gap_tol: float | None = None) -> PencilRoots:
    """Real roots of det(A - s B) for symmetric A and SPD B.

    Also returns B-orthonormal generalized eigenvectors (columns) and simple
    flags; the default gap tolerance is max(1e-8, 1e-6 * spectral radius).
    """
    a = _as_square(a, "A")
    b = _as_square(b, "B")
    if a.shape != b.shape:
        raise PencilError("A and B have different shapes")
    if not np.allclose(b, b.T, rtol=0, atol=1e-12 * max(1.0, np.abs(b).max())):
        raise NotDefiniteError("B is not symmetric")
    b = 0.5 * (b + b.T)
    low = cholesky(b)
    bw, _ = jacobi_eigh(b)
    if bw[-1] > MAX_CONDITION * bw[0]:
        raise NotDefiniteError(f"B condition number exceeds {MAX_CONDITION:g}")
    a = 0.5 * (a + a.T)
    # C = L^-1 A L^-T
    tmp = np.column_stack([_forward(low, a[:, j]) for j in range(a.shape[1])])
    c = np.column_stack([_forward(low, tmp[j, :]) for j in range(a.shape[0])])
    w, y = jacobi_eigh(c)
    vec = np.column_stack([_backward_t(low, y[:, j]) for j in range(y.shape[1])])
    tol = default_gap_tolerance(w) if gap_tol is None else gap_tol
    return PencilRoots(w, vec, simplicity_flags(w, tol), tol)


def lu_det(m) -> float:
    """Determinant by Gaussian elimination with partial pivoting."""
    a = np.array(m, dtype=float)
    n = a.shape[0]
    det = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0.0:
            return 0.0
        if p != k:
            a[[k, p]] = a[[p, k]]
            det = -det
        det *= a[k, k]
        a[k + 1 :, k:] -= np.outer(a[k + 1 :, k] / a[k, k], a[k, k:])
    return float(det)


def char_poly_eval(a, b, s: float) -> float:
    """chi(s) = det(A - s B)."""
    a = _as_square(a, "A")
    b = _as_square(b, "B")
    return lu_det(a - s * b)
