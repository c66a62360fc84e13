"""Degenerate implicit function theorem in finite dimension.

Setting: F: R x R^N -> R^P, written in chart coordinates x = (x1, x2) with
x1 in R^n1, x2 in R^(N-n1), such that near the base point p the solution
manifold {x : F(0, x) = q} is {p1} x R^(N-n1).  The linearisation L = D_x F(0, p)
then has kernel X2, and the rescaled map

    J(t, x1, x2) = F(t, p1 + t (x1 - w), x2) / t - q / t

extends smoothly to t = 0 with an invertible derivative when the four
conditions checked below hold.  Branches are continued by Newton on J.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .hadamard import PencilMatrices

FD_STEP = 1e-6
FD_STEP_SECOND = 1e-4
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
SMALL_T = 1e-9
TANGENT_STEP = 1e-4


class DiftError(RuntimeError):
    pass


class ConditionError(DiftError):
    """One of the hypotheses (a)-(d) fails; ``report`` says which."""

    def __init__(self, report: "ConditionReport"):
        self.report = report
        super().__init__("; ".join(report.failures()))


class NewtonError(DiftError):
    pass


# ----------------------------------------------------------------------------
# finite differences


def _fd(f: Callable[[float], np.ndarray], h: float) -> np.ndarray:
    """Central difference at 0, Richardson-combined over steps h and h/2."""
    d1 = (f(h) - f(-h)) / (2 * h)
    d2 = (f(h / 2) - f(-h / 2)) / h
    return (4 * d2 - d1) / 3


def _fd_jacobian(g: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float) -> np.ndarray:
    x = np.asarray(x, float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = 1.0
        cols.append(_fd(lambda s: np.asarray(g(x + s * e), float), h))
    if not cols:
        return np.zeros((np.asarray(g(x)).size, 0))
    return np.stack(cols, axis=1)


# ----------------------------------------------------------------------------
# problem


@dataclass
class DiftProblem:
    """F with base point p, chart split after the first ``n1`` coordinates.

    ``F_t(t, x)`` and ``jac(t, x)`` (d/dx) are optional analytic
    derivatives; missing ones are taken by finite differences.  When ``v``
    is omitted it is the least-squares solution of L|X1 v1 = F_t(0, p).
    """

    F: Callable
    p: np.ndarray
    n1: int
    q: np.ndarray
    v: np.ndarray | None = None
    F_t: Callable | None = None
    jac: Callable | None = None
    name: str = ""

    def __post_init__(self):
        self.p = np.atleast_1d(np.asarray(self.p, float))
        self.q = np.atleast_1d(np.asarray(self.q, float))
        if not 0 <= self.n1 <= self.p.size:
            raise DiftError(f"n1 = {self.n1} outside 0..{self.p.size}")
        if self.v is None:
            L1 = self.L()[:, : self.n1]
            w = np.linalg.lstsq(L1, self.Ft(0.0, self.p), rcond=None)[0] if self.n1 else np.zeros(0)
            self.v = np.concatenate([w, np.zeros(self.p.size - self.n1)])
        self.v = np.atleast_1d(np.asarray(self.v, float))

    @property
    def N(self) -> int:
        return self.p.size

    @property
    def w(self) -> np.ndarray:
        return self.v[: self.n1]

    def eval(self, t, x) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.F(float(t), np.asarray(x, float)), float))

    def Ft(self, t, x) -> np.ndarray:
        if self.F_t is not None:
            return np.atleast_1d(np.asarray(self.F_t(float(t), np.asarray(x, float)), float))
        return _fd(lambda s: self.eval(t + s, x), FD_STEP)

    def Dx(self, t, x) -> np.ndarray:
        if self.jac is not None:
            return np.atleast_2d(np.asarray(self.jac(float(t), np.asarray(x, float)), float))
        return _fd_jacobian(lambda y: self.eval(t, y), x, FD_STEP)

    def L(self) -> np.ndarray:
        return self.Dx(0.0, self.p)

    def split(self, x):
        return x[: self.n1], x[self.n1 :]

    def lift(self, t, xt: np.ndarray) -> np.ndarray:
        """Chart point x = (p1 + t (x1~ - w), x2~) from rescaled coordinates."""
        x1, x2 = self.split(xt)
        return np.concatenate([self.p[: self.n1] + t * (x1 - self.w), x2])

    def J(self, t, xt) -> np.ndarray:
        if abs(t) > SMALL_T:
            return (self.eval(t, self.lift(t, xt)) - self.q) / t
        # J(0, x1, x2) = F_t + D_x1 F (x1 - w) at (0, p1, x2)
        x1, x2 = self.split(xt)
        base = np.concatenate([self.p[: self.n1], x2])
        D1 = self.Dx(0.0, base)[:, : self.n1]
        return self.Ft(0.0, base) + D1 @ (x1 - self.w)

    def DJ(self, t, xt) -> np.ndarray:
        if abs(t) > SMALL_T:
            D = self.Dx(t, self.lift(t, xt))
            return np.hstack([D[:, : self.n1], D[:, self.n1 :] / t])
        return _fd_jacobian(lambda y: self.J(0.0, y), xt, FD_STEP_SECOND)

    def G(self) -> np.ndarray:
        """D_x2 (F_t - D_x F v) at (0, p), shape (P, N - n1)."""
        n2 = self.N - self.n1

        def g(y2):
            x = np.concatenate([self.p[: self.n1], y2])
            return self.Ft(0.0, x) - self.Dx(0.0, x) @ self.v

        if n2 == 0:
            return np.zeros((self.q.size, 0))
        return _fd_jacobian(g, self.p[self.n1 :], FD_STEP_SECOND)


# ----------------------------------------------------------------------------
# conditions


@dataclass(frozen=True)
class Condition:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ConditionReport:
    base_residual: Condition
    a: Condition
    b: Condition
    c: Condition
    d: Condition

    @property
    def conditions(self) -> tuple:
        return (self.base_residual, self.a, self.b, self.c, self.d)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failures(self) -> list[str]:
        return [f"condition {c.name} failed: {c.detail}" for c in self.conditions if not c.passed]

    def to_dict(self) -> dict:
        return {c.name: {"value": c.value, "threshold": c.threshold, "passed": c.passed, "detail": c.detail}
                for c in self.conditions}


def check_conditions(problem: DiftProblem, samples: int = 8, radius: float = 1e-2, seed: int = 0,
                     raise_on_failure: bool = False) -> ConditionReport:
    """Verify the hypotheses numerically.

    (a) F(0, .) = q on sampled points of {p1} x X2;
    (b) L kills X2 and is injective on X1 (SVD threshold);
    (c) F_t(0, p) = L v;
    (d) [L|X1, G] is square and nonsingular.
    """
    pr = problem
    r0 = float(np.linalg.norm(pr.eval(0.0, pr.p) - pr.q))
    base = Condition("base", r0, 1e-10, r0 <= 1e-10, f"|F(0,p) - q| = {r0:.3e}")

    rng = np.random.default_rng(seed)
    n2 = pr.N - pr.n1
    worst = 0.0
    for _ in range(samples if n2 else 0):
        x = pr.p.copy()
        x[pr.n1 :] += radius * rng.uniform(-1, 1, n2)
        worst = max(worst, float(np.linalg.norm(pr.eval(0.0, x) - pr.q)))
    a = Condition("a", worst, 1e-10, worst <= 1e-10, f"max |F(0,x) - q| on the manifold = {worst:.3e}")

    L = pr.L()
    L1, L2 = L[:, : pr.n1], L[:, pr.n1 :]
    scale = max(float(np.linalg.norm(L)), 1e-300)
    k_norm = float(np.linalg.norm(L2)) if L2.size else 0.0
    sv = np.linalg.svd(L1, compute_uv=False) if L1.size else np.zeros(0)
    rank_ok = sv.size == pr.n1 and (sv.size == 0 or sv.min() > 1e-8 * scale)
    b_ok = k_norm <= 1e-8 and rank_ok
    smin1 = float(sv.min()) if sv.size else float("inf")
    b = Condition("b", k_norm, 1e-8, b_ok,
                  f"|L on X2| = {k_norm:.3e}, smallest singular value on X1 = {smin1:.3e}")

    rc = float(np.linalg.norm(pr.Ft(0.0, pr.p) - L @ pr.v))
    c = Condition("c", rc, 1e-8, rc <= 1e-8, f"|F_t(0,p) - L v| = {rc:.3e}")

    S = np.hstack([L1, pr.G()])
    if S.shape[0] != S.shape[1]:
        d = Condition("d", float("nan"), 1e-8, False, f"[L|X1, G] is {S.shape[0]}x{S.shape[1]}, not square")
    else:
        s = np.linalg.svd(S, compute_uv=False)
        ratio = float(s.min() / max(s.max(), 1e-300)) if s.size else 1.0
        d = Condition("d", ratio, 1e-8, ratio > 1e-8, f"relative smallest singular value of [L|X1, G] = {ratio:.3e}")

    rep = ConditionReport(base, a, b, c, d)
    if raise_on_failure and not rep.passed:
        raise ConditionError(rep)
    return rep


# ----------------------------------------------------------------------------
# continuation


@dataclass
class DiftBranch:
    t: np.ndarray
    x: np.ndarray  # (n_t, N) chart points
    rescaled: np.ndarray  # (n_t, N) solutions of J = 0
    residuals: np.ndarray  # |F(t, x(t)) - q|
    iterations: np.ndarray
    x_prime0: np.ndarray
    tangency: float  # |(x'(0) + v)_X1|
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "t": self.t.tolist(),
            "x": self.x.tolist(),
            "residuals": self.residuals.tolist(),
            "iterations": self.iterations.tolist(),
            "x_prime0": self.x_prime0.tolist(),
            "tangency": self.tangency,
            "diagnostics": list(self.diagnostics),
        }


def _newton(problem: DiftProblem, t: float, x0: np.ndarray, tol: float, max_iter: int):
    """Damped Newton on J(t, .) = 0; returns (x, iterations, residual history)."""
    x = x0.copy()

    def resid(y):
        # |J|; for t != 0 the goal is |F - q| = |t| |J| <= tol
        return float(np.linalg.norm(problem.J(t, y)))

    if abs(t) > SMALL_T:
        goal = tol / abs(t)
    else:
        # at t = 0, J is only as accurate as its derivatives
        goal = tol if problem.F_t is not None else 1e-8
    r = resid(x)
    hist = [r]
    for it in range(max_iter):
        if r <= goal:
            return x, it, hist
        D = problem.DJ(t, x)
        step, *_ = np.linalg.lstsq(D, -problem.J(t, x), rcond=None)
        if not np.all(np.isfinite(step)):
            raise NewtonError(f"singular Newton system at t = {t}")
        lam = 1.0
        for _ in range(30):
            cand = x + lam * step
            rc = resid(cand)
            if rc < r or rc <= goal:
                break
            lam *= 0.5
        else:
            if np.linalg.norm(step) <= 1e-14 * (1 + np.linalg.norm(x)):
                return x, it, hist
            raise NewtonError(f"Newton stalled at t = {t} with residual {r:.3e}")
        x, r = cand, rc
        hist.append(r)
    if r <= 1e3 * goal:
        return x, max_iter, hist
    raise NewtonError(f"Newton did not converge at t = {t}: residual {r:.3e} after {max_iter} iterations")


def solve_branch(problem: DiftProblem, t_grid, tol: float = NEWTON_TOL, max_iter: int = NEWTON_MAX_ITER,
                 check: bool = True) -> DiftBranch:
    """Continue x(t) from x(0) = p over ``t_grid`` (which must contain 0)."""
    if check:
        check_conditions(problem, raise_on_failure=True)
    t_grid = np.unique(np.asarray(t_grid, float))
    if not np.any(t_grid == 0.0):
        t_grid = np.unique(np.append(t_grid, 0.0))
    n_t = t_grid.size
    zero = int(np.flatnonzero(t_grid == 0.0)[0])
    start = np.concatenate([np.zeros(problem.n1), problem.p[problem.n1 :]])
    sol = np.empty((n_t, problem.N))
    iters = np.zeros(n_t, dtype=int)
    diags = []
    x0, it0, h0 = _newton(problem, 0.0, start, tol, max_iter)
    sol[zero], iters[zero] = x0, it0
    for direction in (1, -1):
        prev = x0
        idx = range(zero + 1, n_t) if direction == 1 else range(zero - 1, -1, -1)
        for i in idx:
            x, it, hist = _newton(problem, float(t_grid[i]), prev, tol, max_iter)
            # quadratic convergence: r_{k+1} <= C r_k^2 once r_k is small
            for r_prev, r_next in zip(hist, hist[1:]):
                if 1e-8 < r_prev < 1e-2 and r_next > 100.0 * r_prev**2 + 1e-12 / abs(t_grid[i]):
                    diags.append(f"slow Newton convergence at t = {t_grid[i]:.4g}")
                    break
            sol[i], iters[i] = x, it
            prev = x
    xs = np.array([problem.lift(t, s) for t, s in zip(t_grid, sol)])
    xs[zero] = problem.p
    res = np.array([np.linalg.norm(problem.eval(t, x) - problem.q) for t, x in zip(t_grid, xs)])

    # x'(0) by a three-point difference on dedicated solves close to 0
    hstep = TANGENT_STEP
    xpm = []
    for tt in (hstep, -hstep):
        xx, _, _ = _newton(problem, tt, x0, tol, max_iter)
        xpm.append(problem.lift(tt, xx))
    xp = (xpm[0] - xpm[1]) / (2 * hstep)
    tang = float(np.linalg.norm((xp + problem.v)[: problem.n1]))
    return DiftBranch(t_grid, xs, sol, res, iters, xp, tang, diags)


# ----------------------------------------------------------------------------
# eigenvalue problems A(t) = A0 + t A1 + t^2 A2


@dataclass
class EigenChart:
    """Chart for F(t, lam, u) = (|u|^2 / 2, (A(t) - lam) u) at a root of the cluster.

    Coordinates x = (y_lam, y_r, y_perp, y_K) with
    lam = lam0 + y_lam and u = (1 + y_r) n(u* + E_K y_K) + E_perp y_perp, where
    n(.) normalises, E_K spans the cluster eigenspace orthogonal to u* and
    E_perp its orthogonal complement.  X2 = y_K is the tangent of the unit
    sphere in the eigenspace.
    """

    A0: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    lam0: float
    u_star: np.ndarray
    E_K: np.ndarray
    E_perp: np.ndarray
    predicted_slope: float
    problem: DiftProblem

    def lam(self, x) -> np.ndarray:
        return self.lam0 + np.asarray(x)[..., 0]

    def u(self, x) -> np.ndarray:
        return _chart_u(self, np.asarray(x, float))[0]


def _chart_u(ch, x):
    n_perp = ch.E_perp.shape[1]
    y_r = x[1]
    y_p = x[2 : 2 + n_perp]
    y_k = x[2 + n_perp :]
    s = ch.u_star + ch.E_K @ y_k
    ns = np.linalg.norm(s)
    nhat = s / ns
    u = (1 + y_r) * nhat + ch.E_perp @ y_p
    du = np.zeros((u.size, x.size))
    du[:, 1] = nhat
    du[:, 2 : 2 + n_perp] = ch.E_perp
    du[:, 2 + n_perp :] = (1 + y_r) * (ch.E_K - np.outer(nhat, nhat @ ch.E_K)) / ns
    return u, du


def cluster_basis(A0, lam0: float, tol: float = 1e-8):
    """Orthonormal bases of the lam0-eigenspace of A0 and of its complement."""
    vals, vecs = np.linalg.eigh(A0)
    sel = np.abs(vals - lam0) <= tol * max(1.0, abs(lam0))
    if not np.any(sel):
        raise DiftError(f"{lam0} is not an eigenvalue of A0")
    return vecs[:, sel], vecs[:, ~sel]


def matrix_pencil(A0, A1, lam0: float) -> PencilMatrices:
    """Hadamard-pencil analogue for A(t) = A0 + t A1 on the lam0-cluster.

    A = -E^T A1 E and B = E^T E, so that a simple root mu gives lam'(0) = -mu
    just as for domain perturbations.
    """
    E, _ = cluster_basis(np.asarray(A0, float), lam0)
    return PencilMatrices(-E.T @ np.asarray(A1, float) @ E, E.T @ E, "matrix_family", lam0)


def eigen_problem(A0, A1, lam0: float, root: int = 0, A2=None, name: str = "") -> EigenChart:
    """Build the chart and DiftProblem for the ``root``-th (ascending) slope of the cluster."""
    A0 = np.asarray(A0, float)
    A1 = np.asarray(A1, float)
    A2 = np.zeros_like(A0) if A2 is None else np.asarray(A2, float)
    for M in (A0, A1, A2):
        if M.shape != A0.shape or not np.allclose(M, M.T, atol=1e-14):
            raise DiftError("matrix family must be square and symmetric")
    E, E_perp = cluster_basis(A0, lam0)
    r_vals, r_vecs = np.linalg.eigh(E.T @ A1 @ E)
    if not 0 <= root < r_vals.size:
        raise DiftError(f"root index {root} outside 0..{r_vals.size - 1}")
    u_star = E @ r_vecs[:, root]
    E_K = E @ np.delete(r_vecs, root, axis=1)
    n = A0.shape[0]

    def A(t):
        return A0 + t * A1 + t * t * A2

    holder = {}

    def F(t, x):
        u, _ = _chart_u(holder["ch"], x)
        lam = lam0 + x[0]
        return np.concatenate([[0.5 * u @ u], (A(t) - lam * np.eye(n)) @ u])

    def F_t(t, x):
        u, _ = _chart_u(holder["ch"], x)
        return np.concatenate([[0.0], (A1 + 2 * t * A2) @ u])

    def jac(t, x):
        u, du = _chart_u(holder["ch"], x)
        lam = lam0 + x[0]
        top = u @ du
        bottom = (A(t) - lam * np.eye(n)) @ du
        bottom[:, 0] = -u
        return np.vstack([top[None, :], bottom])

    n1 = 2 + E_perp.shape[1]
    p = np.zeros(n + 1)
    q = np.concatenate([[0.5], np.zeros(n)])
    ch = EigenChart(A0, A1, A2, lam0, u_star, E_K, E_perp, float(r_vals[root]), None)  # type: ignore[arg-type]
    holder["ch"] = ch
    ch.problem = DiftProblem(F, p, n1, q, F_t=F_t, jac=jac, name=name)
    return ch


# ----------------------------------------------------------------------------
# catalog


def _ex_2x2():
    return eigen_problem(np.eye(2), np.diag([1.0, 2.0]), 1.0, root=0, name="matrix_family_2x2")


def _ex_2x2_upper():
    return eigen_problem(np.eye(2), np.diag([1.0, 2.0]), 1.0, root=1, name="matrix_family_2x2_upper")


def _ex_2x2_offdiag():
    return eigen_problem(np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]]), 1.0, root=1, name="matrix_family_2x2_offdiag")


def _ex_3x3(root=0):
    A0 = np.diag([1.0, 1.0, 3.0])
    A1 = np.array([[0.5, 0.3, 0.2], [0.3, -0.4, 0.1], [0.2, 0.1, 0.7]])
    A2 = np.array([[0.2, -0.1, 0.0], [-0.1, 0.3, 0.25], [0.0, 0.25, -0.1]])
    return eigen_problem(A0, A1, 1.0, root=root, A2=A2, name=f"matrix_family_3x3{'_upper' if root else ''}")


def _ex_equal():
    return eigen_problem(np.eye(2), np.eye(2), 1.0, root=0, name="equal_slopes_2x2")


def _ex_scalar():
    return DiftProblem(lambda t, x: x - t, [0.0], 1, [0.0], F_t=lambda t, x: np.array([-1.0]),
                       jac=lambda t, x: np.eye(1), name="scalar_linear")


EXAMPLES: dict[str, Callable] = {
    "equal_slopes_2x2": _ex_equal,
    "matrix_family_2x2": _ex_2x2,
    "matrix_family_2x2_offdiag": _ex_2x2_offdiag,
    "matrix_family_2x2_upper": _ex_2x2_upper,
    "matrix_family_3x3": lambda: _ex_3x3(0),
    "matrix_family_3x3_upper": lambda: _ex_3x3(1),
    "scalar_linear": _ex_scalar,
}


def example(name: str):
    """EigenChart (matrix families) or DiftProblem (scalar_linear) by catalog name."""
    key = name.removeprefix("dift.")
    if key not in EXAMPLES:
        raise KeyError(f"unknown dift example {name!r}; known: {sorted(EXAMPLES)}")
    return EXAMPLES[key]()
