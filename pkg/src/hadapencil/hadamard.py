"""Boundary pencil matrices A, B and slope predictions lambda'(0) = -mu.

``A_ij = int (du_i/dnu)(du_j/dnu) delta dS`` with delta = phi_bar . nu, and
``B_ij = <u_i, u_j>_L2``.  Two independent routes produce A:

* :func:`assemble_quadrature` sums traces against the sampled normal speed;
* the ``*_closed_form`` functions use Fourier/moment formulas for the disk,
  the square and the ball.

Agreement between the two is a genuine cross-check: the closed forms never
evaluate a trace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import modes
from . import pencil
from . import quadrature as quad

PI = math.pi


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True)
class PencilMatrices:
    A: np.ndarray
    B: np.ndarray
    provenance: str
    eigenvalue: float
    labels: tuple = ()

    @property
    def size(self) -> int:
        return self.A.shape[0]

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "provenance": self.provenance,
            "eigenvalue": self.eigenvalue,
            "basis": list(self.labels),
        }


def assemble_quadrature(space: modes.Eigenspace, speed: geo.NormalSpeed) -> PencilMatrices:
    """A_ij by the boundary quadrature rule carried by ``speed``."""
    try:
        tr = space.traces(speed.params)
    except geo.CornerError as exc:
        raise AssemblyError(f"trace evaluation failed: {exc}") from exc
    if not np.all(np.isfinite(tr)):
        raise AssemblyError("non-finite trace values at quadrature nodes")
    wd = speed.weights * speed.values
    a = (tr * wd) @ tr.T
    a = 0.5 * (a + a.T)
    return PencilMatrices(a, space.gram.copy(), "quadrature", space.eigenvalue, space.labels)


# ----------------------------------------------------------------------------
# disk


@dataclass(frozen=True)
class DiskClosedForm:
    matrices: PencilMatrices
    discriminant: float
    mean_coeff: float
    harmonic: tuple


def disk_closed_form(k: int, speed: geo.NormalSpeed, m: int = 1) -> DiskClosedForm:
    """A from the 0th and (2k)th Fourier coefficients of delta.

    In the (sin, cos) basis with f'(1)^2 = 2 lambda0 / pi:
    A = f'(1)^2 / 2 * [[c0 - c2k, s2k], [s2k, c0 + c2k]], and the discriminant
    of chi is |delta_hat(2k)|^2 = c2k^2 + s2k^2.
    """
    if speed.samples is None:
        raise AssemblyError("disk closed form needs periodic samples of delta")
    space = modes.disk_eigenspace(k, m)
    c0, _ = quad.fourier_coeffs(speed.samples, 0)
    c2, s2 = quad.fourier_coeffs(speed.samples, 2 * k)
    f2 = 2.0 * space.eigenvalue / PI
    a = 0.5 * f2 * np.array([[c0 - c2, s2], [s2, c0 + c2]])
    mats = PencilMatrices(a, np.eye(2), "closed_form", space.eigenvalue, space.labels)
    return DiskClosedForm(mats, c2 * c2 + s2 * s2, c0, (c2, s2))


# ----------------------------------------------------------------------------
# square


@dataclass(frozen=True)
class SquareClosedForm:
    matrices: PencilMatrices
    offdiag_condition: bool
    diagonal_condition: bool

    @property
    def simple(self) -> bool:
        return self.offdiag_condition or self.diagonal_condition


def square_fourier_tables(speed: geo.NormalSpeed, sigma, panels: int = quad.DEFAULT_PANELS):
    """Cosine coefficients eta_hat(k), mu_hat(k) at the orders the closed form needs.

    Integrals are split at t = pi where eta and mu switch edges.
    """
    if speed.eta is None or speed.mu is None:
        raise AssemblyError("square closed form needs the eta/mu edge functions")
    s1, s2 = sigma
    orders = sorted({0, abs(s1 - s2), s1 + s2, 2 * s1, 2 * s2})

    def coeff(fn, k):
        return sum(
            quad.integrate_interval(lambda t: fn(t) * np.cos(k * t), lo, hi, panels)
            for lo, hi in ((0.0, PI), (PI, 2 * PI))
        )

    eta_hat = {k: coeff(speed.eta, k) for k in orders}
    mu_hat = {k: coeff(speed.mu, k) for k in orders}
    return eta_hat, mu_hat


def square_closed_form(sigma, eta_hat: dict, mu_hat: dict, rel_tol: float = 1e-9) -> SquareClosedForm:
    """A in the basis (u_sigma, u_sigmabar) from the cosine tables.

    Also flags the two genericity conditions: (eta_hat + mu_hat) differs at
    s1 + s2 and |s1 - s2| (off-diagonal nonzero), and the diagonal-difference
    condition.  Comparisons use ``rel_tol`` relative to the table magnitude.
    """
    s1, s2 = (int(v) for v in sigma)
    d = abs(s1 - s2)
    e, m = eta_hat, mu_hat
    c = 2.0 / PI**2
    a11 = c * s1**2 * (m[0] - m[2 * s2]) + c * s2**2 * (e[0] - e[2 * s1])
    a22 = c * s2**2 * (m[0] - m[2 * s1]) + c * s1**2 * (e[0] - e[2 * s2])
    a12 = c * s1 * s2 * (m[d] - m[s1 + s2] + e[d] - e[s1 + s2])
    a = np.array([[a11, a12], [a12, a22]])

    scale = max(1.0, max(abs(v) for v in list(e.values()) + list(m.values()))) * (s1 * s1 + s2 * s2)
    tol = rel_tol * scale
    lhs = (e[s1 + s2] + m[s1 + s2]) - (e[d] + m[d])
    diff = lambda k: m[k] - e[k]  # noqa: E731
    rhs2 = s1**2 * diff(2 * s2) - s2**2 * diff(2 * s1) - (s1**2 - s2**2) * diff(0)
    lam = float(s1 * s1 + s2 * s2)
    labels = (f"({s1},{s2})", f"({s2},{s1})")
    mats = PencilMatrices(a, np.eye(2), "closed_form", lam, labels)
    return SquareClosedForm(mats, abs(lhs) > tol, abs(rhs2) > tol)


# ----------------------------------------------------------------------------
# ball


@dataclass(frozen=True)
class BallClosedForm:
    matrices: PencilMatrices
    a: float
    F: np.ndarray
    C: np.ndarray
    R: np.ndarray
    trace_constant: float


def ball3d_closed_form(speed: geo.NormalSpeed) -> BallClosedForm:
    """A = a Id + R from the degree-2 moments of delta on S^2.

    a = kappa^2 int theta_1^2 delta, F_i = kappa^2 int (theta_i^2 - theta_1^2) delta,
    C_ij = kappa^2 int theta_i theta_j delta, with kappa the trace constant.
    """
    if not isinstance(speed.domain, geo.UnitBall3D):
        raise AssemblyError("ball closed form needs sphere samples")
    space = modes.ball3d_second_eigenspace()
    k2 = space.trace_constant**2
    th = speed.params
    wd = speed.weights * speed.values
    mom = (th.T * wd) @ th  # int theta_i theta_j delta dS
    a = k2 * mom[0, 0]
    F = np.array([0.0, k2 * (mom[1, 1] - mom[0, 0]), k2 * (mom[2, 2] - mom[0, 0])])
    C = k2 * np.tril(mom, -1)
    R = C + C.T + np.diag(F)
    A = a * np.eye(3) + R
    mats = PencilMatrices(A, np.eye(3), "closed_form", space.eigenvalue, space.labels)
    return BallClosedForm(mats, a, F, C, R, space.trace_constant)


def fourier_c0(samples) -> float:
    return quad.fourier_coeffs(samples, 0)[0]


def pair_closed_form(speed: geo.NormalSpeed) -> PencilMatrices:
    """Diagonal A for the principal mode of a pair of unit disks.

    The two basis functions live on different components, so A is diagonal
    with A_cc = f'(1)^2 int delta_c dtheta (the k = 0 mean coefficient).
    """
    if not isinstance(speed.domain, geo.DisjointPair) or len(speed.components) != 2:
        raise AssemblyError("pair closed form needs per-component periodic samples")
    space = modes.disjoint_pair_eigenspace(speed.domain)
    f2 = space.fprime1**2
    diag = [f2 * fourier_c0(c) for c in speed.components]
    return PencilMatrices(np.diag(diag), np.eye(2), "closed_form", space.eigenvalue, space.labels)


# ----------------------------------------------------------------------------
# predictions


@dataclass(frozen=True)
class RootCluster:
    root: float
    multiplicity: int

    @property
    def simple(self) -> bool:
        return self.multiplicity == 1

    @property
    def slope(self) -> float:
        return -self.root


@dataclass(frozen=True)
class SlopePrediction:
    roots: np.ndarray
    simple: np.ndarray
    clusters: tuple
    tolerance: float
    notes: tuple = field(default=())

    @property
    def predicted_slopes(self) -> list[float]:
        """lambda'(0) = -mu for every simple root."""
        return [c.slope for c in self.clusters if c.simple]

    @property
    def inconclusive(self) -> list[RootCluster]:
        return [c for c in self.clusters if not c.simple]

    def to_dict(self) -> dict:
        return {
            "roots": self.roots.tolist(),
            "simple": self.simple.tolist(),
            "gap_tolerance": self.tolerance,
            "predictions": [
                {
                    "root": c.root,
                    "multiplicity": c.multiplicity,
                    "slope": c.slope,
                    "status": "predicted" if c.simple else "inconclusive",
                }
                for c in self.clusters
            ],
            "notes": list(self.notes),
        }


def predict_slopes(p: PencilMatrices, gap_tol: float | None = None) -> SlopePrediction:
    """Roots of det(A - s B), grouped into clusters by the gap tolerance.

    Each simple root mu yields lambda'(0) = -mu.  A multiple root does not
    satisfy the simple-zero hypothesis; it is kept as an inconclusive cluster
    whose slope -mu is informational (a one-sided directional derivative).
    """
    res = pencil.generalized_roots(p.A, p.B, gap_tol)
    roots = res.roots
    clusters = []
    i = 0
    while i < roots.size:
        j = i + 1
        while j < roots.size and roots[j] - roots[j - 1] <= res.tolerance:
            j += 1
        clusters.append(RootCluster(float(np.mean(roots[i:j])), j - i))
        i = j
    notes = ()
    if any(not c.simple for c in clusters):
        notes = ("multiple root: branch derivative not determined by the pencil; slope reported informationally",)
    return SlopePrediction(roots, res.simple, tuple(clusters), res.tolerance, notes)
