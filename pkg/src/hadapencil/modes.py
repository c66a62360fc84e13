"""Closed-form multiple Dirichlet eigenspaces on the reference domains.

Every basis is L2-orthonormal, so the Gram matrix B is the identity.  An
eigenspace can be re-expressed in another basis with :meth:`Eigenspace.rotated`;
the Gram record follows the change of basis.
"""
from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from . import geometry as geo
from . import quadrature as quad
from . import specfun

PI = math.pi


class ModesError(ValueError):
    pass


class UnsupportedMultiplicity(ModesError):
    pass


class Eigenspace:
    """Basis of a multiple eigenvalue with interior and boundary-trace evaluators.

    Subclasses provide ``_raw_values``, ``_raw_laplacian`` and ``_raw_traces``
    returning arrays of shape (basis size, n points).
    """

    domain: object
    eigenvalue: float
    labels: tuple

    def __init__(self, transform=None):
        n = len(self.labels)
        self.transform = np.eye(n) if transform is None else np.asarray(transform, dtype=float)
        if self.transform.shape != (n, n):
            raise ModesError("basis transform has the wrong shape")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def gram(self) -> np.ndarray:
        # raw bases are orthonormal by their normalisation constants
        return self.transform @ self.transform.T

    def values(self, points) -> np.ndarray:
        return self.transform @ self._raw_values(np.atleast_2d(points))

    def laplacian(self, points) -> np.ndarray:
        return self.transform @ self._raw_laplacian(np.atleast_2d(points))

    def traces(self, params) -> np.ndarray:
        """Normal derivatives du_i/dnu at boundary parameters."""
        return self.transform @ self._raw_traces(np.asarray(params, dtype=float))

    def rotated(self, q) -> "Eigenspace":
        """Same eigenspace in the basis ``q @ current basis``."""
        out = object.__new__(type(self))
        out.__dict__.update(self.__dict__)
        out.transform = np.asarray(q, dtype=float) @ self.transform
        return out

    def residual(self, points) -> np.ndarray:
        """Pointwise Laplacian u + lambda0 u for every basis function."""
        return self.laplacian(points) + self.eigenvalue * self.values(points)


# ----------------------------------------------------------------------------
# disk


class DiskEigenspace(Eigenspace):
    """span{c J_k(j r) sin(k theta), c J_k(j r) cos(k theta)} with j = j_{k,m}."""

    def __init__(self, k: int, m: int, transform=None):
        if int(k) != k or k < 1:
            raise ModesError("disk eigenspaces need angular order k >= 1 (k = 0 is simple)")
        try:
            zero = specfun.bessel_zero(k, m)
        except specfun.BesselDomainError as exc:
            raise ModesError(str(exc)) from exc
        self.domain = geo.UnitDisk()
        self.k, self.m = int(k), int(m)
        self.j = zero.value
        self.eigenvalue = self.j**2
        jp = specfun.bessel_j_prime(self.k, self.j)
        # int_0^1 J_k(j r)^2 r dr = J_k'(j)^2 / 2 and int sin^2 = pi
        self.c = math.sqrt(2.0 / (PI * jp * jp))
        self.fprime1 = self.c * self.j * jp
        self.labels = ("sin", "cos")
        super().__init__(transform)

    def _polar(self, x):
        return np.hypot(x[:, 0], x[:, 1]), np.arctan2(x[:, 1], x[:, 0])

    def _angular(self, th):
        return np.stack([np.sin(self.k * th), np.cos(self.k * th)])

    def _raw_values(self, x):
        r, th = self._polar(x)
        return self.c * specfun.bessel_j(self.k, self.j * r) * self._angular(th)

    def _raw_laplacian(self, x):
        r, th = self._polar(x)
        k, j = self.k, self.j
        f = specfun.bessel_j(k, j * r)
        fp = j * specfun.bessel_j_prime(k, j * r)
        fpp = j * j * specfun.bessel_j_second(k, j * r)
        radial = fpp + fp / r - k * k * f / (r * r)
        return self.c * radial * self._angular(th)

    def _raw_traces(self, theta):
        return self.fprime1 * self._angular(theta)


def disk_eigenspace(k: int, m: int) -> DiskEigenspace:
    return DiskEigenspace(k, m)


# ----------------------------------------------------------------------------
# square


def lattice_solutions(lam: int) -> list[tuple[int, int]]:
    """Ordered pairs (a, b) of positive integers with a^2 + b^2 = lam."""
    out = []
    a = 1
    while a * a < lam:
        b2 = lam - a * a
        b = math.isqrt(b2)
        if b * b == b2 and b >= 1:
            out.append((a, b))
        a += 1
    return out


class SquareEigenspace(Eigenspace):
    """span{u_sigma, u_sigmabar}, u_sigma = (2/pi) sin(s1 x1) sin(s2 x2)."""

    def __init__(self, s1: int, s2: int, transform=None):
        s1, s2 = int(s1), int(s2)
        if s1 < 1 or s2 < 1:
            raise ModesError("square mode indices must be positive")
        lam = s1 * s1 + s2 * s2
        sols = lattice_solutions(lam)
        if s1 == s2:
            raise UnsupportedMultiplicity(f"({s1}, {s2}) gives a simple eigenvalue")
        if len(sols) != 2:
            raise UnsupportedMultiplicity(
                f"lambda = {lam} has {len(sols)} lattice solutions {sols}; only two are supported"
            )
        self.domain = geo.Square()
        self.sigma = (s1, s2)
        self.eigenvalue = float(lam)
        self.labels = (f"({s1},{s2})", f"({s2},{s1})")
        super().__init__(transform)

    def _modes(self):
        s1, s2 = self.sigma
        return ((s1, s2), (s2, s1))

    def _raw_values(self, x):
        return np.stack([2 / PI * np.sin(a * x[:, 0]) * np.sin(b * x[:, 1]) for a, b in self._modes()])

    def _raw_laplacian(self, x):
        return np.stack(
            [-(a * a + b * b) * 2 / PI * np.sin(a * x[:, 0]) * np.sin(b * x[:, 1]) for a, b in self._modes()]
        )

    def _raw_traces(self, s):
        pts, nrm = geo._square_boundary(s)
        x1, x2 = pts[:, 0], pts[:, 1]
        rows = []
        for a, b in self._modes():
            g1 = 2 / PI * a * np.cos(a * x1) * np.sin(b * x2)
            g2 = 2 / PI * b * np.sin(a * x1) * np.cos(b * x2)
            rows.append(g1 * nrm[:, 0] + g2 * nrm[:, 1])
        return np.stack(rows)


def square_eigenspace(s1: int, s2: int) -> SquareEigenspace:
    return SquareEigenspace(s1, s2)


# ----------------------------------------------------------------------------
# ball


class BallEigenspace(Eigenspace):
    """Second Dirichlet eigenspace of the unit ball in R^3: c j1(a r) x_i / r."""

    def __init__(self, transform=None):
        self.domain = geo.UnitBall3D()
        self.alpha = specfun.spherical_bessel_j1_zero()
        self.eigenvalue = self.alpha**2
        jp = specfun.spherical_bessel_j1_prime(self.alpha)
        # int_0^1 j1(a r)^2 r^2 dr = j1'(a)^2 / 2 at a zero of j1; int theta_i^2 dS = 4 pi / 3
        self.radial_norm = 0.5 * jp * jp
        self.c = 1.0 / math.sqrt(4 * PI / 3 * self.radial_norm)
        self.trace_constant = self.c * self.alpha * jp
        self.labels = ("x1", "x2", "x3")
        super().__init__(transform)

    def _raw_values(self, x):
        r = np.linalg.norm(x, axis=1)
        return (self.c * specfun.spherical_bessel_j1(self.alpha * r) / r) * x.T

    def _raw_laplacian(self, x):
        r = np.linalg.norm(x, axis=1)
        a = self.alpha
        g = specfun.spherical_bessel_j1(a * r)
        gp = a * specfun.spherical_bessel_j1_prime(a * r)
        gpp = a * a * specfun.spherical_bessel_j1_second(a * r)
        radial = gpp + 2 * gp / r - 2 * g / (r * r)
        return (self.c * radial / r) * x.T

    def _raw_traces(self, theta):
        theta = np.atleast_2d(theta)
        return self.trace_constant * theta.T


def ball3d_second_eigenspace() -> BallEigenspace:
    return BallEigenspace()


# ----------------------------------------------------------------------------
# disjoint pair


class PairEigenspace(Eigenspace):
    """Principal eigenfunctions u0 on U0 and v0 on V0 of a pair of unit disks."""

    def __init__(self, domain: geo.DisjointPair, transform=None):
        if not isinstance(domain, geo.DisjointPair):
            raise ModesError("pair eigenspace needs a DisjointPair domain")
        if not isinstance(domain.base, geo.UnitDisk):
            raise ModesError("pair components must be unit disks (closed-form principal mode)")
        self.domain = domain
        self.j = specfun.bessel_zero(0, 1).value
        self.eigenvalue = self.j**2
        j1 = specfun.bessel_j(1, self.j)
        # int_0^1 J0(j r)^2 r dr = J1(j)^2 / 2 and int dtheta = 2 pi
        self.c = 1.0 / math.sqrt(PI * j1 * j1)
        self.fprime1 = -self.c * self.j * j1
        self.labels = ("u0", "v0")
        super().__init__(transform)

    def _raw_values(self, x):
        comp = self.domain.component_of(x)
        off = np.asarray(self.domain.offset)
        out = np.zeros((2, x.shape[0]))
        for c in (0, 1):
            sel = comp == c
            r = np.linalg.norm(x[sel] - c * off, axis=1)
            inside = r <= 1.0
            vals = np.zeros(r.size)
            vals[inside] = self.c * specfun.bessel_j(0, self.j * r[inside])
            out[c, sel] = vals
        return out

    def _raw_laplacian(self, x):
        comp = self.domain.component_of(x)
        off = np.asarray(self.domain.offset)
        out = np.zeros((2, x.shape[0]))
        j = self.j
        for c in (0, 1):
            sel = comp == c
            r = np.linalg.norm(x[sel] - c * off, axis=1)
            inside = r <= 1.0
            rr = r[inside]
            f = specfun.bessel_j(0, j * rr)
            fp = j * specfun.bessel_j_prime(0, j * rr)
            fpp = j * j * specfun.bessel_j_second(0, j * rr)
            vals = np.zeros(r.size)
            vals[inside] = self.c * (fpp + fp / rr)
            out[c, sel] = vals
        return out

    def _raw_traces(self, params):
        params = np.atleast_2d(params)
        comp = params[:, 0].astype(int)
        return np.stack([np.where(comp == c, self.fprime1, 0.0) for c in (0, 1)])


def disjoint_pair_eigenspace(domain: geo.DisjointPair) -> PairEigenspace:
    return PairEigenspace(domain)


# ----------------------------------------------------------------------------
# exact spectra (used to size eigenvalue windows)


def exact_spectrum(domain, upto: float) -> np.ndarray:
    """Dirichlet eigenvalues <= ``upto`` with multiplicity, ascending."""
    if isinstance(domain, geo.UnitDisk):
        vals = []
        for k in range(specfun.K_MAX + 1):
            # j_{k,1} increases with k
            if specfun.bessel_zero(k, 1).value ** 2 > upto:
                break
            for m in range(1, specfun.M_MAX + 1):
                lam = specfun.bessel_zero(k, m).value ** 2
                if lam > upto:
                    break
                vals.extend([lam] * (1 if k == 0 else 2))
        return np.sort(np.array(vals))
    if isinstance(domain, geo.Square):
        n = int(math.isqrt(int(upto))) + 1
        vals = [a * a + b * b for a in range(1, n + 1) for b in range(1, n + 1) if a * a + b * b <= upto]
        return np.sort(np.array(vals, dtype=float))
    if isinstance(domain, geo.DisjointPair):
        base = exact_spectrum(domain.base, upto)
        return np.sort(np.concatenate([base, base]))
    raise ModesError(f"no exact spectrum for {domain!r}")


# ----------------------------------------------------------------------------
# numerical Gram matrices (verification of the normalisation record)


def numerical_gram(space: Eigenspace, n_radial: int = 48, n_angular: int = 96) -> np.ndarray:
    """L2 Gram matrix of the basis by tensor quadrature over the domain."""
    if isinstance(space.domain, geo.Square):
        nodes, w = quad.interval_rule(0.0, PI, 8)
        X, Y = np.meshgrid(nodes, nodes, indexing="ij")
        W = np.outer(w, w).ravel()
        u = space.values(np.stack([X.ravel(), Y.ravel()], axis=1))
        return (u * W) @ u.T
    if isinstance(space.domain, geo.UnitBall3D):
        r, wr = quad.interval_rule(0.0, 1.0, n_radial // 8 or 1)
        pts, ws = quad.SphereGrid(16, 32).nodes()
        X = (r[:, None, None] * pts[None, :, :]).reshape(-1, 3)
        W = (wr[:, None] * r[:, None] ** 2 * ws[None, :]).ravel()
        u = space.values(X)
        return (u * W) @ u.T
    r, wr = quad.interval_rule(0.0, 1.0, n_radial // 8 or 1)
    th = quad.periodic_nodes(n_angular)
    base = np.stack(
        [np.outer(r, np.cos(th)).ravel(), np.outer(r, np.sin(th)).ravel()], axis=1
    )
    W = np.repeat(wr * r, th.size) * (2 * PI / th.size)
    if isinstance(space.domain, geo.DisjointPair):
        off = np.asarray(space.domain.offset)
        X = np.concatenate([base, base + off])
        W = np.concatenate([W, W])
    else:
        X = base
    u = space.values(X)
    return (u * W) @ u.T
