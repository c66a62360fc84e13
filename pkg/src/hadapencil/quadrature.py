"""Boundary quadrature: periodic trapezoid, composite Gauss-Legendre, and S^2."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_PERIODIC_NODES = 1024
DEFAULT_PANELS = 64
DEFAULT_SPHERE = (64, 128)

_GAUSS_POINTS = 8


class AliasingError(ValueError):
    pass


def periodic_nodes(n: int) -> np.ndarray:
    if n < 4 or n % 2:
        raise ValueError(f"periodic node count must be even and >= 4, got {n}")
    return 2.0 * np.pi * np.arange(n) / n


@dataclass(frozen=True)
class PeriodicSamples:
    """Values of a 2pi-periodic function at theta_i = 2 pi i / N."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        periodic_nodes(v.size)
        if not np.all(np.isfinite(v)):
            raise ValueError("periodic samples must be finite")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def nodes(self) -> np.ndarray:
        return periodic_nodes(self.n)

    @classmethod
    def from_function(cls, f, n: int = DEFAULT_PERIODIC_NODES) -> "PeriodicSamples":
        return cls(np.broadcast_to(f(periodic_nodes(n)), (n,)).copy())


def integrate_periodic(f, n: int = DEFAULT_PERIODIC_NODES) -> float:
    """Trapezoidal rule (2pi/N) sum f(theta_i) over one period."""
    theta = periodic_nodes(n)
    vals = np.broadcast_to(np.asarray(f(theta), dtype=float), theta.shape)
    return float(2.0 * np.pi / n * np.sum(vals))


def fourier_coeffs(samples: PeriodicSamples, m: int) -> tuple[float, float]:
    """Return (int delta cos(m t) dt, int delta sin(m t) dt) over [0, 2pi]."""
    if m < 0 or m >= samples.n // 2:
        raise AliasingError(f"harmonic {m} not resolved by {samples.n} nodes")
    theta = samples.nodes
    w = 2.0 * np.pi / samples.n
    c = w * float(np.sum(samples.values * np.cos(m * theta)))
    s = w * float(np.sum(samples.values * np.sin(m * theta)))
    return c, s


def fourier_power(samples: PeriodicSamples, m: int) -> float:
    """|delta_hat(m)|^2, the sum of squares of the cosine and sine parts."""
    c, s = fourier_coeffs(samples, m)
    return c * c + s * s


@lru_cache(maxsize=8)
def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def interval_rule(a: float, b: float, n_panels: int = DEFAULT_PANELS):
    """Nodes and weights of the composite 8-point Gauss-Legendre rule on [a, b]."""
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    if n_panels < 1:
        raise ValueError("n_panels must be >= 1")
    x, w = _gauss_legendre(_GAUSS_POINTS)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate_interval(f, a: float, b: float, n_panels: int = DEFAULT_PANELS) -> float:
    nodes, weights = interval_rule(a, b, n_panels)
    vals = np.broadcast_to(np.asarray(f(nodes), dtype=float), nodes.shape)
    return float(np.dot(weights, vals))


@dataclass(frozen=True)
class SphereGrid:
    """Product rule on S^2: Gauss-Legendre in cos(polar) x trapezoid in azimuth.

    Integrates spherical polynomials exactly up to degree
    ``min(2 * n_polar - 1, n_azimuth - 1)``.
    """

    n_polar: int = DEFAULT_SPHERE[0]
    n_azimuth: int = DEFAULT_SPHERE[1]

    @property
    def exact_degree(self) -> int:
        return min(2 * self.n_polar - 1, self.n_azimuth - 1)

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        z, wz = np.polynomial.legendre.leggauss(self.n_polar)
        phi = 2.0 * np.pi * np.arange(self.n_azimuth) / self.n_azimuth
        r = np.sqrt(1.0 - z * z)
        pts = np.stack(
            [
                np.outer(r, np.cos(phi)).ravel(),
                np.outer(r, np.sin(phi)).ravel(),
                np.repeat(z, self.n_azimuth),
            ],
            axis=1,
        )
        weights = np.repeat(wz, self.n_azimuth) * (2.0 * np.pi / self.n_azimuth)
        return pts, weights


def integrate_sphere(f, resolution: tuple[int, int] = DEFAULT_SPHERE) -> float:
    """Integral over the unit sphere of ``f(points)``, points of shape (n, 3)."""
    pts, w = SphereGrid(*resolution).nodes()
    vals = np.broadcast_to(np.asarray(f(pts), dtype=float), w.shape)
    return float(np.dot(w, vals))

