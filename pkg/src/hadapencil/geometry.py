"""Reference domains, deformation families phi_t, and normal speeds.

Points are float arrays of shape ``(n, dim)``.  Families on a
:class:`DisjointPair` additionally receive a per-point component index
(0 for the base copy, 1 for the translated copy); when it is omitted the
index is inferred from the nearest component centre.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import quadrature as quad

PI = math.pi


class GeometryError(ValueError):
    pass


class CornerError(GeometryError):
    """Boundary parameter sits on a square corner where the normal is undefined."""


# ----------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class UnitDisk:
    kind: str = field(default="disk", init=False)
    dim: int = field(default=2, init=False)
    center: tuple = field(default=(0.0, 0.0), init=False)

    def contains(self, x, tol=1e-12):
        x = np.atleast_2d(x)
        return np.hypot(x[:, 0], x[:, 1]) <= 1.0 + tol


@dataclass(frozen=True)
class Square:
    """The square [0, pi]^2."""

    kind: str = field(default="square", init=False)
    dim: int = field(default=2, init=False)
    side: float = field(default=PI, init=False)
    center: tuple = field(default=(PI / 2, PI / 2), init=False)

    def contains(self, x, tol=1e-12):
        x = np.atleast_2d(x)
        return np.all((x >= -tol) & (x <= PI + tol), axis=1)


@dataclass(frozen=True)
class UnitBall3D:
    kind: str = field(default="ball3d", init=False)
    dim: int = field(default=3, init=False)
    center: tuple = field(default=(0.0, 0.0, 0.0), init=False)

    def contains(self, x, tol=1e-12):
        return np.linalg.norm(np.atleast_2d(x), axis=1) <= 1.0 + tol


@dataclass(frozen=True)
class DisjointPair:
    """Two congruent copies of ``base``: U0 = base and V0 = base + offset."""

    base: object = field(default_factory=UnitDisk)
    offset: tuple = (3.0, 0.0)
    margin: float = 0.1
    kind: str = field(default="pair", init=False)
    dim: int = field(default=2, init=False)

    def __post_init__(self):
        if getattr(self.base, "dim", None) != 2 or isinstance(self.base, DisjointPair):
            raise GeometryError("pair base must be a 2D disk or square")
        off = tuple(float(v) for v in self.offset)
        if len(off) != 2:
            raise GeometryError("pair offset must be a 2-vector")
        object.__setattr__(self, "offset", off)
        if self.separation() <= self.margin:
            raise GeometryError(
                f"components are {self.separation():.3g} apart, margin is {self.margin}"
            )

    def separation(self) -> float:
        ox, oy = self.offset
        if isinstance(self.base, UnitDisk):
            return math.hypot(ox, oy) - 2.0
        gap_x = abs(ox) - PI
        gap_y = abs(oy) - PI
        if gap_x > 0 and gap_y > 0:
            return math.hypot(gap_x, gap_y)
        return max(gap_x, gap_y)

    def centers(self) -> np.ndarray:
        c0 = np.asarray(self.base.center, dtype=float)
        return np.stack([c0, c0 + np.asarray(self.offset)])

    def component_of(self, x) -> np.ndarray:
        x = np.atleast_2d(x)
        c = self.centers()
        d0 = np.linalg.norm(x - c[0], axis=1)
        d1 = np.linalg.norm(x - c[1], axis=1)
        return (d1 < d0).astype(int)

    def contains(self, x, tol=1e-12):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        comp = self.component_of(x)
        local = x - np.asarray(self.offset) * comp[:, None]
        return self.base.contains(local, tol)


def make_domain(kind: str, **kw):
    if kind == "disk":
        return UnitDisk()
    if kind == "square":
        return Square()
    if kind == "ball3d":
        return UnitBall3D()
    if kind == "pair":
        base = make_domain(kw.pop("base", "disk"))
        return DisjointPair(base=base, **kw)
    raise GeometryError(f"unknown domain kind {kind!r}")


# ----------------------------------------------------------------------------
# boundary parameterisations

_SQUARE_NORMALS = np.array([[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])


def _square_boundary(s):
    """Counter-clockwise perimeter parameter s in [0, 4 pi) from the origin."""
    s = np.asarray(s, dtype=float) % (4 * PI)
    edge = np.floor(s / PI).astype(int)
    r = s - edge * PI
    if np.any(np.isclose(r, 0.0, atol=1e-14)) or np.any(np.isclose(r, PI, atol=1e-14)):
        raise CornerError("square normal is undefined at a corner")
    x = np.select(
        [edge == 0, edge == 1, edge == 2, edge == 3],
        [r, np.full_like(r, PI), PI - r, np.zeros_like(r)],
    )
    y = np.select(
        [edge == 0, edge == 1, edge == 2, edge == 3],
        [np.zeros_like(r), r, np.full_like(r, PI), PI - r],
    )
    return np.stack([x, y], axis=-1), _SQUARE_NORMALS[edge]


def boundary_normal(domain, param):
    """Boundary point and outward unit normal at ``param``.

    Parameters per domain: disk -> angle theta; square -> perimeter arclength
    s in [0, 4 pi) counter-clockwise from the origin; ball -> (polar, azimuth);
    pair -> (component, base parameter).
    """
    if isinstance(domain, UnitDisk):
        th = float(param)
        p = np.array([math.cos(th), math.sin(th)])
        return p, p.copy()
    if isinstance(domain, Square):
        p, n = _square_boundary(float(param))
        return p, n
    if isinstance(domain, UnitBall3D):
        polar, az = (float(v) for v in param)
        p = np.array(
            [math.sin(polar) * math.cos(az), math.sin(polar) * math.sin(az), math.cos(polar)]
        )
        return p, p.copy()
    if isinstance(domain, DisjointPair):
        comp, sub = param
        p, n = boundary_normal(domain.base, sub)
        return p + int(comp) * np.asarray(domain.offset), n
    raise GeometryError(f"unsupported domain {domain!r}")


# ----------------------------------------------------------------------------
# perturbation families


MapFn = Callable[[float, np.ndarray, np.ndarray], np.ndarray]
VelFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PerturbFamily:
    """One-parameter deformation phi_t with phi_0 = identity.

    ``map_fn(t, x, comp)`` and ``velocity_fn(x, comp)`` receive points of
    shape (n, dim) and an int array of component indices (all zero except on
    a disjoint pair).
    """

    name: str
    dim: int
    map_fn: MapFn
    velocity_fn: VelFn
    t_max: float
    params: dict = field(default_factory=dict)
    pair: DisjointPair | None = None

    def _components(self, x, component):
        if component is not None:
            return np.broadcast_to(np.asarray(component, dtype=int), (x.shape[0],))
        if self.pair is not None:
            return self.pair.component_of(x)
        return np.zeros(x.shape[0], dtype=int)

    def check_t(self, t: float) -> None:
        if not abs(t) <= self.t_max:
            raise GeometryError(f"t = {t} outside admissible range |t| <= {self.t_max:.4g} for {self.name}")

    def map(self, t: float, points, component=None) -> np.ndarray:
        self.check_t(t)
        x = np.asarray(points, dtype=float)
        if t == 0:
            return x.copy()
        x2 = np.atleast_2d(x)
        out = self.map_fn(t, x2, self._components(x2, component))
        return out.reshape(x.shape)

    def velocity(self, points, component=None) -> np.ndarray:
        x = np.asarray(points, dtype=float)
        x2 = np.atleast_2d(x)
        return self.velocity_fn(x2, self._components(x2, component)).reshape(x.shape)

    def jacobian_det(self, t: float, points, component=None, h: float = 1e-6) -> np.ndarray:
        """Determinant of D phi_t by central differences."""
        x = np.atleast_2d(np.asarray(points, dtype=float))
        comp = self._components(x, component)
        cols = []
        for d in range(self.dim):
            e = np.zeros(self.dim)
            e[d] = h
            cols.append((self.map_fn(t, x + e, comp) - self.map_fn(t, x - e, comp)) / (2 * h))
        jac = np.stack(cols, axis=-1)
        return np.linalg.det(jac)


def map_points(family: PerturbFamily, t: float, points, component=None) -> np.ndarray:
    return family.map(t, points, component)


def _linear_family(name, dim, vel, t_max, params, pair=None):
    # phi_t(x) = x + t * V(x)
    return PerturbFamily(
        name=name,
        dim=dim,
        map_fn=lambda t, x, c: x + t * vel(x, c),
        velocity_fn=vel,
        t_max=t_max,
        params=params,
        pair=pair,
    )


def identity_family(dim: int = 2) -> PerturbFamily:
    return _linear_family("identity", dim, lambda x, c: np.zeros_like(x), 1.0, {})


def translation(direction) -> PerturbFamily:
    d = np.asarray(direction, dtype=float)
    return _linear_family(
        "translation", d.size, lambda x, c: np.broadcast_to(d, x.shape).copy(), 1.0,
        {"direction": d.tolist()},
    )


def dilation(center=None, rate: float = 1.0, dim: int = 2) -> PerturbFamily:
    """phi_t(x) = c + (1 + rate t)(x - c)."""
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    if rate == 0:
        raise GeometryError("dilation rate must be nonzero")
    return _linear_family(
        "dilation", c.size, lambda x, comp: rate * (x - c), 0.5 / abs(rate),
        {"center": c.tolist(), "rate": float(rate)},
    )


def holomorphic_poly(coeffs: dict) -> PerturbFamily:
    """Disk family phi_t(z) = z + t sum_k a_k z^k with real a_k."""
    terms = {int(k): float(a) for k, a in coeffs.items() if float(a) != 0.0}
    if not terms or min(terms) < 0:
        raise GeometryError("holomorphic_poly needs nonnegative powers with a nonzero coefficient")
    # Re phi_t' > 0 on the disk when |t| sum k |a_k| < 1, hence univalent
    lip = sum(k * abs(a) for k, a in terms.items())
    t_max = 0.5 / lip if lip > 0 else 1.0

    def vel(x, comp):
        z = x[:, 0] + 1j * x[:, 1]
        w = sum(a * z**k for k, a in terms.items())
        return np.stack([w.real, w.imag], axis=1)

    return _linear_family("holomorphic_poly", 2, vel, t_max, {"coeffs": {str(k): a for k, a in sorted(terms.items())}})


def _trig_profile(table) -> Callable[[np.ndarray], np.ndarray]:
    cos_c = np.asarray(table.get("cos", []), dtype=float)
    sin_c = np.asarray(table.get("sin", []), dtype=float)

    def g(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for n, c in enumerate(cos_c):
            out = out + c * np.cos(n * s)
        for n, c in enumerate(sin_c):
            out = out + c * np.sin(n * s)
        return out

    return g


def _trig_profile_prime(table):
    cos_c = np.asarray(table.get("cos", []), dtype=float)
    sin_c = np.asarray(table.get("sin", []), dtype=float)
    return float(sum(n * abs(c) for n, c in enumerate(cos_c)) + sum(n * abs(c) for n, c in enumerate(sin_c)))


SQUARE_EDGES = ("bottom", "right", "top", "left")


def edge_bump(edges: dict) -> PerturbFamily:
    """Square family moving each edge along its outward normal.

    ``edges`` maps edge names to trigonometric coefficient tables
    ``{"cos": [c0, c1, ...], "sin": [s0, s1, ...]}`` giving the outward normal
    speed g(s) = sum c_n cos(n s) + s_n sin(n s), with s the coordinate along
    the edge (x1 for bottom/top, x2 for left/right).  The speeds are blended
    linearly across the square, so phi_t(x) = x + t V(x).
    """
    unknown = set(edges) - set(SQUARE_EDGES)
    if unknown:
        raise GeometryError(f"unknown square edges {sorted(unknown)}")
    g = {e: _trig_profile(edges.get(e, {})) for e in SQUARE_EDGES}
    lip = sum(_trig_profile_prime(edges.get(e, {})) for e in SQUARE_EDGES)
    amp = max(
        float(np.max(np.abs(g[e](np.linspace(0, PI, 257))))) for e in SQUARE_EDGES
    )

    def vel(x, comp):
        x1, x2 = x[:, 0], x[:, 1]
        v1 = -g["left"](x2) * (1 - x1 / PI) + g["right"](x2) * (x1 / PI)
        v2 = -g["bottom"](x1) * (1 - x2 / PI) + g["top"](x1) * (x2 / PI)
        return np.stack([v1, v2], axis=1)

    # |DV| <= lip + 2 amp / pi, so I + t DV stays nonsingular for t below:
    bound = lip + 2.0 * amp / PI
    t_max = 0.25 / bound if bound > 0 else 1.0
    params = {"edges": {e: {k: list(map(float, v)) for k, v in edges[e].items()} for e in sorted(edges)}}
    return _linear_family("edge_bump", 2, vel, t_max, params)


def quadratic_field(matrix) -> PerturbFamily:
    """Ball family phi_t(x) = x + t Q x with symmetric Q, so delta = theta^T Q theta."""
    q = np.asarray(matrix, dtype=float)
    if q.shape != (3, 3):
        raise GeometryError("quadratic_field needs a 3x3 matrix")
    q = 0.5 * (q + q.T)
    norm = float(np.linalg.norm(q, 2))
    return _linear_family(
        "quadratic_field", 3, lambda x, c: x @ q.T, 0.5 / norm if norm > 0 else 1.0,
        {"matrix": q.tolist()},
    )


def pair_families(pair: DisjointPair, first: PerturbFamily, second: PerturbFamily, name="pair") -> PerturbFamily:
    """Independent families on each component, given in base-domain coordinates."""
    off = np.asarray(pair.offset)

    def vel(x, comp):
        out = np.empty_like(x)
        m0 = comp == 0
        out[m0] = first.velocity_fn(x[m0], comp[m0])
        out[~m0] = second.velocity_fn(x[~m0] - off, comp[~m0])
        return out

    def fmap(t, x, comp):
        out = np.empty_like(x)
        m0 = comp == 0
        out[m0] = first.map_fn(t, x[m0], comp[m0])
        out[~m0] = second.map_fn(t, x[~m0] - off, comp[~m0]) + off
        return out

    # keep both deformed components inside their margin-inflated hulls
    t_max = min(first.t_max, second.t_max)
    return PerturbFamily(
        name=name, dim=2, map_fn=fmap, velocity_fn=vel, t_max=t_max,
        params={"first": {"name": first.name, **first.params},
                "second": {"name": second.name, **second.params}},
        pair=pair,
    )


def pair_dilations(pair: DisjointPair, rates=(1.0, 2.0)) -> PerturbFamily:
    c = pair.base.center
    fam = pair_families(pair, dilation(c, rates[0]), dilation(c, rates[1]), name="dilations")
    # the larger component must not reach the other one
    r = 1.0 if isinstance(pair.base, UnitDisk) else PI / math.sqrt(2)
    t_sep = (pair.separation() - pair.margin) / (r * (abs(rates[0]) + abs(rates[1])))
    return PerturbFamily(fam.name, 2, fam.map_fn, fam.velocity_fn, min(fam.t_max, t_sep),
                         {"rates": [float(rates[0]), float(rates[1])]}, pair)


def pair_translation(pair: DisjointPair, direction=(1.0, 0.0)) -> PerturbFamily:
    fam = translation(direction)
    return PerturbFamily("translation", 2, fam.map_fn, fam.velocity_fn, fam.t_max, fam.params, pair)


# ----------------------------------------------------------------------------
# normal speed


@dataclass(frozen=True)
class NormalSpeed:
    """delta = phi_bar . nu sampled on a boundary quadrature rule.

    ``params`` are boundary parameters in the :func:`boundary_normal`
    convention (for the pair: an (n, 2) array of [component, theta]).
    ``samples`` holds the disk's periodic samples, ``components`` those of each
    pair component, and ``eta``/``mu`` the square's edge functions.
    """

    domain: object
    family: str
    params: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    samples: quad.PeriodicSamples | None = None
    components: tuple = ()
    eta: Callable | None = None
    mu: Callable | None = None


def _square_edge_functions(family: PerturbFamily):
    def eta(s):
        s = np.asarray(s, dtype=float)
        low = s < PI
        xb = np.stack([np.where(low, s, 0.0), np.zeros_like(s)], axis=1)
        xt = np.stack([np.where(low, 0.0, s - PI), np.full_like(s, PI)], axis=1)
        return np.where(low, -family.velocity(xb)[:, 1], family.velocity(xt)[:, 1])

    def mu(s):
        s = np.asarray(s, dtype=float)
        low = s < PI
        xl = np.stack([np.zeros_like(s), np.where(low, s, 0.0)], axis=1)
        xr = np.stack([np.full_like(s, PI), np.where(low, 0.0, s - PI)], axis=1)
        return np.where(low, -family.velocity(xl)[:, 0], family.velocity(xr)[:, 0])

    return eta, mu


def normal_speed(
    domain,
    family: PerturbFamily,
    periodic_nodes: int = quad.DEFAULT_PERIODIC_NODES,
    panels: int = quad.DEFAULT_PANELS,
    sphere: tuple = quad.DEFAULT_SPHERE,
) -> NormalSpeed:
    """Sample delta = <phi_bar, nu> on the boundary quadrature rule of ``domain``."""
    if family.dim != domain.dim:
        raise GeometryError(f"{family.name} is {family.dim}D but the domain is {domain.dim}D")

    def checked(v):
        if not np.all(np.isfinite(v)):
            raise GeometryError(f"{family.name} is not evaluable at every boundary node")
        return v

    if isinstance(domain, UnitDisk):
        th = quad.periodic_nodes(periodic_nodes)
        pts = np.stack([np.cos(th), np.sin(th)], axis=1)
        vals = checked(np.sum(family.velocity(pts) * pts, axis=1))
        w = np.full(th.size, 2 * PI / th.size)
        return NormalSpeed(domain, family.name, th, w, vals, samples=quad.PeriodicSamples(vals))

    if isinstance(domain, Square):
        # edge-wise Gauss rules never touch the corners
        nodes, wts = quad.interval_rule(0.0, PI, panels)
        s = np.concatenate([nodes + e * PI for e in range(4)])
        w = np.tile(wts, 4)
        pts, nrm = _square_boundary(s)
        vals = checked(np.sum(family.velocity(pts) * nrm, axis=1))
        eta, mu = _square_edge_functions(family)
        return NormalSpeed(domain, family.name, s, w, vals, eta=eta, mu=mu)

    if isinstance(domain, UnitBall3D):
        pts, w = quad.SphereGrid(*sphere).nodes()
        vals = checked(np.sum(family.velocity(pts) * pts, axis=1))
        return NormalSpeed(domain, family.name, pts, w, vals)

    if isinstance(domain, DisjointPair):
        if not isinstance(domain.base, UnitDisk):
            raise GeometryError("normal speed on a pair is implemented for disk components")
        th = quad.periodic_nodes(periodic_nodes)
        base = np.stack([np.cos(th), np.sin(th)], axis=1)
        comps, params, vals = [], [], []
        for c in (0, 1):
            pts = base + c * np.asarray(domain.offset)
            v = checked(np.sum(family.velocity(pts, component=c) * base, axis=1))
            comps.append(quad.PeriodicSamples(v))
            params.append(np.stack([np.full_like(th, c), th], axis=1))
            vals.append(v)
        w = np.full(2 * th.size, 2 * PI / th.size)
        return NormalSpeed(domain, family.name, np.concatenate(params), w,
                           np.concatenate(vals), components=tuple(comps))

    raise GeometryError(f"unsupported domain {domain!r}")
