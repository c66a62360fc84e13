import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hadapencil import geometry as geo


def _disk_points(n=50, seed=0):
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0, 1, n))
    th = rng.uniform(0, 2 * math.pi, n)
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)


def _square_points(n=50, seed=0):
    return np.random.default_rng(seed).uniform(0, math.pi, (n, 2))


def test_domains():
    assert geo.make_domain("disk").dim == 2
    sq = geo.make_domain("square")
    assert np.allclose(sq.center, [math.pi / 2, math.pi / 2])
    assert geo.make_domain("ball3d").dim == 3
    pair = geo.make_domain("pair", offset=(3.0, 0.0), margin=0.1)
    assert pair.separation() > 0
    with pytest.raises(geo.GeometryError):
        geo.make_domain("annulus")


def test_boundary_normals():
    p, n = geo.boundary_normal(geo.make_domain("disk"), math.pi / 2)
    assert np.allclose(p, [0, 1]) and np.allclose(n, [0, 1])
    sq = geo.make_domain("square")
    p, n = geo.boundary_normal(sq, 0.5)
    assert np.allclose(p, [0.5, 0]) and np.allclose(n, [0, -1])
    p, n = geo.boundary_normal(sq, math.pi + 0.5)
    assert np.allclose(p, [math.pi, 0.5]) and np.allclose(n, [1, 0])
    with pytest.raises(geo.CornerError):
        geo.boundary_normal(sq, math.pi)
    p, n = geo.boundary_normal(geo.make_domain("ball3d"), (0.0, 0.0))
    assert np.allclose(p, [0, 0, 1])
    pair = geo.make_domain("pair", offset=(3.0, 0.0), margin=0.1)
    p, n = geo.boundary_normal(pair, (1, 0.0))
    assert np.allclose(p, [4, 0]) and np.allclose(n, [1, 0])


FAMILIES = {
    "translation": (lambda: geo.translation([0.6, 0.8]), _disk_points),
    "dilation": (lambda: geo.dilation([0.0, 0.0], 1.0, 2), _disk_points),
    "holomorphic": (lambda: geo.holomorphic_poly({"3": 1.0, "2": 0.2}), _disk_points),
    "edge_bump": (lambda: geo.edge_bump({"bottom": {"cos": [0.1, 0.3]}, "left": {"sin": [0, 0.2, 0.1]}}),
                  _square_points),
}


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_velocity_is_derivative_of_map(name):
    make, pts = FAMILIES[name]
    fam = make()
    x = pts()
    h = 1e-5
    fd = (fam.map(h, x) - fam.map(-h, x)) / (2 * h)
    assert np.max(np.abs(fd - fam.velocity(x))) < 1e-8


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_identity_at_zero_and_positive_jacobian(name):
    make, pts = FAMILIES[name]
    fam = make()
    x = pts()
    assert np.array_equal(fam.map(0.0, x), x)
    for t in (-fam.t_max, 0.5 * fam.t_max, fam.t_max):
        assert np.all(fam.jacobian_det(t, x) > 0)
    with pytest.raises(geo.GeometryError):
        fam.check_t(1.01 * fam.t_max + 1.0)


def test_dilation_and_translation_maps():
    x = _disk_points()
    assert np.allclose(geo.dilation([0, 0], 2.0, 2).map(0.1, x), 1.2 * x)
    assert np.allclose(geo.translation([1.0, 0.0]).map(0.1, x), x + [0.1, 0.0])


def test_holomorphic_map_matches_complex_arithmetic():
    x = _disk_points()
    z = x[:, 0] + 1j * x[:, 1]
    w = geo.holomorphic_poly({"3": 1.0}).map(0.05, x)
    ref = z + 0.05 * z**3
    assert np.allclose(w[:, 0] + 1j * w[:, 1], ref)


def test_pair_dilations_act_per_component():
    pair = geo.make_domain("pair", offset=(3.0, 0.0), margin=0.1)
    fam = geo.pair_dilations(pair, (1.0, 2.5))
    x = np.array([[0.5, 0.0], [3.5, 0.0]])
    out = fam.map(0.1, x)
    assert np.allclose(out[0], [0.55, 0.0])
    assert np.allclose(out[1], [3.0 + 0.5 * 1.25, 0.0])


def test_normal_speed_of_disk_translation():
    d = geo.make_domain("disk")
    s = geo.normal_speed(d, geo.translation([0.6, 0.8]), 64)
    th = s.params
    assert np.allclose(s.values, 0.6 * np.cos(th) + 0.8 * np.sin(th))
    assert s.weights.sum() == pytest.approx(2 * math.pi)


def test_normal_speed_square_edges():
    fam = geo.edge_bump({"bottom": {"cos": [0.0, 1.0]}})
    s = geo.normal_speed(geo.make_domain("square"), fam, panels=8)
    assert s.weights.sum() == pytest.approx(4 * math.pi)
    bottom = s.params < math.pi
    assert np.allclose(s.values[bottom], np.cos(s.params[bottom]))
    assert np.allclose(s.values[~bottom], 0.0)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-1, 1), b=st.floats(-1, 1), t=st.floats(-0.05, 0.05))
def test_translation_preserves_distances(a, b, t):
    x = _disk_points(10)
    y = geo.translation([a, b]).map(t, x)
    dx = np.linalg.norm(x[:, None] - x[None], axis=-1)
    dy = np.linalg.norm(y[:, None] - y[None], axis=-1)
    assert np.allclose(dx, dy, atol=1e-12)


def _ball_points(n=100, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 3))
    return x / np.linalg.norm(x, axis=1)[:, None] * rng.uniform(0, 1, (n, 1)) ** (1 / 3)


PAIR = geo.make_domain("pair", offset=(3.0, 0.0), margin=0.1)


def _pair_points(n=100, seed=0):
    x = _disk_points(n, seed)
    x[n // 2 :] += [3.0, 0.0]
    return x


ALL_FAMILIES = {
    **FAMILIES,
    "quadratic_field": (lambda: geo.quadratic_field([[0, 0.5, 0], [0.5, 0.2, 0], [0, 0, -0.1]]), _ball_points),
    "ball_dilation": (lambda: geo.dilation([0, 0, 0], 1.0, 3), _ball_points),
    "pair_dilations": (lambda: geo.pair_dilations(PAIR, (1.0, 2.5)), _pair_points),
    "pair_translation": (lambda: geo.pair_translation(PAIR, (0.6, 0.8)), _pair_points),
}


@pytest.mark.parametrize("name", sorted(ALL_FAMILIES))
def test_central_difference_matches_velocity_at_100_points(name):
    make, pts = ALL_FAMILIES[name]
    fam = make()
    x = pts(100)
    h = 1e-5
    fd = (fam.map(h, x) - fam.map(-h, x)) / (2 * h)
    assert np.max(np.abs(fd - fam.velocity(x))) <= 1e-8


@pytest.mark.parametrize("name", ["dilation", "edge_bump", "holomorphic", "translation"])
def test_jacobian_positive_at_mesh_nodes(name):
    from hadapencil import fem

    make, _ = FAMILIES[name]
    fam = make()
    domain = geo.make_domain("square" if name == "edge_bump" else "disk")
    nodes = fem.mesh_domain(domain, 4).nodes
    for t in np.linspace(-fam.t_max, fam.t_max, 9):
        assert np.all(fam.jacobian_det(t, nodes) > 0)


@pytest.mark.parametrize("kind", ["disk", "square", "ball3d", "pair"])
def test_identity_family_has_zero_normal_speed(kind):
    domain = geo.make_domain(kind)
    s = geo.normal_speed(domain, geo.identity_family(domain.dim), 64, 8, (8, 16))
    assert np.all(s.values == 0)


def test_normals_point_outward():
    eps = 1e-6
    cases = [(geo.make_domain("disk"), np.linspace(0.05, 6.2, 25)),
             (geo.make_domain("square"), np.linspace(0.05, 4 * math.pi - 0.05, 40)),
             (geo.make_domain("ball3d"), [(a, b) for a in (0.3, 1.2, 2.9) for b in (0.0, 2.0, 4.0)])]
    for domain, params in cases:
        for s in params:
            p, n = geo.boundary_normal(domain, s)
            assert np.linalg.norm(n) == pytest.approx(1.0)
            assert domain.contains(p - eps * n)
            assert not domain.contains(p + eps * n)
