import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hadapencil import pencil
from oracles import det_lu, pencil_roots_bisection, random_pencil


def test_diagonal_pencil():
    r = pencil.generalized_roots(np.diag([3.0, -1.0]), np.eye(2))
    assert np.allclose(r.roots, [-1.0, 3.0])
    assert r.simple.all()


def test_repeated_root_flagged():
    r = pencil.generalized_roots(np.diag([2.0, 2.0, 5.0]), np.eye(3))
    assert list(r.simple) == [False, False, True]
    assert r.tolerance == pytest.approx(max(1e-8, 5e-6))


def test_gap_tolerance_override():
    r = pencil.generalized_roots(np.diag([1.0, 1.0 + 1e-7]), np.eye(2))
    assert not r.simple.any()
    r = pencil.generalized_roots(np.diag([1.0, 1.0 + 1e-7]), np.eye(2), gap_tol=1e-9)
    assert r.simple.all()


def test_b_orthonormal_vectors():
    a, b, _ = random_pencil(np.random.default_rng(5), 4)
    r = pencil.generalized_roots(a, b)
    v = r.vectors
    assert np.allclose(v.T @ b @ v, np.eye(4), atol=1e-10)
    assert np.allclose(a @ v, b @ v @ np.diag(r.roots), atol=1e-9)


def test_rejects_indefinite_b():
    with pytest.raises(pencil.NotDefiniteError):
        pencil.generalized_roots(np.eye(2), np.diag([1.0, -1.0]))
    with pytest.raises(pencil.NotDefiniteError):
        pencil.generalized_roots(np.eye(2), np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(pencil.PencilError):
        pencil.generalized_roots(np.eye(2), np.eye(3))


def test_cholesky_and_jacobi():
    rng = np.random.default_rng(0)
    g = rng.standard_normal((5, 5))
    b = g @ g.T + np.eye(5)
    low = pencil.cholesky(b)
    assert np.allclose(low @ low.T, b)
    assert np.allclose(low, np.tril(low))
    w, v = pencil.jacobi_eigh(b)
    assert np.allclose(w, np.linalg.eigvalsh(b), atol=1e-12)
    assert np.allclose(v.T @ v, np.eye(5), atol=1e-12)


def test_determinant_helpers():
    rng = np.random.default_rng(1)
    m = rng.standard_normal((5, 5))
    assert pencil.lu_det(m) == pytest.approx(np.linalg.det(m), rel=1e-12)
    a, b, lam = random_pencil(rng, 3)
    for s in lam:
        assert abs(pencil.char_poly_eval(a, b, s)) < 1e-9 * np.linalg.norm(a) ** 3


@pytest.mark.parametrize("seed", range(10))
def test_against_bisection_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 7))
    a, b, _ = random_pencil(rng, n)
    ref = pencil_roots_bisection(a, b)
    got = pencil.generalized_roots(a, b).roots
    assert ref.size == n
    assert np.max(np.abs(got - ref)) <= 1e-9


_pencils = st.integers(0, 10**6).map(lambda s: random_pencil(np.random.default_rng(s), 1 + s % 5))


@settings(max_examples=40, deadline=None)
@given(_pencils, st.floats(-3, 3))
def test_shift_covariance(p, c):
    a, b, _ = p
    r0 = pencil.generalized_roots(a, b).roots
    r1 = pencil.generalized_roots(a + c * b, b).roots
    assert np.allclose(r1, r0 + c, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(_pencils, st.integers(0, 10**6))
def test_congruence_invariance(p, seed):
    a, b, _ = p
    n = a.shape[0]
    q = np.random.default_rng(seed).standard_normal((n, n)) + 3 * np.eye(n)
    r0 = pencil.generalized_roots(a, b).roots
    r1 = pencil.generalized_roots(q.T @ a @ q, q.T @ b @ q).roots
    assert np.allclose(r1, r0, atol=1e-8 * max(1.0, np.abs(r0).max()))


@settings(max_examples=40, deadline=None)
@given(_pencils, st.floats(0.1, 10))
def test_scaling_equivariance(p, alpha):
    a, b, _ = p
    r0 = pencil.generalized_roots(a, b).roots
    assert np.allclose(pencil.generalized_roots(alpha * a, b).roots, alpha * r0, atol=1e-9 * alpha)
    assert np.allclose(pencil.generalized_roots(a, alpha * b).roots, r0 / alpha, atol=1e-9 / alpha)


def test_oracle_self_check():
    # the oracle determinant agrees with numpy on a known matrix
    m = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert det_lu(m) == pytest.approx(5.0)
