import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hadapencil import dift
from hadapencil import pencil

T = np.linspace(-0.1, 0.1, 21)
MATRIX_EXAMPLES = ["matrix_family_2x2", "matrix_family_2x2_offdiag", "matrix_family_2x2_upper",
                   "matrix_family_3x3", "matrix_family_3x3_upper"]


def _dense_error(chart, branch):
    lam = chart.lam(branch.x)
    err = 0.0
    for t, v in zip(branch.t, lam):
        w = np.linalg.eigvalsh(chart.A0 + t * chart.A1 + t * t * chart.A2)
        err = max(err, float(np.min(np.abs(w - v))))
    return err


@pytest.mark.parametrize("name", MATRIX_EXAMPLES)
def test_conditions_hold(name):
    rep = dift.check_conditions(dift.example(name).problem)
    assert rep.passed, rep.failures()


@pytest.mark.parametrize("name", MATRIX_EXAMPLES)
def test_branch_matches_dense_eigensolver(name):
    chart = dift.example(name)
    branch = dift.solve_branch(chart.problem, T)
    assert _dense_error(chart, branch) <= 1e-9
    assert branch.residuals.max() <= 1e-10
    assert branch.tangency <= 1e-6


@pytest.mark.parametrize("name", MATRIX_EXAMPLES)
def test_branch_slope_is_minus_pencil_root(name):
    chart = dift.example(name)
    branch = dift.solve_branch(chart.problem, T)
    slope = branch.x_prime0[0]
    mp = dift.matrix_pencil(chart.A0, chart.A1, chart.lam0)
    roots = pencil.generalized_roots(mp.A, mp.B).roots
    assert slope == pytest.approx(chart.predicted_slope, abs=1e-9)
    assert np.min(np.abs(-roots - slope)) <= 1e-9


def test_equal_slopes_rejected_by_condition_d():
    rep = dift.check_conditions(dift.example("equal_slopes_2x2").problem)
    assert not rep.passed
    assert not rep.d.passed
    assert rep.base_residual.passed
    with pytest.raises(dift.ConditionError):
        dift.solve_branch(dift.example("equal_slopes_2x2").problem, T)


def test_scalar_linear_example():
    prob = dift.example("dift.scalar_linear")
    rep = dift.check_conditions(prob)
    assert rep.passed
    branch = dift.solve_branch(prob, T)
    assert np.allclose(branch.x[:, 0], T, atol=1e-13)
    assert branch.x_prime0[0] == pytest.approx(1.0, abs=1e-10)
    # the tangent to the branch is x'(0) = 1, so v = -1 on X1
    assert np.allclose(prob.w, -1.0)


def test_grid_gets_zero_added():
    branch = dift.solve_branch(dift.example("scalar_linear"), [0.05, 0.1])
    assert 0.0 in branch.t


def test_unknown_example():
    with pytest.raises(KeyError):
        dift.example("no_such_thing")


def test_rescaled_map_continuous_at_zero():
    prob = dift.example("matrix_family_2x2").problem
    rng = np.random.default_rng(0)
    xt = prob.p + 1e-2 * rng.standard_normal(prob.N)
    j0 = prob.J(0.0, xt)
    assert np.allclose(prob.J(1e-7, xt), j0, atol=1e-5)


def test_branch_report_serializes():
    d = dift.solve_branch(dift.example("matrix_family_2x2").problem, [-0.05, 0.0, 0.05]).to_dict()
    assert {"t", "x", "residuals", "tangency"} <= set(d)


def _family(seed):
    rng = np.random.default_rng(seed)
    a0 = np.diag([1.0, 1.0, 3.0])
    g = rng.standard_normal((3, 3))
    a1 = 0.5 * (g + g.T)
    return a0, a1


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 1))
def test_random_families_follow_dense_branches(seed, root):
    a0, a1 = _family(seed)
    mu = pencil.generalized_roots(dift.matrix_pencil(a0, a1, 1.0).A, np.eye(2)).roots
    if abs(mu[1] - mu[0]) < 0.2:
        return  # too close to degenerate for a fixed t-range
    chart = dift.eigen_problem(a0, a1, 1.0, root=root)
    t = np.linspace(-0.02, 0.02, 5)
    branch = dift.solve_branch(chart.problem, t)
    assert _dense_error(chart, branch) <= 1e-9
    # root indexes the ascending slopes, i.e. the descending pencil roots
    assert branch.x_prime0[0] == pytest.approx(-mu[::-1][root], abs=1e-6)


def test_offdiagonal_branch_is_one_plus_t():
    chart = dift.example("matrix_family_2x2_offdiag")
    branch = dift.solve_branch(chart.problem, T)
    lam = chart.lam(branch.x)
    assert np.max(np.abs(lam - (1 + branch.t))) <= 1e-10 or np.max(np.abs(lam - (1 - branch.t))) <= 1e-10


def test_diagonal_branches_recovered():
    lo = dift.example("matrix_family_2x2")
    hi = dift.example("matrix_family_2x2_upper")
    for chart, rate in ((lo, 1.0), (hi, 2.0)):
        branch = dift.solve_branch(chart.problem, T)
        assert np.max(np.abs(chart.lam(branch.x) - (1 + rate * branch.t))) <= 1e-10


@pytest.mark.parametrize("name", MATRIX_EXAMPLES)
def test_branch_starts_at_base_point_and_converges_quadratically(name):
    branch = dift.solve_branch(dift.example(name).problem, T)
    zero = int(np.flatnonzero(branch.t == 0.0)[0])
    assert np.array_equal(branch.x[zero], dift.example(name).problem.p)
    assert not branch.diagnostics
    assert branch.iterations.max() <= 10
