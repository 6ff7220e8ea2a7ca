"""Problem construction, compilation and slack semantics."""

import numpy as np
import pytest

from taskqp import (
    EmptyProblemError,
    Expression,
    InfeasibleError,
    Problem,
)


def grid_search(objective, bounds, samples=2001, refinements=4):
    """Coarse-to-fine grid minimizer, independent of the QP machinery."""
    lo, hi = bounds
    best = None
    for _ in range(refinements):
        xs = np.linspace(lo, hi, samples)
        values = np.array([objective(x) for x in xs])
        idx = int(np.argmin(values))
        best = xs[idx]
        width = (hi - lo) / (samples - 1)
        lo, hi = best - 2 * width, best + 2 * width
    return best


def test_add_variable_offsets_are_contiguous():
    p = Problem()
    v1 = p.add_variable(10)
    assert (v1.offset, v1.size) == (0, 10)
    v2 = p.add_variable(2)
    assert (v2.offset, v2.size) == (10, 2)
    assert p.dimension == 12


def test_add_variable_rejects_zero_size():
    with pytest.raises(ValueError):
        Problem().add_variable(0)


def test_unconstrained_least_squares():
    p = Problem()
    x = p.add_variable(2)
    p.add_objective(x.expr - np.array([1.0, 2.0]))
    result = p.solve()
    np.testing.assert_allclose(result.x, [1.0, 2.0], atol=1e-6)


def test_two_weighted_terms_match_grid_search():
    # min ||x||^2 + 3 ||x - 2||^2; closed form (1*0 + 3*2) / 4 = 1.5.
    p = Problem()
    x = p.add_variable(1)
    p.add_objective(x.expr, 1.0)
    p.add_objective(x.expr - 2.0, 3.0)
    result = p.solve()
    oracle = grid_search(lambda v: v**2 + 3 * (v - 2) ** 2, (-5.0, 5.0))
    assert abs(result.x[0] - 1.5) < 1e-6
    assert abs(result.x[0] - oracle) < 1e-6


def test_objective_weight_must_be_positive():
    p = Problem()
    x = p.add_variable(1)
    with pytest.raises(ValueError):
        p.add_objective(x.expr, 0.0)


def test_hard_equality_forces_solution():
    p = Problem()
    x = p.add_variable(1)
    p.add_objective(x.expr)
    p.add_constraint(x.expr == 1.0)
    result = p.solve()
    np.testing.assert_allclose(result.x, [1.0], atol=1e-10)


def test_soft_inequality_binds_with_large_weight():
    # min ||x - 5||^2 with soft x - 1 <= 0 at weight 1e6.
    p = Problem()
    x = p.add_variable(1)
    p.add_objective(x.expr - 5.0)
    c = p.add_constraint(x.expr <= 1.0)
    c.configure("soft", 1e6)
    result = p.solve()

    def objective(v):
        # Optimal slack given v is max(0, 1 - v); penalty (v - 1 + s)^2.
        s = max(0.0, 1.0 - v)
        return (v - 5.0) ** 2 + 1e6 * (v - 1.0 + s) ** 2

    oracle = grid_search(objective, (-2.0, 8.0))
    assert abs(result.x[0] - 1.0) < 1e-3
    assert abs(result.x[0] - oracle) < 1e-4
    # The inequality is (barely) violated at the optimum, so the slack sits
    # at its hard bound s = 0.
    assert abs(p.slack_value(c)[0]) < 1e-9


def test_soft_inequality_inactive_costs_nothing():
    # Constraint x <= 10 is satisfied at the optimum x = 5: slack = 5, no penalty.
    p = Problem()
    x = p.add_variable(1)
    p.add_objective(x.expr - 5.0)
    c = p.add_constraint(x.expr <= 10.0)
    c.configure("soft", 123.0)
    result = p.solve()
    np.testing.assert_allclose(result.x, [5.0], atol=1e-6)
    np.testing.assert_allclose(p.slack_value(c), [5.0], atol=1e-5)
    diag = [d for d in result.constraints if d.label == c.label][0]
    assert diag.penalty < 1e-12


def test_soft_constraint_weight_must_be_positive():
    p = Problem()
    x = p.add_variable(1)
    c = p.add_constraint(x.expr <= 1.0)
    with pytest.raises(ValueError):
        c.configure("soft", 0.0)


def test_compile_single_objective_matrices():
    # ||x - v||^2 compiles to P = 1 + ridge, a = -v.
    p = Problem(ridge=1e-8)
    x = p.add_variable(1)
    v = 3.0
    p.add_objective(x.expr - v)
    qp = p.compile()
    np.testing.assert_allclose(qp.P, [[1.0 + 1e-8]])
    np.testing.assert_allclose(qp.a, [-v])


def test_compile_weighted_gram_sum():
    rng = np.random.default_rng(7)
    M1, c1 = rng.normal(size=(3, 4)), rng.normal(size=3)
    M2, c2 = rng.normal(size=(2, 4)), rng.normal(size=2)
    p = Problem(ridge=1e-8)
    p.add_variable(4)
    p.add_objective(Expression(M1, c1), 1.0)
    p.add_objective(Expression(M2, c2), 2.0)
    qp = p.compile()
    expected = M1.T @ M1 + 2.0 * (M2.T @ M2) + 1e-8 * np.eye(4)
    np.testing.assert_allclose(qp.P, expected, atol=1e-12)
    np.testing.assert_allclose(qp.a, M1.T @ c1 + 2.0 * (M2.T @ c2), atol=1e-12)


def test_compile_soft_inequality_adds_one_column_and_row():
    p = Problem()
    x = p.add_variable(1)
    p.add_objective(x.expr - 5.0)
    p.add_constraint(x.expr <= 1.0).configure("soft", 10.0)
    qp = p.compile()
    assert qp.dimension == 2  # one slack column
    assert qp.G.shape == (1, 2)  # one s >= 0 row
    assert qp.n_user == 1
    np.testing.assert_allclose(qp.G, [[0.0, -1.0]])
    np.testing.assert_allclose(qp.h, [0.0])


def test_compile_empty_problem_raises():
    with pytest.raises(EmptyProblemError):
        Problem().compile()


def test_contradictory_equalities_are_infeasible():
    p = Problem()
    x = p.add_variable(1)
    p.add_objective(x.expr)
    p.add_constraint(x.expr == 0.0)
    p.add_constraint(x.expr == 1.0)
    with pytest.raises(InfeasibleError):
        p.solve()


def test_gram_identity_randomized():
    # Compiled quadratic cost equals the weighted squared residuals up to the
    # dropped constant, for arbitrary x.
    rng = np.random.default_rng(42)
    for _ in range(20):
        n = rng.integers(1, 6)
        p = Problem(ridge=1e-12)
        p.add_variable(int(n))
        terms = []
        for _ in range(rng.integers(1, 4)):
            M = rng.normal(size=(rng.integers(1, 4), n))
            c = rng.normal(size=M.shape[0])
            w = float(rng.uniform(0.1, 5.0))
            p.add_objective(Expression(M, c), w)
            terms.append((M, c, w))
        qp = p.compile()
        x = rng.normal(size=int(n))
        quad = 0.5 * x @ qp.P @ x + qp.a @ x
        direct = sum(0.5 * w * np.sum((M @ x + c) ** 2) for M, c, w in terms)
        constant = sum(0.5 * w * float(c @ c) for M, c, w in terms)
        ridge_part = 0.5 * 1e-12 * float(x @ x)
        assert abs(quad - ridge_part - (direct - constant)) < 1e-10


def test_satisfied_hard_constraint_leaves_solution_unchanged():
    rng = np.random.default_rng(3)
    target = rng.normal(size=3)
    p = Problem()
    x = p.add_variable(3)
    p.add_objective(x.expr - target)
    base = p.solve().x

    p2 = Problem()
    x2 = p2.add_variable(3)
    p2.add_objective(x2.expr - target)
    # Inequality already satisfied strictly at the unconstrained optimum.
    p2.add_constraint(x2.expr.row(0) <= target[0] + 1.0)
    again = p2.solve().x
    np.testing.assert_allclose(base, again, atol=1e-10)

    # An equality that already holds exactly at the unconstrained optimum
    # is equally harmless (exercises the reduction path).
    p3 = Problem()
    x3 = p3.add_variable(3)
    p3.add_objective(x3.expr - target)
    p3.add_constraint(x3.expr.row(1) == target[1])
    third = p3.solve().x
    np.testing.assert_allclose(base, third, atol=1e-6)


def test_weight_monotonicity_of_two_term_objective():
    solutions = []
    for w in [0.1, 1.0, 10.0, 100.0, 1000.0]:
        p = Problem()
        x = p.add_variable(1)
        p.add_objective(x.expr, 1.0)  # pull to 0
        p.add_objective(x.expr - 2.0, w)  # pull to 2
        solutions.append(p.solve().x[0])
    assert all(b > a for a, b in zip(solutions, solutions[1:]))
    assert solutions[-1] < 2.0 + 1e-9


def test_value_queries_after_solve():
    p = Problem()
    x = p.add_variable(2)
    p.add_objective(x.expr - np.array([1.0, -1.0]))
    p.solve()
    np.testing.assert_allclose(p.value(x), [1.0, -1.0], atol=1e-6)


def test_true_cost_reports_constants():
    # Residual 1 at the optimum: reported cost keeps the constant term.
    p = Problem()
    x = p.add_variable(1)
    p.add_objective(x.expr - 1.0)
    p.add_constraint(x.expr == 0.0)
    result = p.solve()
    assert abs(result.cost - 1.0) < 1e-8


def test_compiled_hessian_is_symmetric_and_consistent():
    rng = np.random.default_rng(31)
    p = Problem()
    p.add_variable(5)
    for _ in range(3):
        M = rng.normal(size=(rng.integers(1, 4), 5))
        p.add_objective(Expression(M, rng.normal(size=M.shape[0])),
                        float(rng.uniform(0.1, 3.0)))
    p.add_constraint(Expression(rng.normal(size=(2, 5)), rng.normal(size=2)), "<=")
    qp = p.compile()
    assert np.max(np.abs(qp.P - qp.P.T)) < 1e-12
    assert qp.P.shape == (qp.dimension, qp.dimension)
    assert qp.a.shape == (qp.dimension,)
    assert qp.A.shape[1] == qp.dimension
    assert qp.G.shape[1] == qp.dimension
    assert len(qp.b) == qp.A.shape[0]
    assert len(qp.h) == qp.G.shape[0]
