import numpy as np
import pytest

from tflr import (
    QpProblem,
    coupled_simplex_constraints,
    kkt_check,
    simplex_constraints,
    solve_qp,
)
from tflr.errors import Infeasible, NotPositiveDefinite


def simplex_problem(D, d):
    m = len(d)
    A, b, n_eq = simplex_constraints(m)
    return QpProblem(np.asarray(D, float), np.asarray(d, float), A, b, n_eq)


def grid_min_objective(D, d, step=1e-3):
    """Dense-grid minimum of the QP objective over the simplex, m in {2, 3}."""
    m = len(d)
    g = np.arange(0.0, 1.0 + step / 2, step)
    if m == 2:
        pts = np.stack([g, 1.0 - g], axis=1)
    else:
        b1, b2 = np.meshgrid(g, g, indexing="ij")
        b3 = 1.0 - b1 - b2
        ok = b3 >= -1e-12
        pts = np.stack([b1[ok], b2[ok], b3[ok]], axis=1)
    vals = 0.5 * np.einsum("ij,jk,ik->i", pts, D, pts) - pts @ np.asarray(d)
    return float(vals.min())


class TestConstraintBuilders:
    def test_simplex_m2(self):
        A, b, n_eq = simplex_constraints(2)
        assert np.array_equal(A, [[1, 1], [1, 0], [0, 1]])
        assert np.array_equal(b, [1, 0, 0])
        assert n_eq == 1

    def test_simplex_m1_degenerate(self):
        A, b, n_eq = simplex_constraints(1)
        assert np.array_equal(A, [[1], [1]])
        assert np.array_equal(b, [1, 0])
        sol = solve_qp(QpProblem([[1.0]], [0.0], A, b, n_eq))
        assert sol.beta[0] == pytest.approx(1.0, abs=1e-12)

    def test_simplex_m3_shape(self):
        A, b, n_eq = simplex_constraints(3)
        assert A.shape == (4, 3) and b.shape == (4,) and n_eq == 1

    def test_coupled_single_predictor(self):
        A, b, n_eq = coupled_simplex_constraints(1, 2)
        assert np.array_equal(A[0], [1, 1])
        assert n_eq == 1

    def test_coupled_2x2_rows(self):
        A, b, n_eq = coupled_simplex_constraints(2, 2)
        assert np.array_equal(A[0], [1, 0, 1, 0])
        assert np.array_equal(A[1], [0, 1, 0, 1])
        assert np.array_equal(b, [1, 1, 0, 0, 0, 0])
        assert n_eq == 2

    def test_coupled_2x3_counts(self):
        A, b, n_eq = coupled_simplex_constraints(2, 3)
        assert A.shape == (2 + 6, 6) and n_eq == 2


class TestSolveQp:
    def test_interior_solution(self):
        sol = solve_qp(simplex_problem(np.eye(2), [0.3, 0.7]))
        assert np.allclose(sol.beta, [0.3, 0.7], atol=1e-12)
        assert sol.active_set == [0]

    def test_boundary_solution(self):
        sol = solve_qp(simplex_problem(np.eye(2), [1.5, -0.5]))
        assert np.allclose(sol.beta, [1.0, 0.0], atol=1e-12)
        assert 2 in sol.active_set  # beta_2 >= 0 binds

    def test_diagonal_curvature(self):
        sol = solve_qp(simplex_problem(np.diag([1.0, 4.0]), [0.0, 0.0]))
        assert np.allclose(sol.beta, [0.8, 0.2], atol=1e-12)

    def test_grid_oracle_and_kkt(self, rng):
        for trial in range(40):
            m = 2 + trial % 2
            M = rng.normal(size=(m, m))
            D = M @ M.T + 0.2 * np.eye(m)
            d = rng.normal(size=m)
            p = simplex_problem(D, d)
            sol = solve_qp(p)
            assert abs(sol.objective - grid_min_objective(D, d)) <= 2e-3
            resid, min_lam = kkt_check(p, sol.beta)
            assert resid <= 1e-7
            assert min_lam >= -1e-9
            s = p.A @ sol.beta - p.b
            assert s.min() >= -1e-9
            assert abs(s[0]) <= 1e-9  # equality row

    def test_deterministic(self, rng):
        M = rng.normal(size=(3, 3))
        D = M @ M.T + 0.1 * np.eye(3)
        d = rng.normal(size=3)
        a = solve_qp(simplex_problem(D, d))
        b = solve_qp(simplex_problem(D, d))
        assert np.array_equal(a.beta, b.beta)
        assert a.active_set == b.active_set
        assert a.objective == b.objective

    @pytest.mark.parametrize("c", [1e-3, 7.0, 1e4])
    def test_scale_covariance(self, rng, c):
        M = rng.normal(size=(3, 3))
        D = M @ M.T + 0.5 * np.eye(3)
        d = rng.normal(size=3)
        base = solve_qp(simplex_problem(D, d))
        scaled = solve_qp(simplex_problem(c * D, c * np.asarray(d)))
        assert np.abs(base.beta - scaled.beta).max() <= 1e-9

    def test_infeasible(self):
        p = QpProblem(np.eye(1), [0.0], [[1.0], [-1.0]], [2.0, -1.0], 0)
        with pytest.raises(Infeasible):
            solve_qp(p)

    def test_not_positive_definite(self):
        A, b, n_eq = simplex_constraints(2)
        with pytest.raises(NotPositiveDefinite):
            solve_qp(QpProblem(np.diag([1.0, -1.0]), [0.0, 0.0], A, b, n_eq))

    def test_block_factorization_matches_dense(self, rng):
        # block-diagonal D declared as blocks vs solved as a plain matrix
        blocks = [rng.normal(size=(2, 2)) for _ in range(3)]
        D = np.zeros((6, 6))
        for i, Mb in enumerate(blocks):
            D[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = Mb @ Mb.T + 0.4 * np.eye(2)
        d = rng.normal(size=6)
        A, b, n_eq = coupled_simplex_constraints(2, 3)
        dense = solve_qp(QpProblem(D, d, A, b, n_eq))
        blocked = solve_qp(QpProblem(D, d, A, b, n_eq, block=2))
        assert np.abs(dense.beta - blocked.beta).max() <= 1e-12
        assert dense.active_set == blocked.active_set

    def test_equality_already_satisfied_still_active(self):
        # unconstrained minimum lies on the equality hyperplane
        sol = solve_qp(simplex_problem(np.eye(2), [0.5, 0.5]))
        assert np.allclose(sol.beta, [0.5, 0.5])
        assert sol.active_set == [0]

    def test_multipliers_reconstruct_gradient(self, rng):
        M = rng.normal(size=(3, 3))
        D = M @ M.T + 0.3 * np.eye(3)
        d = rng.normal(size=3)
        p = simplex_problem(D, d)
        sol = solve_qp(p)
        grad = p.D @ sol.beta - p.d
        assert np.abs(grad - p.A.T @ sol.multipliers).max() <= 1e-9


class TestQpProblemValidation:
    def test_asymmetric_rejected(self):
        A, b, n_eq = simplex_constraints(2)
        with pytest.raises(ValueError, match="symmetric"):
            QpProblem([[1.0, 0.5], [0.0, 1.0]], [0.0, 0.0], A, b, n_eq)

    def test_dimension_checks(self):
        A, b, n_eq = simplex_constraints(2)
        with pytest.raises(ValueError):
            QpProblem(np.eye(2), [0.0, 0.0, 0.0], A, b, n_eq)
        with pytest.raises(ValueError):
            QpProblem(np.eye(2), [0.0, 0.0], A, b, n_eq=5)
        with pytest.raises(ValueError):
            QpProblem(np.eye(2), [0.0, 0.0], A, b, n_eq, block=3)
