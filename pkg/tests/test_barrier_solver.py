"""Tests for the log-barrier solver: derivatives, fixtures and convergence."""

import math
import time

import numpy as np
import pytest
from scipy import optimize

from config import Constants, SolverParams
from exceptions import (
    ValidationError, BoundaryViolationError, NonConvergenceError, TrialTimeoutError
)
from barrier_solver import (
    RelaxedProblem, solve_relaxed, psi, grad_psi, hess_psi, objective_value
)
from model import MeasurementMatrix, information_matrix


def _problems(seed: int):
    """Plain, augmented and linear-cost descriptors on one random matrix."""
    generator = np.random.default_rng(seed)
    A = MeasurementMatrix(generator.standard_normal((12, 3)))
    g = generator.standard_normal((2, 3))
    return [
        RelaxedProblem(A, 6),
        RelaxedProblem(A, 6, augmentation=g.T @ g),
        RelaxedProblem(A, 6, linear_cost=generator.uniform(0.0, 2.0, size=12)),
    ]


class TestRelaxedProblem:

    def test_budget_bounds(self, interleaved_rows):
        with pytest.raises(ValidationError):
            RelaxedProblem(interleaved_rows, 0)
        with pytest.raises(ValidationError):
            RelaxedProblem(interleaved_rows, 4)

    def test_budget_below_n(self, interleaved_rows):
        # one unit of mass over {e1, e2, e1, e2} splits evenly between e1 and e2
        solution = solve_relaxed(RelaxedProblem(interleaved_rows, 1))
        assert solution.converged
        assert np.sum(solution.z_star.entries) == pytest.approx(1.0, abs=1e-8)
        assert solution.objective == pytest.approx(-2.0 * math.log(2.0), abs=1e-5)

    def test_augmentation_must_be_symmetric_psd(self, interleaved_rows):
        with pytest.raises(ValidationError):
            RelaxedProblem(interleaved_rows, 2, augmentation=[[1.0, 1.0], [0.0, 1.0]])
        with pytest.raises(ValidationError):
            RelaxedProblem(interleaved_rows, 2, augmentation=[[-1.0, 0.0], [0.0, 1.0]])

    def test_linear_cost_must_be_non_negative(self, interleaved_rows):
        with pytest.raises(ValidationError):
            RelaxedProblem(interleaved_rows, 2, linear_cost=[1.0, -0.1, 0.0, 0.0])


class TestBarrierObjective:

    def test_two_equal_rows_at_half(self):
        p = RelaxedProblem(MeasurementMatrix([[1.0], [1.0]]), 1)
        assert psi(p, [0.5, 0.5], 1.0) == pytest.approx(-4.0 * math.log(2.0), rel=1e-12)

    def test_rejects_boundary_points(self, interleaved_rows):
        p = RelaxedProblem(interleaved_rows, 2)
        with pytest.raises(BoundaryViolationError):
            psi(p, [1.0, 0.5, 0.5, 0.0], 1.0)

    def test_rejects_non_positive_kappa(self, interleaved_rows):
        p = RelaxedProblem(interleaved_rows, 2)
        with pytest.raises(ValidationError):
            grad_psi(p, np.full(4, 0.5), 0.0)

    def test_linear_cost_enters_objective(self, interleaved_rows):
        p = RelaxedProblem(interleaved_rows, 2, linear_cost=[1.0, 0.0, 0.0, 0.0])
        assert objective_value(p, np.full(4, 0.5)) == pytest.approx(-0.5)


class TestDerivatives:
    """Analytic gradient and Hessian against central differences."""

    @pytest.mark.parametrize("seed", range(7))
    def test_gradient(self, seed):
        points = np.random.default_rng(100 + seed)
        for p in _problems(seed):
            z = points.uniform(0.2, 0.8, size=p.m)
            kappa = 0.3
            h = 1e-6
            numerical = np.array([
                (psi(p, z + h * e, kappa) - psi(p, z - h * e, kappa)) / (2 * h)
                for e in np.eye(p.m)
            ])
            analytic = grad_psi(p, z, kappa)
            assert np.linalg.norm(numerical - analytic) / np.linalg.norm(analytic) < 1e-5

    @pytest.mark.parametrize("seed", range(7))
    def test_hessian(self, seed):
        points = np.random.default_rng(200 + seed)
        for p in _problems(seed):
            z = points.uniform(0.2, 0.8, size=p.m)
            kappa = 0.3
            h = 1e-5
            numerical = np.column_stack([
                (grad_psi(p, z + h * e, kappa) - grad_psi(p, z - h * e, kappa)) / (2 * h)
                for e in np.eye(p.m)
            ])
            analytic = hess_psi(p, z, kappa)
            assert np.linalg.norm(numerical - analytic) / np.linalg.norm(analytic) < 1e-4

    def test_gradient_on_two_equal_rows(self):
        p = RelaxedProblem(MeasurementMatrix([[1.0], [1.0]]), 1)
        np.testing.assert_array_equal(grad_psi(p, [0.5, 0.5], 1.0), [1.0, 1.0])

    def test_linear_cost_shifts_gradient(self):
        rows = MeasurementMatrix([[1.0], [1.0]])
        plain = grad_psi(RelaxedProblem(rows, 1), [0.5, 0.5], 1.0)
        costed = grad_psi(RelaxedProblem(rows, 1, linear_cost=[1.0, 0.0]), [0.5, 0.5], 1.0)
        assert plain[0] - costed[0] == 1.0
        assert plain[1] == costed[1]

    def test_linear_cost_shifts_gradient_at_random_point(self, rng):
        A = MeasurementMatrix(rng.standard_normal((8, 3)))
        z = rng.uniform(0.2, 0.8, size=8)
        cost = np.zeros(8)
        cost[0] = 1.0
        plain = grad_psi(RelaxedProblem(A, 4), z, 0.5)
        costed = grad_psi(RelaxedProblem(A, 4, linear_cost=cost), z, 0.5)
        assert plain[0] - costed[0] == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_array_equal(plain[1:], costed[1:])

    def test_hessian_on_two_equal_rows(self):
        p = RelaxedProblem(MeasurementMatrix([[1.0], [1.0]]), 1)
        np.testing.assert_allclose(hess_psi(p, [0.5, 0.5], 1.0), [[-9.0, -1.0], [-1.0, -9.0]], atol=1e-12)

    def test_hessian_is_negative_definite(self, rng):
        p = _problems(3)[0]
        H = hess_psi(p, rng.uniform(0.1, 0.9, size=p.m), 0.01)
        assert np.max(np.linalg.eigvalsh(H)) < 0


class TestSymmetricFixtures:

    @pytest.mark.parametrize("fixture", ["paired_rows", "interleaved_rows"])
    def test_uniform_optimum(self, fixture, request):
        solution = solve_relaxed(RelaxedProblem(request.getfixturevalue(fixture), 2))
        np.testing.assert_allclose(solution.z_star.entries, 0.5, atol=1e-6)
        assert solution.objective == pytest.approx(0.0, abs=1e-8)
        assert solution.converged

    def test_stopping_rule_reached(self, paired_rows):
        solution = solve_relaxed(RelaxedProblem(paired_rows, 2))
        assert 2 * paired_rows.m * solution.final_kappa < 1e-6


class TestSolveRelaxed:

    @pytest.mark.parametrize("seed", range(4))
    def test_feasible_solution(self, seed):
        for p in _problems(seed):
            solution = solve_relaxed(p)
            z = solution.z_star.entries
            assert abs(np.sum(z) - p.budget) < 1e-8
            assert np.all(z > 0.0) and np.all(z < 1.0)

    def test_psi_non_decreasing_within_stage(self):
        solution = solve_relaxed(_problems(5)[0])
        trace = solution.psi_trace
        assert trace
        for (kappa_a, psi_a), (kappa_b, psi_b) in zip(trace, trace[1:]):
            if kappa_a == kappa_b:
                assert psi_b >= psi_a

    @pytest.mark.parametrize("seed", range(4))
    def test_projected_gradient_vanishes(self, seed):
        for p in _problems(seed):
            solution = solve_relaxed(p)
            g = grad_psi(p, solution.z_star.entries, solution.final_kappa)
            assert np.max(np.abs(g - np.mean(g))) < Constants.KKT_TOL

    def test_log_det_gradient_ordering(self):
        p = _problems(1)[0]
        solution = solve_relaxed(p)
        z = solution.z_star.entries
        W = np.linalg.inv(information_matrix(p.rows, z))
        g = np.einsum('ij,jk,ik->i', p.rows.rows, W, p.rows.rows)
        # no entry that can still grow may gain more than an entry that can still shrink
        can_grow = z < 1.0 - 1e-3
        can_shrink = z > 1e-3
        assert np.max(g[can_grow]) <= np.min(g[can_shrink]) + 1e-3

    def test_repeated_runs_are_bit_identical(self):
        for p in _problems(6):
            first, second = solve_relaxed(p), solve_relaxed(p)
            np.testing.assert_array_equal(first.z_star.entries, second.z_star.entries)
            assert first.objective == second.objective
            assert first.psi_trace == second.psi_trace

    def test_better_than_uniform_start(self):
        p = _problems(2)[0]
        solution = solve_relaxed(p)
        assert solution.objective >= objective_value(p, np.full(p.m, p.budget / p.m))

    @pytest.mark.parametrize("seed", range(3))
    def test_agrees_with_general_purpose_solver(self, seed):
        p = _problems(seed)[0]
        A = p.rows.rows

        def negative_f(z):
            return -np.linalg.slogdet(A.T @ (z[:, None] * A))[1]

        def negative_grad(z):
            W = np.linalg.inv(A.T @ (z[:, None] * A))
            return -np.einsum('ij,jk,ik->i', A, W, A)

        reference = optimize.minimize(
            negative_f, np.full(p.m, p.budget / p.m), jac=negative_grad, method='SLSQP',
            bounds=[(1e-9, 1.0)] * p.m,
            constraints=[{'type': 'eq', 'fun': lambda z: np.sum(z) - p.budget}],
            options={'ftol': 1e-14, 'maxiter': 1000},
        )
        solution = solve_relaxed(p)
        tolerance = 1e-5 * max(1.0, abs(solution.objective))
        assert solution.objective >= -reference.fun - tolerance
        assert solution.objective == pytest.approx(-reference.fun, abs=1e-5)

    def test_tighter_tolerance_within_stopping_bound(self):
        p = _problems(4)[0]
        coarse = solve_relaxed(p)
        fine = solve_relaxed(p, SolverParams(stop_tol=1e-9))
        assert fine.objective >= coarse.objective - 1e-8 * max(1.0, abs(fine.objective))
        assert fine.objective - coarse.objective <= 2 * p.m * coarse.final_kappa

    def test_stage_cap(self, paired_rows):
        with pytest.raises(NonConvergenceError):
            solve_relaxed(RelaxedProblem(paired_rows, 2), SolverParams(max_outer=1))

    def test_expired_deadline(self, paired_rows):
        with pytest.raises(TrialTimeoutError):
            solve_relaxed(RelaxedProblem(paired_rows, 2), SolverParams(deadline=time.monotonic() - 1.0))
