#!/usr/bin/env python3
"""
Log-barrier interior-point solver for the relaxed selection problems.

One problem descriptor covers all four relaxations:

    maximize    log det(sum_i z_i a_i a_i^T + S) - c^T z
    subject to  1^T z = k,  0 <= z_i <= 1

S (augmentation) is only set for focused diversity, c (linear cost) only for
the linear penalty variant. The solver maximizes

    psi(z) = f(z) + kappa * sum_i (log z_i + log(1 - z_i))

with feasible-start Newton steps on the budget hyperplane and shrinks kappa
until the 2 m kappa suboptimality bound is below the relative tolerance.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from config import Constants, SolverParams
from exceptions import (
    ValidationError, DimensionMismatchError, BoundaryViolationError,
    NonConvergenceError, SingularKKTError, SingularInformationError,
    TrialTimeoutError
)
from model import (
    MeasurementMatrix, SelectionVector, information_matrix, cholesky_factor,
    log_det_from_factor
)

logger = logging.getLogger(__name__)


def _frozen_copy(values, shape: Tuple[int, ...], name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.shape != shape:
        raise DimensionMismatchError(f"{name} has shape {array.shape}, expected {shape}")
    if not np.all(np.isfinite(array)):
        raise ValidationError(f"{name} contains non-finite values")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class RelaxedProblem:
    """Relaxed selection problem over the rows of one matrix."""
    rows: MeasurementMatrix
    budget: int
    augmentation: Optional[np.ndarray] = None
    linear_cost: Optional[np.ndarray] = None

    def __post_init__(self):
        m, n = self.rows.m, self.rows.n
        # full column rank: every interior z gives a positive definite information matrix
        if not 1 <= self.budget < m:
            raise ValidationError(f"Budget {self.budget} must satisfy 1 <= budget < m={m}")
        if self.augmentation is not None:
            S = _frozen_copy(self.augmentation, (n, n), "Augmentation")
            if not np.allclose(S, S.T, rtol=0.0, atol=1e-12 * max(1.0, np.max(np.abs(S)))):
                raise ValidationError("Augmentation must be symmetric")
            smallest = float(linalg.eigvalsh(S)[0])
            if smallest < -1e-10 * max(1.0, np.max(np.abs(S))):
                raise ValidationError(f"Augmentation must be positive semidefinite (eigenvalue {smallest:.3e})")
            object.__setattr__(self, 'augmentation', S)
        if self.linear_cost is not None:
            c = _frozen_copy(self.linear_cost, (m,), "Linear cost")
            if np.any(c < 0):
                raise ValidationError("Linear cost entries must be non-negative")
            object.__setattr__(self, 'linear_cost', c)

    @property
    def m(self) -> int:
        return self.rows.m

    @property
    def n(self) -> int:
        return self.rows.n


@dataclass(frozen=True, eq=False)
class RelaxedSolution:
    """Solver output; objective is f(z*) - c^T z* without the barrier."""
    z_star: SelectionVector
    objective: float
    outer_iterations: int
    inner_iterations: int
    final_kappa: float
    converged: bool
    # (kappa, psi) after every accepted Newton step
    psi_trace: Tuple[Tuple[float, float], ...] = ()


def _interior_point(p: RelaxedProblem, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (p.m,):
        raise DimensionMismatchError(f"Point has shape {z.shape}, expected ({p.m},)")
    if np.any(z <= 0.0) or np.any(z >= 1.0):
        raise BoundaryViolationError("Point is not strictly inside the unit box")
    return z


def _check_kappa(kappa: float) -> None:
    if not kappa > 0:
        raise ValidationError(f"Barrier weight kappa must be positive, got {kappa}")


def _barrier(z: np.ndarray, kappa: float) -> float:
    return float(kappa * np.sum(np.log(z) + np.log1p(-z)))


def _objective_from_factor(p: RelaxedProblem, z: np.ndarray, L: np.ndarray) -> float:
    value = log_det_from_factor(L)
    if p.linear_cost is not None:
        value -= float(p.linear_cost @ z)
    return value


def objective_value(p: RelaxedProblem, z) -> float:
    """f(z) - c^T z, the value the solver reports."""
    z = np.asarray(z, dtype=float)
    L = cholesky_factor(information_matrix(p.rows, z, p.augmentation))
    return _objective_from_factor(p, z, L)


def psi(p: RelaxedProblem, z, kappa: float) -> float:
    """Barrier objective f(z) - c^T z + kappa * sum(log z + log(1 - z))."""
    z = _interior_point(p, z)
    _check_kappa(kappa)
    return objective_value(p, z) + _barrier(z, kappa)


def _whitened_rows(p: RelaxedProblem, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Cholesky factor L of the information matrix and B = L^{-1} A^T.

    Column i of B satisfies |B_i|^2 = a_i^T W a_i and B^T B = A W A^T.
    """
    L = cholesky_factor(information_matrix(p.rows, z, p.augmentation))
    B = linalg.solve_triangular(L, p.rows.rows.T, lower=True)
    return L, B


def _gradient_from(p: RelaxedProblem, z: np.ndarray, B: np.ndarray, kappa: float) -> np.ndarray:
    g = np.sum(B * B, axis=0)
    if p.linear_cost is not None:
        g = g - p.linear_cost
    return g + kappa * (1.0 / z - 1.0 / (1.0 - z))


def _hessian_from(z: np.ndarray, B: np.ndarray, kappa: float) -> np.ndarray:
    K = B.T @ B
    H = -(K * K)
    H[np.diag_indices_from(H)] -= kappa * (1.0 / z ** 2 + 1.0 / (1.0 - z) ** 2)
    return 0.5 * (H + H.T)


def grad_psi(p: RelaxedProblem, z, kappa: float) -> np.ndarray:
    """Analytic gradient: a_i^T W a_i - c_i + kappa (1/z_i - 1/(1 - z_i))."""
    z = _interior_point(p, z)
    _check_kappa(kappa)
    _, B = _whitened_rows(p, z)
    return _gradient_from(p, z, B, kappa)


def hess_psi(p: RelaxedProblem, z, kappa: float) -> np.ndarray:
    """Analytic Hessian: -(a_i^T W a_j)^2 minus the diagonal barrier curvature."""
    z = _interior_point(p, z)
    _check_kappa(kappa)
    _, B = _whitened_rows(p, z)
    return _hessian_from(z, B, kappa)


def _derivatives(p: RelaxedProblem, z: np.ndarray, kappa: float) -> Tuple[float, np.ndarray, np.ndarray]:
    L, B = _whitened_rows(p, z)
    value = _objective_from_factor(p, z, L) + _barrier(z, kappa)
    return value, _gradient_from(p, z, B, kappa), _hessian_from(z, B, kappa)


def _newton_step(g: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Solve [H 1; 1^T 0] [dz; w] = [-g; 0] so that 1^T dz = 0."""
    m = g.shape[0]
    kkt = np.zeros((m + 1, m + 1))
    kkt[:m, :m] = H
    kkt[:m, m] = 1.0
    kkt[m, :m] = 1.0
    rhs = np.concatenate([-g, [0.0]])
    try:
        solution = linalg.solve(kkt, rhs, assume_a='sym')
    except linalg.LinAlgError as e:
        raise SingularKKTError(f"Newton KKT system is singular: {e}")
    if not np.all(np.isfinite(solution)):
        raise SingularKKTError("Newton KKT system produced a non-finite step")
    return solution[:m]


def _max_step(z: np.ndarray, dz: np.ndarray) -> float:
    """Largest t with z + t dz still in the closed unit box."""
    limits = []
    decreasing = dz < 0
    increasing = dz > 0
    if np.any(decreasing):
        limits.append(np.min(-z[decreasing] / dz[decreasing]))
    if np.any(increasing):
        limits.append(np.min((1.0 - z[increasing]) / dz[increasing]))
    return float(min(limits)) if limits else math.inf


def _line_search(p: RelaxedProblem, z: np.ndarray, dz: np.ndarray, kappa: float,
                 value: float, decrement_sq: float,
                 params: SolverParams) -> Optional[Tuple[np.ndarray, float]]:
    """Backtracking ascent search; None when no admissible step exists."""
    t = min(1.0, params.boundary_fraction * _max_step(z, dz))
    while t >= Constants.MIN_STEP:
        candidate = z + t * dz
        if np.all(candidate > 0.0) and np.all(candidate < 1.0):
            try:
                new_value = objective_value(p, candidate) + _barrier(candidate, kappa)
            except SingularInformationError:
                new_value = -math.inf
            if new_value >= value + params.alpha * t * decrement_sq:
                return candidate, new_value
        t *= params.beta
    return None


def _check_deadline(params: SolverParams) -> None:
    if params.deadline is not None and time.monotonic() > params.deadline:
        raise TrialTimeoutError("Solver exceeded its wall-clock budget")


def _centering(p: RelaxedProblem, z: np.ndarray, kappa: float, params: SolverParams,
               trace: list) -> Tuple[np.ndarray, int, bool]:
    """Newton iterations at fixed kappa; returns (z, steps, centered)."""
    steps = 0
    while True:
        _check_deadline(params)
        value, g, H = _derivatives(p, z, kappa)
        dz = _newton_step(g, H)
        decrement_sq = max(float(g @ dz), 0.0)
        projected = g - np.mean(g)
        small_decrement = decrement_sq / 2.0 < params.newton_tol
        if small_decrement and np.max(np.abs(projected)) < params.kkt_tol:
            return z, steps, True
        if steps >= params.max_inner:
            logger.debug(f"Inner cap reached at kappa={kappa:.1e} (decrement^2/2={decrement_sq / 2.0:.3e})")
            return z, steps, small_decrement
        result = _line_search(p, z, dz, kappa, value, decrement_sq, params)
        if result is None:
            # no further ascent representable in floating point
            return z, steps, small_decrement
        z, new_value = result
        steps += 1
        trace.append((kappa, new_value))


def solve_relaxed(p: RelaxedProblem, params: Optional[SolverParams] = None) -> RelaxedSolution:
    """Solve the relaxed problem with the barrier method."""
    params = params or SolverParams()
    z = np.full(p.m, p.budget / p.m)
    kappa = params.kappa0
    inner_total = 0
    trace: list = []

    for outer in range(1, params.max_outer + 1):
        z, steps, centered = _centering(p, z, kappa, params, trace)
        inner_total += steps
        value = objective_value(p, z)
        bound = 2 * p.m * kappa
        logger.debug(
            f"Barrier stage {outer}: kappa={kappa:.1e}, f={value:.10g}, "
            f"newton_steps={steps}, bound={bound:.2e}"
        )
        if bound < params.stop_tol * max(1.0, abs(value)):
            if not centered:
                raise NonConvergenceError(
                    f"Final centering step did not converge within {params.max_inner} Newton steps"
                )
            return RelaxedSolution(
                z_star=SelectionVector.relaxed(z, p.budget),
                objective=value,
                outer_iterations=outer,
                inner_iterations=inner_total,
                final_kappa=kappa,
                converged=True,
                psi_trace=tuple(trace),
            )
        kappa /= params.kappa_shrink

    raise NonConvergenceError(
        f"Barrier method did not reach tolerance within {params.max_outer} stages "
        f"(last kappa={kappa * params.kappa_shrink:.1e})"
    )
