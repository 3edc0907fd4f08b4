#!/usr/bin/env python3
"""
Centralized and decentralized sensor selection strategies.

The decentralized strategies split the rows between two leader nodes. Node 1
always runs the plain relaxation. Node 2 either does the same (naive),
augments its information matrix with node 1's dominant directions (focused
diversity), or pays a linear cost for rows aligned with them (linear penalty).
Both heuristics only see the N shared vectors g_j = lambda_j u_j.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from config import SolverParams
from exceptions import (
    ValidationError, DimensionMismatchError, ZeroRowError, SingularInformationError
)
from model import (
    MeasurementMatrix, Partition, SelectionVector, SelectionLike, BoundsReport,
    as_entries, information_matrix, log_det_objective, stack_selections
)
from barrier_solver import RelaxedProblem, RelaxedSolution, solve_relaxed
from validators import (
    validate_centralized_budget, validate_decentralized_budget, validate_shared_count
)

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_INFEASIBLE_ROUNDING = "infeasible_rounding"


class Strategy(Enum):
    CENTRALIZED = "centralized"
    NAIVE = "naive"
    FDM = "fdm"
    LPM = "lpm"


def parse_strategy(value) -> Strategy:
    """Strategy from its name; ValidationError for unknown names."""
    try:
        return Strategy(value)
    except ValueError:
        raise ValidationError(f"Unknown strategy {value!r}, expected one of {[s.value for s in Strategy]}")


@dataclass(frozen=True, eq=False)
class SharedVectorSet:
    """Vectors g_j = lambda_j u_j sent from node 1, ordered by descending norm."""
    vectors: np.ndarray

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=float)
        if vectors.ndim != 2:
            raise DimensionMismatchError(f"Shared vectors must be an (N, n) array, got shape {vectors.shape}")
        count, n = vectors.shape
        if n < 1:
            raise ValidationError("Shared vectors need dimension n >= 1")
        if count > n:
            raise ValidationError(f"At most n={n} shared vectors exist, got {count}")
        if not np.all(np.isfinite(vectors)):
            raise ValidationError("Shared vectors contain non-finite values")
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(np.diff(norms) > 1e-12 * max(1.0, float(norms[0]) if count else 1.0)):
            raise ValidationError("Shared vector norms must be non-increasing")
        vectors.setflags(write=False)
        object.__setattr__(self, 'vectors', vectors)

    @classmethod
    def empty(cls, n: int) -> 'SharedVectorSet':
        return cls(np.zeros((0, n)))

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def augmentation(self) -> Optional[np.ndarray]:
        """sum_j g_j g_j^T = sum_j lambda_j^2 u_j u_j^T, or None when empty."""
        if self.count == 0:
            return None
        S = self.vectors.T @ self.vectors
        return 0.5 * (S + S.T)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SharedVectorSet):
            return NotImplemented
        return np.array_equal(self.vectors, other.vectors)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class NodeSelection:
    """One leader node's relaxed solution and its rounded selection."""
    solution: RelaxedSolution
    z_boolean: SelectionVector

    @property
    def z_relaxed(self) -> SelectionVector:
        return self.solution.z_star


@dataclass(frozen=True, eq=False)
class StrategyOutcome:
    """Stacked selections and bounds for one strategy on one instance."""
    strategy: Strategy
    z_relaxed: SelectionVector
    z_boolean: SelectionVector
    bounds: BoundsReport
    # f_cen at the stacked relaxed vector
    relaxed_value: float
    # (node label, outer iterations, inner iterations)
    solver_iterations: Tuple[Tuple[str, int, int], ...]
    shared_count: int = 0
    status: str = STATUS_OK

    def to_dict(self) -> Dict[str, Any]:
        def finite_or_none(value: Optional[float]) -> Optional[float]:
            if value is None or not math.isfinite(value):
                return None
            return float(value)

        return {
            "strategy": self.strategy.value,
            "status": self.status,
            "shared_count": self.shared_count,
            "z_relaxed": [float(v) for v in self.z_relaxed.entries],
            "z_boolean": [int(v) for v in self.z_boolean.entries],
            "U": finite_or_none(self.bounds.upper),
            "L": finite_or_none(self.bounds.lower),
            "gap": finite_or_none(self.bounds.gap),
            "relative_gap_percent": finite_or_none(self.bounds.relative_gap_percent),
            "relaxed_value": finite_or_none(self.relaxed_value),
            "solver_iterations": [
                {"node": node, "outer": outer, "inner": inner}
                for node, outer, inner in self.solver_iterations
            ],
        }


def round_simple(z: SelectionLike, k: int) -> SelectionVector:
    """Set the k largest entries to 1 (ties go to the lowest index), the rest to 0."""
    entries = as_entries(z)
    if k < 0 or k > entries.shape[0]:
        raise ValidationError(f"Cannot select k={k} of {entries.shape[0]} sensors")
    order = np.argsort(-entries, kind='stable')
    rounded = np.zeros(entries.shape[0])
    rounded[order[:k]] = 1.0
    return SelectionVector.boolean(rounded, k)


def solve_node(rows: MeasurementMatrix, budget: int, params: Optional[SolverParams] = None,
               augmentation: Optional[np.ndarray] = None,
               linear_cost: Optional[np.ndarray] = None) -> NodeSelection:
    """Solve one relaxed problem and round it."""
    problem = RelaxedProblem(rows, budget, augmentation=augmentation, linear_cost=linear_cost)
    solution = solve_relaxed(problem, params)
    return NodeSelection(solution=solution, z_boolean=round_simple(solution.z_star, budget))


def extract_shared_vectors(a1: MeasurementMatrix, z1_boolean: SelectionLike, N: int) -> SharedVectorSet:
    """Top-N eigenpairs of A1^T diag(z1) A1 as g_j = lambda_j u_j.

    Each u_j is unit-norm with its largest-magnitude component positive.
    Round-off negative eigenvalues are clipped to zero.
    """
    validate_shared_count(N, a1.n)
    M = information_matrix(a1, z1_boolean)
    eigenvalues, eigenvectors = linalg.eigh(M)
    vectors = np.zeros((N, a1.n))
    for j, column in enumerate(range(a1.n - 1, a1.n - 1 - N, -1)):
        u = eigenvectors[:, column]
        if u[np.argmax(np.abs(u))] < 0:
            u = -u
        vectors[j] = max(float(eigenvalues[column]), 0.0) * u
    return SharedVectorSet(vectors)


def lpm_costs(a2: MeasurementMatrix, shared: SharedVectorSet) -> np.ndarray:
    """c_i = sum_j |a_2i^T g_j| / ||a_2i||^2 (similarity times relevance)."""
    if shared.n != a2.n:
        raise DimensionMismatchError(f"Shared vectors have dimension {shared.n}, rows have {a2.n}")
    norms_sq = np.sum(a2.rows * a2.rows, axis=1)
    zero_rows = np.flatnonzero(norms_sq == 0.0)
    if zero_rows.size:
        raise ZeroRowError(int(zero_rows[0]))
    if shared.count == 0:
        return np.zeros(a2.m)
    return np.sum(np.abs(a2.rows @ shared.vectors.T), axis=1) / norms_sq


def solve_fdm_node(a2: MeasurementMatrix, budget: int, shared: SharedVectorSet,
                   params: Optional[SolverParams] = None) -> NodeSelection:
    """Node 2 under focused diversity: augmentation sum_j g_j g_j^T."""
    return solve_node(a2, budget, params, augmentation=shared.augmentation())


def solve_lpm_node(a2: MeasurementMatrix, budget: int, shared: SharedVectorSet,
                   params: Optional[SolverParams] = None) -> NodeSelection:
    """Node 2 under the linear penalty: objective f_2(z) - c^T z."""
    costs = lpm_costs(a2, shared) if shared.count else None
    return solve_node(a2, budget, params, linear_cost=costs)


def centralized_upper_bound(A: MeasurementMatrix, k: int, params: Optional[SolverParams] = None) -> float:
    """U_cen = f_cen(z*_cen), the global upper bound."""
    validate_centralized_budget(k, A.m, A.n)
    return solve_relaxed(RelaxedProblem(A, k), params).objective


def _lower_bound(A: MeasurementMatrix, z_boolean: SelectionVector, strategy: Strategy) -> Tuple[float, str]:
    try:
        return log_det_objective(A, z_boolean), STATUS_OK
    except SingularInformationError as e:
        logger.warning(f"Rounded {strategy.value} selection is rank-deficient: {e}")
        return -math.inf, STATUS_INFEASIBLE_ROUNDING


def select_centralized(A: MeasurementMatrix, k: int, params: Optional[SolverParams] = None) -> StrategyOutcome:
    """Relax, round and bound the centralized problem."""
    validate_centralized_budget(k, A.m, A.n)
    node = solve_node(A, k, params)
    upper = node.solution.objective
    lower, status = _lower_bound(A, node.z_boolean, Strategy.CENTRALIZED)
    outcome = StrategyOutcome(
        strategy=Strategy.CENTRALIZED,
        z_relaxed=node.z_relaxed,
        z_boolean=node.z_boolean,
        bounds=BoundsReport.from_bounds(upper, lower),
        relaxed_value=upper,
        solver_iterations=(("central", node.solution.outer_iterations, node.solution.inner_iterations),),
        status=status,
    )
    logger.debug(f"Centralized selection: U={upper:.10g}, L={lower:.10g}")
    return outcome


def combine_nodes(strategy: Strategy, partition: Partition, node1: NodeSelection, node2: NodeSelection,
                  upper: Optional[float] = None, params: Optional[SolverParams] = None,
                  shared_count: int = 0) -> StrategyOutcome:
    """Collector step: stack node selections and bound them centrally."""
    A = partition.stacked()
    k = node1.z_boolean.budget + node2.z_boolean.budget
    if upper is None:
        upper = centralized_upper_bound(A, k, params)
    z_relaxed = stack_selections(node1.z_relaxed, node2.z_relaxed)
    z_boolean = stack_selections(node1.z_boolean, node2.z_boolean)
    lower, status = _lower_bound(A, z_boolean, strategy)
    return StrategyOutcome(
        strategy=strategy,
        z_relaxed=z_relaxed,
        z_boolean=z_boolean,
        bounds=BoundsReport.from_bounds(upper, lower),
        relaxed_value=log_det_objective(A, z_relaxed),
        solver_iterations=(
            ("node1", node1.solution.outer_iterations, node1.solution.inner_iterations),
            ("node2", node2.solution.outer_iterations, node2.solution.inner_iterations),
        ),
        shared_count=shared_count,
        status=status,
    )


def select_naive(partition: Partition, k: int, params: Optional[SolverParams] = None,
                 upper: Optional[float] = None, node1: Optional[NodeSelection] = None) -> StrategyOutcome:
    """Each node solves its own half with budget k/2, no communication."""
    validate_decentralized_budget(k, partition.m, partition.n)
    half = k // 2
    if node1 is None:
        node1 = solve_node(partition.a1, half, params)
    node2 = solve_node(partition.a2, half, params)
    return combine_nodes(Strategy.NAIVE, partition, node1, node2, upper, params)


def select_fdm(partition: Partition, k: int, N: int, params: Optional[SolverParams] = None,
               upper: Optional[float] = None, node1: Optional[NodeSelection] = None) -> StrategyOutcome:
    """Focused diversity: node 2 treats node 1's top-N directions as covered."""
    validate_decentralized_budget(k, partition.m, partition.n)
    validate_shared_count(N, partition.n)
    half = k // 2
    if node1 is None:
        node1 = solve_node(partition.a1, half, params)
    shared = extract_shared_vectors(partition.a1, node1.z_boolean, N)
    node2 = solve_fdm_node(partition.a2, half, shared, params)
    return combine_nodes(Strategy.FDM, partition, node1, node2, upper, params, shared.count)


def select_lpm(partition: Partition, k: int, N: int, params: Optional[SolverParams] = None,
               upper: Optional[float] = None, node1: Optional[NodeSelection] = None) -> StrategyOutcome:
    """Linear penalty: node 2 pays c_i for rows aligned with node 1's directions."""
    validate_decentralized_budget(k, partition.m, partition.n)
    validate_shared_count(N, partition.n)
    half = k // 2
    if node1 is None:
        node1 = solve_node(partition.a1, half, params)
    shared = extract_shared_vectors(partition.a1, node1.z_boolean, N)
    node2 = solve_lpm_node(partition.a2, half, shared, params)
    return combine_nodes(Strategy.LPM, partition, node1, node2, upper, params, shared.count)
