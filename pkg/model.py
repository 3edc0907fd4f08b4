#!/usr/bin/env python3
"""
Linear measurement model, selection vectors and the log-det objective.

All objective values are natural-log volumes (nats). Types are immutable
after construction; every function here is pure.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union, Sequence

import numpy as np
from scipy import linalg

from config import Constants
from exceptions import (
    ValidationError, DimensionMismatchError, SingularInformationError,
    DegenerateReferenceError
)

logger = logging.getLogger(__name__)


def _frozen_array(values, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise DimensionMismatchError(f"Expected a {ndim}-dimensional array, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """m x n matrix of sensor rows a_i^T with full column rank."""
    rows: np.ndarray
    # sigma^2 is an additive constant in the log-volume; never used by selection
    noise_variance: float = 1.0

    def __post_init__(self):
        rows = _frozen_array(self.rows, 2)
        object.__setattr__(self, 'rows', rows)
        m, n = rows.shape
        if n < 1:
            raise ValidationError("Measurement matrix needs at least one column")
        if m < n:
            raise ValidationError(f"Measurement matrix needs m >= n, got m={m}, n={n}")
        if not np.all(np.isfinite(rows)):
            raise ValidationError("Measurement matrix contains non-finite values")
        if self.noise_variance <= 0:
            raise ValidationError("noise_variance must be positive")
        rank = numerical_rank(rows)
        if rank < n:
            raise ValidationError(f"Measurement matrix has column rank {rank} < n={n}")

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def n(self) -> int:
        return self.rows.shape[1]


def numerical_rank(matrix: np.ndarray) -> int:
    """Rank with threshold max(m, n) * eps * sigma_max."""
    singular_values = linalg.svdvals(matrix)
    if singular_values.size == 0 or singular_values[0] == 0.0:
        return 0
    threshold = max(matrix.shape) * np.finfo(float).eps * singular_values[0]
    return int(np.sum(singular_values > threshold))


@dataclass(frozen=True, eq=False)
class Partition:
    """Row split of the measurement matrix between the two leader nodes."""
    a1: MeasurementMatrix
    a2: MeasurementMatrix
    # (row in A1, row in A2) pairs overwritten by the correlated generator
    correlated_pairs: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.a1.n != self.a2.n:
            raise DimensionMismatchError(f"Halves have different widths {self.a1.n} and {self.a2.n}")
        if self.a1.m != self.a2.m:
            raise DimensionMismatchError(f"Halves have different row counts {self.a1.m} and {self.a2.m}")

    @property
    def m(self) -> int:
        return self.a1.m + self.a2.m

    @property
    def n(self) -> int:
        return self.a1.n

    @classmethod
    def split(cls, matrix: MeasurementMatrix) -> 'Partition':
        """Split an even-row matrix into top (node 1) and bottom (node 2) halves."""
        if matrix.m % 2:
            raise ValidationError(f"Cannot split m={matrix.m} rows into equal halves")
        half = matrix.m // 2
        return cls(
            a1=MeasurementMatrix(matrix.rows[:half], matrix.noise_variance),
            a2=MeasurementMatrix(matrix.rows[half:], matrix.noise_variance),
        )

    def stacked(self) -> MeasurementMatrix:
        """Full matrix with A1 rows first."""
        return MeasurementMatrix(np.vstack([self.a1.rows, self.a2.rows]), self.a1.noise_variance)


class SelectionKind(Enum):
    RELAXED = "relaxed"
    BOOLEAN = "boolean"


@dataclass(frozen=True, eq=False)
class SelectionVector:
    """Relaxed (entries in [0, 1]) or Boolean selection summing to the budget."""
    entries: np.ndarray
    kind: SelectionKind
    budget: int

    def __post_init__(self):
        entries = _frozen_array(self.entries, 1)
        object.__setattr__(self, 'entries', entries)
        if self.budget < 0:
            raise ValidationError(f"Budget must be non-negative, got {self.budget}")
        if not np.all(np.isfinite(entries)):
            raise ValidationError("Selection vector contains non-finite values")
        total = float(np.sum(entries))
        if self.kind is SelectionKind.BOOLEAN:
            if not np.all((entries == 0.0) | (entries == 1.0)):
                raise ValidationError("Boolean selection entries must be 0 or 1")
            if int(round(total)) != self.budget:
                raise ValidationError(f"Boolean selection sums to {total:g}, budget is {self.budget}")
        else:
            if np.any(entries < 0.0) or np.any(entries > 1.0):
                raise ValidationError("Relaxed selection entries must lie in [0, 1]")
            if abs(total - self.budget) > Constants.RELAXED_SUM_TOL:
                raise ValidationError(f"Relaxed selection sums to {total!r}, budget is {self.budget}")

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def relaxed(cls, entries, budget: int) -> 'SelectionVector':
        return cls(entries, SelectionKind.RELAXED, budget)

    @classmethod
    def boolean(cls, entries, budget: Optional[int] = None) -> 'SelectionVector':
        entries = np.asarray(entries, dtype=float)
        if budget is None:
            budget = int(round(float(np.sum(entries))))
        return cls(entries, SelectionKind.BOOLEAN, budget)

    def selected_indices(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.entries))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SelectionVector):
            return NotImplemented
        return (self.kind is other.kind and self.budget == other.budget
                and np.array_equal(self.entries, other.entries))

    __hash__ = None


SelectionLike = Union[SelectionVector, np.ndarray, Sequence[float]]


def as_entries(z: SelectionLike) -> np.ndarray:
    """Plain float vector behind a selection or array."""
    if isinstance(z, SelectionVector):
        return z.entries
    return np.asarray(z, dtype=float)


def information_matrix(A: MeasurementMatrix, z: SelectionLike,
                       S: Optional[np.ndarray] = None) -> np.ndarray:
    """Return sum_i z_i a_i a_i^T + S as a symmetric n x n matrix."""
    weights = as_entries(z)
    if weights.shape != (A.m,):
        raise DimensionMismatchError(f"Selection has shape {weights.shape}, expected ({A.m},)")
    # zero-weight rows contribute nothing and are skipped
    active = weights != 0.0
    rows = A.rows[active]
    M = rows.T @ (weights[active, None] * rows)
    if S is not None:
        S = np.asarray(S, dtype=float)
        if S.shape != (A.n, A.n):
            raise DimensionMismatchError(f"Augmentation has shape {S.shape}, expected ({A.n}, {A.n})")
        M = M + S
    return 0.5 * (M + M.T)


def cholesky_factor(M: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; SingularInformationError names the smallest pivot."""
    try:
        return linalg.cholesky(M, lower=True, check_finite=True)
    except linalg.LinAlgError:
        _, d, _ = linalg.ldl(M, lower=True)
        smallest_pivot = float(np.min(np.diag(d)))
        raise SingularInformationError(smallest_pivot)


def log_det_from_factor(L: np.ndarray) -> float:
    return float(2.0 * np.sum(np.log(np.diag(L))))


def log_det_objective(A: MeasurementMatrix, z: SelectionLike,
                      S: Optional[np.ndarray] = None) -> float:
    """log det(sum_i z_i a_i a_i^T + S) in nats via Cholesky."""
    return log_det_from_factor(cholesky_factor(information_matrix(A, z, S)))


def stack_selections(z1: SelectionVector, z2: SelectionVector) -> SelectionVector:
    """Concatenate node selections in partition order (A1 rows first)."""
    if z1.kind is not z2.kind:
        raise ValidationError(f"Cannot stack {z1.kind.value} and {z2.kind.value} selections")
    if z1.budget != z2.budget:
        raise ValidationError(f"Node budgets differ: {z1.budget} and {z2.budget}")
    return SelectionVector(np.concatenate([z1.entries, z2.entries]), z1.kind, z1.budget + z2.budget)


def relative_gap(upper: float, lower: float) -> float:
    """100 * |U - L| / |U| in percent."""
    if abs(upper) <= Constants.GAP_EPSILON:
        raise DegenerateReferenceError(
            f"Upper bound {upper!r} is too close to zero for a relative gap"
        )
    if math.isinf(lower):
        return math.inf
    return 100.0 * abs(upper - lower) / abs(upper)


@dataclass(frozen=True)
class BoundsReport:
    """Upper bound U, lower bound L, gap U - L and relative gap (percent)."""
    upper: float
    lower: float
    gap: float
    relative_gap_percent: Optional[float]

    @classmethod
    def from_bounds(cls, upper: float, lower: float) -> 'BoundsReport':
        try:
            rel = relative_gap(upper, lower)
        except DegenerateReferenceError:
            logger.debug(f"Relative gap undefined for U={upper!r}")
            rel = None
        return cls(upper=upper, lower=lower, gap=upper - lower, relative_gap_percent=rel)

    @property
    def lower_is_finite(self) -> bool:
        return math.isfinite(self.lower)


def enumerate_boolean_optimum(A: MeasurementMatrix, k: int) -> Tuple[float, SelectionVector]:
    """Best f_cen over all C(m, k) Boolean selections (small m only)."""
    if A.m > Constants.MAX_ENUMERATION_ROWS:
        raise ValidationError(f"Enumeration limited to m <= {Constants.MAX_ENUMERATION_ROWS}, got m={A.m}")
    if not 0 <= k <= A.m:
        raise ValidationError(f"Budget k={k} outside [0, {A.m}]")
    best_value = -math.inf
    best_subset: Tuple[int, ...] = tuple(range(k))
    for subset in itertools.combinations(range(A.m), k):
        rows = A.rows[list(subset)]
        sign, value = np.linalg.slogdet(rows.T @ rows)
        if sign > 0 and value > best_value:
            best_value, best_subset = float(value), subset
    entries = np.zeros(A.m)
    entries[list(best_subset)] = 1.0
    return best_value, SelectionVector.boolean(entries, k)
