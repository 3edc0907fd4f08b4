#!/usr/bin/env python3
"""
Monte-Carlo harness: correlated instances, trials over all strategies,
gap statistics, shared-vector sweeps and budget sweeps.

Trial t draws from a Philox stream keyed by (master_seed, t), so results do
not depend on execution order or on the number of worker processes.
"""

import csv
import logging
import math
import multiprocessing
import time
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import Constants, ExperimentConfig
from exceptions import NumericalError, TrialTimeoutError
from model import MeasurementMatrix, Partition
from strategies import (
    STATUS_OK, Strategy, StrategyOutcome, parse_strategy, select_centralized,
    select_naive, select_fdm, select_lpm, solve_node, NodeSelection
)
from utils import (
    OperationTimer, format_decimal, log_operation_progress, safe_file_writer
)
from validators import (
    validate_centralized_budget, validate_decentralized_budget, validate_shared_counts,
    validate_jobs
)

logger = logging.getLogger(__name__)

STATUS_DEGENERATE_REFERENCE = "degenerate_reference"
STATUS_TIMEOUT = "timeout"
STATUS_NUMERICAL_FAILURE = "numerical_failure"

TRIALS_CSV_COLUMNS = ("trial", "strategy", "N", "U_cen", "L", "gap_rel_percent", "status")
SUMMARY_CSV_COLUMNS = ("strategy", "N", "mean_gap", "std_gap", "trials_ok", "trials_failed")
BUDGET_CSV_COLUMNS = (
    "strategy", "k_s", "mean_lower", "std_lower", "mean_gap", "std_gap", "trials_ok", "trials_failed"
)

Seed = Union[int, Sequence[int]]


def make_rng(seed: Seed) -> np.random.Generator:
    """Counter-based Philox stream; normals use numpy's ziggurat sampler."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def generate_instance(cfg: ExperimentConfig, seed: Seed) -> Partition:
    """Standard normal halves with num_correlated_pairs cross-node row pairs.

    Each pair (i, j) is overwritten with
        a_1i = sqrt(1 - s^2) b + s w_i,   a_2j = sqrt(1 - s^2) b + s w_j
    for fresh standard normal b, w_i, w_j; rows are drawn without replacement.
    """
    rng = make_rng(seed)
    half = cfg.m // 2
    a1 = rng.standard_normal((half, cfg.n))
    a2 = rng.standard_normal((half, cfg.n))
    rows1 = rng.choice(half, size=cfg.num_correlated_pairs, replace=False)
    rows2 = rng.choice(half, size=cfg.num_correlated_pairs, replace=False)

    shared_weight = math.sqrt(1.0 - cfg.sigma_corr ** 2)
    for i, j in zip(rows1, rows2):
        b = rng.standard_normal(cfg.n)
        w_i = rng.standard_normal(cfg.n)
        w_j = rng.standard_normal(cfg.n)
        a1[i] = shared_weight * b + cfg.sigma_corr * w_i
        a2[j] = shared_weight * b + cfg.sigma_corr * w_j

    pairs = tuple((int(i), int(j)) for i, j in zip(rows1, rows2))
    return Partition(a1=MeasurementMatrix(a1), a2=MeasurementMatrix(a2), correlated_pairs=pairs)


@dataclass(frozen=True)
class TrialRecord:
    """One (trial, strategy, N) result row."""
    trial: int
    strategy: str
    N: int
    U_cen: float
    L: float
    gap_rel_percent: Optional[float]
    status: str
    k_s: int = 0
    relaxed_value: float = math.nan

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


@dataclass
class TrialResult:
    """All records of one trial plus its harness flags."""
    trial: int
    records: List[TrialRecord] = field(default_factory=list)
    rounding_anomaly: bool = False
    inclusion_violations: int = 0


@dataclass(frozen=True)
class StrategyAggregate:
    strategy: str
    N: int
    mean_gap: float
    std_gap: float
    mean_lower: float
    std_lower: float
    trials_ok: int
    trials_failed: int


@dataclass
class TrialStats:
    """Per-trial records and per-(strategy, N) aggregates."""
    records: List[TrialRecord]
    aggregates: List[StrategyAggregate]
    rounding_anomalies: int = 0
    inclusion_violations: int = 0
    trials: int = 0

    def aggregate_for(self, strategy: str, N: int) -> StrategyAggregate:
        for item in self.aggregates:
            if item.strategy == strategy and item.N == N:
                return item
        raise KeyError(f"No aggregate for strategy={strategy}, N={N}")


def _mean_std(values: List[float]) -> Tuple[float, float]:
    if not values:
        return math.nan, math.nan
    array = np.array(values, dtype=float)
    std = float(np.std(array, ddof=1)) if array.size > 1 else 0.0
    return float(np.mean(array)), std


def aggregate_records(records: Sequence[TrialRecord], strategies: Sequence[str],
                      n_values: Sequence[int]) -> List[StrategyAggregate]:
    """Mean/std of ok gaps and lower bounds per (strategy, N); failures counted."""
    aggregates = []
    for strategy in strategies:
        for N in n_values:
            selected = [r for r in records if r.strategy == strategy and r.N == N]
            ok = [r for r in selected if r.ok]
            mean_gap, std_gap = _mean_std([r.gap_rel_percent for r in ok])
            mean_lower, std_lower = _mean_std([r.L for r in ok])
            aggregates.append(StrategyAggregate(
                strategy=strategy,
                N=N,
                mean_gap=mean_gap,
                std_gap=std_gap,
                mean_lower=mean_lower,
                std_lower=std_lower,
                trials_ok=len(ok),
                trials_failed=len(selected) - len(ok),
            ))
    return aggregates


def _record_from_outcome(trial: int, strategy: str, N: int, k: int, upper: float,
                         outcome: StrategyOutcome) -> TrialRecord:
    status = outcome.status
    rel = outcome.bounds.relative_gap_percent
    if status == STATUS_OK and rel is None:
        status = STATUS_DEGENERATE_REFERENCE
    if status == STATUS_OK and outcome.bounds.lower > upper:
        logger.warning(
            f"Trial {trial}: {strategy} lower bound {outcome.bounds.lower:.10g} exceeds U_cen {upper:.10g}"
        )
    return TrialRecord(
        trial=trial, strategy=strategy, N=N, U_cen=upper, L=outcome.bounds.lower,
        gap_rel_percent=rel if status == STATUS_OK else None, status=status,
        k_s=k, relaxed_value=outcome.relaxed_value,
    )


def _failure_status(error: NumericalError) -> str:
    return STATUS_TIMEOUT if isinstance(error, TrialTimeoutError) else STATUS_NUMERICAL_FAILURE


def _failure_record(trial: int, strategy: str, N: int, k: int, upper: float, status: str) -> TrialRecord:
    return TrialRecord(trial=trial, strategy=strategy, N=N, U_cen=upper, L=math.nan,
                       gap_rel_percent=None, status=status, k_s=k)


def run_single_trial(cfg: ExperimentConfig, trial: int, n_values: Tuple[int, ...],
                     k: int) -> TrialResult:
    """Run every configured strategy on trial's instance.

    U_cen and node 1's naive solve are computed once and shared by all
    strategies and all N values.
    """
    params = replace(cfg.solver, deadline=time.monotonic() + cfg.trial_timeout_seconds)
    partition = generate_instance(cfg, (cfg.master_seed, trial))
    result = TrialResult(trial=trial)

    try:
        central = select_centralized(partition.stacked(), k, params)
    except NumericalError as e:
        logger.error(f"Trial {trial}: centralized solve failed: {e}")
        status = _failure_status(e)
        result.records = [
            _failure_record(trial, strategy, N, k, math.nan, status)
            for strategy in cfg.strategies for N in n_values
        ]
        return result
    upper = central.bounds.upper
    inclusion_tol = Constants.INCLUSION_TOL * max(1.0, abs(upper))

    node1: Optional[NodeSelection] = None
    naive: Optional[StrategyOutcome] = None

    def run(strategy: Strategy, N: int) -> StrategyOutcome:
        nonlocal node1, naive
        if strategy is Strategy.CENTRALIZED:
            return central
        if node1 is None:
            node1 = solve_node(partition.a1, k // 2, params)
        if strategy is Strategy.NAIVE:
            if naive is None:
                naive = select_naive(partition, k, params, upper=upper, node1=node1)
            return naive
        if strategy is Strategy.FDM:
            return select_fdm(partition, k, N, params, upper=upper, node1=node1)
        return select_lpm(partition, k, N, params, upper=upper, node1=node1)

    for name in cfg.strategies:
        strategy = parse_strategy(name)
        for N in n_values:
            try:
                outcome = run(strategy, N)
            except NumericalError as e:
                logger.error(f"Trial {trial}: {name} (N={N}) failed: {e}")
                result.records.append(_failure_record(trial, name, N, k, upper, _failure_status(e)))
                continue
            if outcome.relaxed_value > upper + inclusion_tol:
                result.inclusion_violations += 1
                logger.error(
                    f"Trial {trial}: {name} relaxed value {outcome.relaxed_value:.12g} "
                    f"exceeds U_cen {upper:.12g}"
                )
            result.records.append(_record_from_outcome(trial, name, N, k, upper, outcome))

    if naive is not None and central.bounds.lower_is_finite and naive.bounds.lower_is_finite:
        result.rounding_anomaly = naive.bounds.lower > central.bounds.lower
    return result


def _validate_budget(cfg: ExperimentConfig, k: int) -> None:
    if any(name != Strategy.CENTRALIZED.value for name in cfg.strategies):
        validate_decentralized_budget(k, cfg.m, cfg.n)
    else:
        validate_centralized_budget(k, cfg.m, cfg.n)


def run_trials(cfg: ExperimentConfig, jobs: int = 1, n_values: Optional[Sequence[int]] = None,
               k: Optional[int] = None) -> TrialStats:
    """Run cfg.trials independent trials, optionally over several N values."""
    validate_jobs(jobs)
    n_values = tuple(n_values) if n_values else (cfg.N,)
    k = cfg.k_s if k is None else k
    validate_shared_counts(n_values, cfg.n)
    _validate_budget(cfg, k)

    worker = partial(run_single_trial, cfg, n_values=n_values, k=k)
    results: List[TrialResult] = []
    with OperationTimer(f"{cfg.trials} trials (k_s={k}, N={list(n_values)}, jobs={jobs})"):
        if jobs == 1:
            iterator = map(worker, range(cfg.trials))
            results = _collect(iterator, cfg.trials)
        else:
            chunksize = max(1, cfg.trials // (jobs * 8))
            with multiprocessing.Pool(processes=jobs) as pool:
                results = _collect(pool.imap(worker, range(cfg.trials), chunksize=chunksize), cfg.trials)

    results.sort(key=lambda r: r.trial)
    records = [record for r in results for record in r.records]
    stats = TrialStats(
        records=records,
        aggregates=aggregate_records(records, cfg.strategies, n_values),
        rounding_anomalies=sum(1 for r in results if r.rounding_anomaly),
        inclusion_violations=sum(r.inclusion_violations for r in results),
        trials=cfg.trials,
    )
    failed = sum(1 for r in records if not r.ok)
    if failed:
        logger.warning(f"{failed} of {len(records)} records failed and are excluded from aggregates")
    if stats.inclusion_violations:
        logger.error(f"Feasible-set inclusion violated {stats.inclusion_violations} times")
    logger.info(f"Rounding anomalies (L_dec > L_cen): {stats.rounding_anomalies}/{cfg.trials}")
    return stats


def _collect(iterator, total: int) -> List[TrialResult]:
    results = []
    for index, result in enumerate(iterator, start=1):
        results.append(result)
        if index % Constants.PROGRESS_LOG_EVERY == 0 or index == total:
            log_operation_progress(index, total, "Trials")
    return results


def sweep_shared_vectors(cfg: ExperimentConfig, n_values: Sequence[int], jobs: int = 1) -> TrialStats:
    """Paired-seed trials for every N; centralized and naive rows repeat across N."""
    return run_trials(cfg, jobs=jobs, n_values=n_values)


@dataclass(frozen=True)
class BudgetSweepRow:
    strategy: str
    k_s: int
    mean_lower: float
    std_lower: float
    mean_gap: float
    std_gap: float
    trials_ok: int
    trials_failed: int


def sweep_budget(cfg: ExperimentConfig, k_values: Sequence[int], jobs: int = 1) -> List[BudgetSweepRow]:
    """Lower bounds and relative gaps versus total budget k_s at fixed N."""
    rows = []
    for k in k_values:
        stats = run_trials(cfg, jobs=jobs, k=k)
        for item in stats.aggregates:
            rows.append(BudgetSweepRow(
                strategy=item.strategy, k_s=k, mean_lower=item.mean_lower, std_lower=item.std_lower,
                mean_gap=item.mean_gap, std_gap=item.std_gap,
                trials_ok=item.trials_ok, trials_failed=item.trials_failed,
            ))
    return rows


def _cell(value: Optional[float], digits: int = 17) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return format_decimal(value, digits)


def write_trials_csv(path: str, records: Sequence[TrialRecord]) -> None:
    """Per-trial CSV: trial,strategy,N,U_cen,L,gap_rel_percent,status."""
    with safe_file_writer(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(TRIALS_CSV_COLUMNS)
        for r in records:
            writer.writerow([r.trial, r.strategy, r.N, _cell(r.U_cen), _cell(r.L),
                             _cell(r.gap_rel_percent), r.status])


def read_trials_csv(path: str) -> List[TrialRecord]:
    """Parse a per-trial CSV written by write_trials_csv."""
    def number(text: str) -> float:
        return float(text) if text else math.nan

    records = []
    with open(path, 'r', newline='') as f:
        for row in csv.DictReader(f):
            records.append(TrialRecord(
                trial=int(row["trial"]),
                strategy=row["strategy"],
                N=int(row["N"]),
                U_cen=number(row["U_cen"]),
                L=number(row["L"]),
                gap_rel_percent=float(row["gap_rel_percent"]) if row["gap_rel_percent"] else None,
                status=row["status"],
            ))
    return records


def write_summary_csv(path: str, aggregates: Sequence[StrategyAggregate]) -> None:
    """Summary CSV: strategy,N,mean_gap,std_gap,trials_ok,trials_failed."""
    digits = Constants.CSV_SIGNIFICANT_DIGITS
    with safe_file_writer(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(SUMMARY_CSV_COLUMNS)
        for item in aggregates:
            writer.writerow([item.strategy, item.N, _cell(item.mean_gap, digits),
                             _cell(item.std_gap, digits), item.trials_ok, item.trials_failed])


def read_summary_csv(path: str) -> List[Dict[str, str]]:
    with open(path, 'r', newline='') as f:
        return list(csv.DictReader(f))


def write_budget_csv(path: str, rows: Sequence[BudgetSweepRow]) -> None:
    """Budget sweep CSV: strategy,k_s,mean_lower,std_lower,mean_gap,std_gap,trials_ok,trials_failed."""
    digits = Constants.CSV_SIGNIFICANT_DIGITS
    with safe_file_writer(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(BUDGET_CSV_COLUMNS)
        for row in rows:
            writer.writerow([row.strategy, row.k_s, _cell(row.mean_lower, digits), _cell(row.std_lower, digits),
                             _cell(row.mean_gap, digits), _cell(row.std_gap, digits),
                             row.trials_ok, row.trials_failed])
