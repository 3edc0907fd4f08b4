#!/usr/bin/env python3
"""
Mode handlers for the sensor selection CLI tool.

Provides one run_<subcommand>_mode(args, env_config) entry point per
subcommand used by main.py.
"""

import json
import logging
import os
import sys
from typing import Any, Dict, Optional

import numpy as np

from config import (
    Constants, EnvironmentConfig, ExperimentConfig, SolverParams, build_experiment_config, load_config_data
)
from exceptions import DimensionMismatchError, ValidationError
from exchange import run_session, write_message
from experiments import (
    generate_instance, run_trials, sweep_shared_vectors, sweep_budget,
    write_trials_csv, write_summary_csv, write_budget_csv
)
from model import MeasurementMatrix, Partition
from strategies import Strategy, parse_strategy, select_centralized, select_naive, select_fdm, select_lpm
from utils import (
    parse_comma_separated_ints, read_matrix_csv, write_matrix_csv, safe_file_writer, OperationTimer
)
from validators import (
    validate_input_file, validate_output_file, validate_output_directory, validate_jobs,
    validate_shared_count, validate_shared_counts
)

logger = logging.getLogger(__name__)

EXPERIMENT_FLAGS = {
    'm': 'm',
    'n': 'n',
    'k': 'k_s',
    'N': 'N',
    'sigma_corr': 'sigma_corr',
    'pairs': 'num_correlated_pairs',
    'trials': 'trials',
    'seed': 'master_seed',
}

SOLVER_FLAGS = ('kappa0', 'kappa_shrink', 'newton_tol', 'max_inner', 'max_outer')


def _experiment_config(args, env_config: EnvironmentConfig) -> ExperimentConfig:
    """Merge --config, experiment flags and the environment seed."""
    overrides = {key: getattr(args, flag, None) for flag, key in EXPERIMENT_FLAGS.items()}
    solver_overrides = {name: getattr(args, name, None) for name in SOLVER_FLAGS}
    config_path = getattr(args, 'config', None)
    if config_path:
        validate_input_file(config_path)
    return build_experiment_config(config_path, overrides, solver_overrides, env_config)


def _solver_params(args) -> SolverParams:
    """Solver section of --config with solver flags on top."""
    data: Dict[str, Any] = {}
    if args.config:
        validate_input_file(args.config)
        data = dict(load_config_data(args.config).get('solver') or {})
    data.update({name: getattr(args, name) for name in SOLVER_FLAGS if getattr(args, name, None) is not None})
    return SolverParams.from_dict(data)


def _log_effective_config(name: str, config: Dict[str, Any]) -> None:
    logger.info(f"Effective {name} configuration: {json.dumps(config, sort_keys=True)}")


def _dump_json(data: Dict[str, Any]) -> str:
    # non-finite values are already mapped to null by to_dict()
    return json.dumps(data, indent=2, allow_nan=False)


def _emit(data: Dict[str, Any], out_path: Optional[str]) -> None:
    text = _dump_json(data)
    sys.stdout.write(text + "\n")
    sys.stdout.flush()
    if out_path:
        with safe_file_writer(out_path) as f:
            f.write(text + "\n")
        logger.info(f"Result written to {out_path}")


def _check_matrix_sources(args) -> None:
    if args.matrix and (args.a1 or args.a2):
        raise ValidationError("Use either --matrix or --a1/--a2, not both")
    if not args.matrix and not (args.a1 and args.a2):
        raise ValidationError("Either --matrix or both --a1 and --a2 are required")
    for path in (args.matrix, args.a1, args.a2):
        if path:
            validate_input_file(path)


def _load_matrix(args) -> MeasurementMatrix:
    """Whole matrix for the centralized problem: --matrix as is, or A1 over A2."""
    _check_matrix_sources(args)
    if args.matrix:
        return MeasurementMatrix(read_matrix_csv(args.matrix))
    a1, a2 = read_matrix_csv(args.a1), read_matrix_csv(args.a2)
    if a1.shape[1] != a2.shape[1]:
        raise DimensionMismatchError(f"{args.a1} has {a1.shape[1]} columns, {args.a2} has {a2.shape[1]}")
    return MeasurementMatrix(np.vstack([a1, a2]))


def _load_partition(args) -> Partition:
    """Partition from --matrix (split in halves) or from --a1/--a2."""
    _check_matrix_sources(args)
    if args.matrix:
        return Partition.split(MeasurementMatrix(read_matrix_csv(args.matrix)))
    return Partition(
        a1=MeasurementMatrix(read_matrix_csv(args.a1)),
        a2=MeasurementMatrix(read_matrix_csv(args.a2)),
    )


def _shared_count(args, n: int) -> int:
    N = args.N if args.N is not None else min(Constants.DEFAULT_SHARED_VECTORS, n)
    validate_shared_count(N, n)
    return N


def run_gen_mode(args, env_config: EnvironmentConfig) -> None:
    """Write one generated instance as A1.csv and A2.csv."""
    validate_output_directory(args.out_dir)
    cfg = _experiment_config(args, env_config)
    _log_effective_config("gen", {**cfg.to_dict(), 'trial': args.trial, 'out_dir': args.out_dir})

    partition = generate_instance(cfg, (cfg.master_seed, args.trial))
    a1_path = os.path.join(args.out_dir, Constants.A1_FILE)
    a2_path = os.path.join(args.out_dir, Constants.A2_FILE)
    write_matrix_csv(a1_path, partition.a1.rows)
    write_matrix_csv(a2_path, partition.a2.rows)
    logger.info(
        f"Wrote {partition.a1.m}+{partition.a2.m} x {partition.n} instance "
        f"({len(partition.correlated_pairs)} correlated pairs) to {a1_path} and {a2_path}"
    )


def run_solve_mode(args, env_config: EnvironmentConfig) -> None:
    """Run one strategy on a matrix from disk and print its outcome as JSON."""
    strategy = parse_strategy(args.strategy)
    if args.out:
        validate_output_file(args.out)
    if strategy is Strategy.CENTRALIZED:
        A, N = _load_matrix(args), 0
        m, n = A.m, A.n
    else:
        partition = _load_partition(args)
        m, n = partition.m, partition.n
        N = 0 if strategy is Strategy.NAIVE else _shared_count(args, n)
    params = _solver_params(args)
    _log_effective_config("solve", {
        'strategy': strategy.value, 'k': args.k, 'N': N, 'm': m, 'n': n,
        'solver': params.to_dict(),
    })

    with OperationTimer(f"{strategy.value} selection"):
        if strategy is Strategy.CENTRALIZED:
            outcome = select_centralized(A, args.k, params)
        elif strategy is Strategy.NAIVE:
            outcome = select_naive(partition, args.k, params)
        elif strategy is Strategy.FDM:
            outcome = select_fdm(partition, args.k, N, params)
        else:
            outcome = select_lpm(partition, args.k, N, params)

    logger.info(
        f"{strategy.value}: U={outcome.bounds.upper:.10g}, L={outcome.bounds.lower:.10g}, "
        f"status={outcome.status}"
    )
    _emit(outcome.to_dict(), args.out)


def run_session_mode(args, env_config: EnvironmentConfig) -> None:
    """Run a two-node session; optionally keep the encoded shared vector message."""
    strategy = parse_strategy(args.strategy)
    for path in (args.out, args.message_out):
        if path:
            validate_output_file(path)
    partition = _load_partition(args)
    params = _solver_params(args)
    N = 0 if strategy is Strategy.NAIVE else _shared_count(args, partition.n)
    _log_effective_config("session", {
        'strategy': strategy.value, 'k': args.k, 'N': N, 'm': partition.m, 'n': partition.n,
        'solver': params.to_dict(),
    })

    with OperationTimer(f"{strategy.value} session"):
        result = run_session(partition, args.k, N, strategy, params)

    if args.message_out:
        if result.transcript.messages:
            write_message(args.message_out, result.transcript.messages[0])
            logger.info(f"Shared vector message written to {args.message_out}")
        else:
            logger.warning(f"No message was exchanged under {strategy.value}; {args.message_out} not written")
    _emit(result.to_dict(), args.out)


def run_experiment_mode(args, env_config: EnvironmentConfig) -> None:
    """Monte-Carlo trials at a single N with per-trial and summary CSVs."""
    validate_jobs(args.jobs)
    validate_output_file(args.out)
    validate_output_file(args.summary)
    cfg = _experiment_config(args, env_config)
    _log_effective_config("experiment", {**cfg.to_dict(), 'jobs': args.jobs})

    stats = run_trials(cfg, jobs=args.jobs)
    write_trials_csv(args.out, stats.records)
    write_summary_csv(args.summary, stats.aggregates)
    for item in stats.aggregates:
        logger.info(
            f"{item.strategy} (N={item.N}): mean gap {item.mean_gap:.4f}% "
            f"(std {item.std_gap:.4f}, ok {item.trials_ok}, failed {item.trials_failed})"
        )
    logger.info(f"Experiment results written to {args.out} and {args.summary}")


def run_sweep_n_mode(args, env_config: EnvironmentConfig) -> None:
    """Paired-seed trials over a list of shared vector counts."""
    validate_jobs(args.jobs)
    validate_output_file(args.summary)
    if args.out:
        validate_output_file(args.out)
    cfg = _experiment_config(args, env_config)
    n_values = parse_comma_separated_ints(args.n_list) or list(cfg.n_sweep or ())
    if not n_values:
        raise ValidationError("sweep-n needs --n-list or n_sweep in the config file")
    validate_shared_counts(n_values, cfg.n)
    _log_effective_config("sweep-n", {**cfg.to_dict(), 'n_sweep': n_values, 'jobs': args.jobs})

    stats = sweep_shared_vectors(cfg, n_values, jobs=args.jobs)
    if args.out:
        write_trials_csv(args.out, stats.records)
    write_summary_csv(args.summary, stats.aggregates)
    logger.info(f"Shared vector sweep over N={n_values} written to {args.summary}")


def run_sweep_k_mode(args, env_config: EnvironmentConfig) -> None:
    """Paired-seed trials over a list of total budgets k_s."""
    validate_jobs(args.jobs)
    validate_output_file(args.summary)
    cfg = _experiment_config(args, env_config)
    k_values = parse_comma_separated_ints(args.k_list) or list(cfg.k_values or ())
    if not k_values:
        raise ValidationError("sweep-k needs --k-list or k_values in the config file")
    _log_effective_config("sweep-k", {**cfg.to_dict(), 'k_values': k_values, 'jobs': args.jobs})

    rows = sweep_budget(cfg, k_values, jobs=args.jobs)
    write_budget_csv(args.summary, rows)
    logger.info(f"Budget sweep over k_s={k_values} written to {args.summary}")
