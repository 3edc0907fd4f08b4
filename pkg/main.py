#!/usr/bin/env python3
"""
Sensor Selection CLI Tool

Centralized and two-node decentralized sensor selection by log-det
maximization, plus the Monte-Carlo experiments that compare the strategies.

Exit codes: 0 success, 1 usage/validation/configuration/file errors,
2 numerical failures.
"""

import argparse
import logging
import os
import sys
import time
from typing import List, Optional

from config import Constants, get_environment_config
from exceptions import (
    ValidationError, ConfigurationError, NumericalError, InformationBudgetError
)
from logging_config import setup_logging
from modes import (
    run_gen_mode, run_solve_mode, run_session_mode, run_experiment_mode,
    run_sweep_n_mode, run_sweep_k_mode
)

logger = setup_logging()


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(Constants.EXIT_FAILURE, f"{self.prog}: error: {message}\n")


def _add_solver_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('barrier solver')
    group.add_argument('--kappa0', type=float, help=f'Initial barrier weight (default: {Constants.KAPPA0})')
    group.add_argument('--kappa-shrink', type=float,
                       help=f'Barrier weight reduction factor (default: {Constants.KAPPA_SHRINK})')
    group.add_argument('--newton-tol', type=float,
                       help=f'Newton decrement tolerance (default: {Constants.NEWTON_TOL})')
    group.add_argument('--max-inner', type=int,
                       help=f'Newton steps per barrier stage (default: {Constants.MAX_INNER_ITERATIONS})')
    group.add_argument('--max-outer', type=int,
                       help=f'Barrier stages (default: {Constants.MAX_OUTER_ITERATIONS})')


def _add_instance_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', help='JSON experiment config; flags override its values')
    parser.add_argument('--m', type=int, help=f'Total number of sensors (default: {Constants.DEFAULT_M})')
    parser.add_argument('--n', type=int, help=f'Number of unknown parameters (default: {Constants.DEFAULT_N})')
    parser.add_argument('--sigma-corr', type=float,
                        help=f'Cross-node correlation strength in [0, 1] (default: {Constants.DEFAULT_SIGMA_CORR})')
    parser.add_argument('--pairs', type=int,
                        help=f'Correlated row pairs (default: min({Constants.DEFAULT_CORRELATED_PAIRS}, m/2))')
    parser.add_argument('--seed', type=int,
                        help=f'Master seed (default: ${Constants.SEED_ENV_VAR} or {Constants.DEFAULT_MASTER_SEED})')


def _add_trial_arguments(parser: argparse.ArgumentParser) -> None:
    _add_instance_arguments(parser)
    parser.add_argument('--k', type=int, help=f'Total sensor budget k_s (default: {Constants.DEFAULT_K})')
    parser.add_argument('--N', type=int, help=f'Shared vectors (default: {Constants.DEFAULT_SHARED_VECTORS})')
    parser.add_argument('--trials', type=int, help=f'Monte-Carlo trials (default: {Constants.DEFAULT_TRIALS})')
    parser.add_argument('--jobs', type=int, default=os.cpu_count() or 1,
                        help='Parallel worker processes (default: available cores)')
    _add_solver_arguments(parser)


def _add_matrix_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--matrix', help='CSV with all m rows; the top half goes to node 1')
    parser.add_argument('--a1', help='CSV with the rows of node 1')
    parser.add_argument('--a2', help='CSV with the rows of node 2')
    parser.add_argument('--k', type=int, required=True, help='Total sensor budget')
    parser.add_argument('--N', type=int,
                        help=f'Shared vectors for fdm/lpm (default: min({Constants.DEFAULT_SHARED_VECTORS}, n))')
    parser.add_argument('--config', help='JSON config; only its solver section is used')
    parser.add_argument('--out', help='Also write the JSON result to this file')
    _add_solver_arguments(parser)


def create_argument_parser() -> argparse.ArgumentParser:
    """Create and configure argument parser."""
    parser = CliArgumentParser(
        description="Centralized and decentralized sensor selection",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument('--verbose', action='store_true', help='Enable debug logging')

    subparsers = parser.add_subparsers(dest='command', required=True, parser_class=CliArgumentParser)

    gen = subparsers.add_parser('gen', help='Generate an instance as A1.csv and A2.csv')
    _add_instance_arguments(gen)
    gen.add_argument('--trial', type=int, default=0, help='Trial index of the instance stream (default: 0)')
    gen.add_argument('--out-dir', default=Constants.DEFAULT_OUTPUT_DIR,
                     help=f'Existing writable directory for the CSVs (default: {Constants.DEFAULT_OUTPUT_DIR})')

    solve = subparsers.add_parser('solve', help='Run one strategy and print the outcome as JSON')
    _add_matrix_arguments(solve)
    solve.add_argument('--strategy', choices=Constants.STRATEGY_NAMES, required=True)

    session = subparsers.add_parser('session', help='Run a two-node session through the message codec')
    _add_matrix_arguments(session)
    session.add_argument('--strategy', choices=Constants.STRATEGY_NAMES[1:], required=True)
    session.add_argument('--message-out', help='Write the encoded shared vector message to this file')

    experiment = subparsers.add_parser('experiment', help='Monte-Carlo trials over all strategies')
    _add_trial_arguments(experiment)
    experiment.add_argument('--out', default=Constants.DEFAULT_TRIALS_FILE,
                            help=f'Per-trial CSV (default: {Constants.DEFAULT_TRIALS_FILE})')
    experiment.add_argument('--summary', default=Constants.DEFAULT_SUMMARY_FILE,
                            help=f'Summary CSV (default: {Constants.DEFAULT_SUMMARY_FILE})')

    sweep_n = subparsers.add_parser('sweep-n', help='Paired-seed sweep over the number of shared vectors')
    _add_trial_arguments(sweep_n)
    sweep_n.add_argument('--n-list', help='Comma-separated N values (default: n_sweep from --config)')
    sweep_n.add_argument('--out', help='Optional per-trial CSV')
    sweep_n.add_argument('--summary', default=Constants.DEFAULT_SUMMARY_FILE,
                         help=f'Summary CSV (default: {Constants.DEFAULT_SUMMARY_FILE})')

    sweep_k = subparsers.add_parser('sweep-k', help='Paired-seed sweep over the total budget k_s')
    _add_trial_arguments(sweep_k)
    sweep_k.add_argument('--k-list', help='Comma-separated budgets (default: k_values from --config)')
    sweep_k.add_argument('--summary', default=Constants.DEFAULT_SUMMARY_FILE,
                         help=f'Budget sweep CSV (default: {Constants.DEFAULT_SUMMARY_FILE})')

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function; returns the process exit code."""
    start_time = time.time()

    try:
        parser = create_argument_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return int(e.code or 0)

        if args.verbose:
            setup_logging(logging.DEBUG)

        env_config = get_environment_config()

        mode_handlers = {
            'gen': run_gen_mode,
            'solve': run_solve_mode,
            'session': run_session_mode,
            'experiment': run_experiment_mode,
            'sweep-n': run_sweep_n_mode,
            'sweep-k': run_sweep_k_mode,
        }

        handler = mode_handlers[args.command]
        handler(args, env_config)
        return Constants.EXIT_OK

    except ValidationError as e:
        logger.error(f"Validation error: {e}")
        return Constants.EXIT_FAILURE
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        return Constants.EXIT_FAILURE
    except NumericalError as e:
        logger.error(f"Numerical error: {e}")
        return Constants.EXIT_NUMERICAL_FAILURE
    except InformationBudgetError as e:
        logger.error(f"Information budget error: {e}")
        return Constants.EXIT_FAILURE
    except OSError as e:
        logger.error(f"File error: {e}")
        return Constants.EXIT_FAILURE
    except KeyboardInterrupt:
        logger.info("Operation cancelled by user")
        return Constants.EXIT_FAILURE
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        import traceback
        logger.debug(f"Traceback: {traceback.format_exc()}")
        return Constants.EXIT_FAILURE
    finally:
        elapsed = time.time() - start_time
        logger.info(f"Program completed in {elapsed:.2f}s")


if __name__ == "__main__":
    sys.exit(main())
