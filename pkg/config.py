#!/usr/bin/env python3
"""
Centralized configuration and validation for the sensor selection tool.
"""

import os
import json
import logging
from dataclasses import dataclass, field, fields, asdict
from typing import Any, Dict, Optional, Tuple

from exceptions import ConfigurationError

logger = logging.getLogger(__name__)


class Constants:
    """Application constants."""
    # Barrier solver defaults
    KAPPA0 = 1.0
    KAPPA_SHRINK = 10.0
    STOP_TOL = 1e-6
    NEWTON_TOL = 1e-9
    KKT_TOL = 1e-6
    MAX_INNER_ITERATIONS = 50
    MAX_OUTER_ITERATIONS = 12
    LINE_SEARCH_ALPHA = 0.01
    LINE_SEARCH_BETA = 0.5
    BOUNDARY_FRACTION = 0.99
    MIN_STEP = 1e-14

    # Numerical tolerances
    GAP_EPSILON = 1e-9
    RELAXED_SUM_TOL = 1e-8
    INCLUSION_TOL = 1e-6
    MAX_ENUMERATION_ROWS = 20

    # Experiment defaults (varying-budget study uses k_s = 40..60)
    DEFAULT_M = 100
    DEFAULT_N = 40
    DEFAULT_K = 40
    DEFAULT_SHARED_VECTORS = 5
    DEFAULT_SIGMA_CORR = 0.1
    DEFAULT_CORRELATED_PAIRS = 15
    DEFAULT_TRIALS = 10000
    DEFAULT_MASTER_SEED = 2024
    DEFAULT_TRIAL_TIMEOUT_SECONDS = 60.0
    STRATEGY_NAMES = ("centralized", "naive", "fdm", "lpm")

    # Output
    CSV_SIGNIFICANT_DIGITS = 10
    PROGRESS_LOG_EVERY = 50
    DEFAULT_TRIALS_FILE = 'results.csv'
    DEFAULT_SUMMARY_FILE = 'summary.csv'
    DEFAULT_OUTPUT_DIR = '.'
    A1_FILE = 'A1.csv'
    A2_FILE = 'A2.csv'

    # Environment
    SEED_ENV_VAR = 'SENSOR_SELECTION_SEED'

    # Exit codes
    EXIT_OK = 0
    EXIT_FAILURE = 1
    EXIT_NUMERICAL_FAILURE = 2


@dataclass(frozen=True)
class SolverParams:
    """Barrier method parameters; defaults follow Constants."""
    kappa0: float = Constants.KAPPA0
    kappa_shrink: float = Constants.KAPPA_SHRINK
    stop_tol: float = Constants.STOP_TOL
    newton_tol: float = Constants.NEWTON_TOL
    kkt_tol: float = Constants.KKT_TOL
    max_inner: int = Constants.MAX_INNER_ITERATIONS
    max_outer: int = Constants.MAX_OUTER_ITERATIONS
    alpha: float = Constants.LINE_SEARCH_ALPHA
    beta: float = Constants.LINE_SEARCH_BETA
    boundary_fraction: float = Constants.BOUNDARY_FRACTION
    # absolute time.monotonic() value; set per trial by the harness
    deadline: Optional[float] = None

    def __post_init__(self):
        if self.kappa0 <= 0:
            raise ConfigurationError("kappa0 must be positive")
        if self.kappa_shrink <= 1:
            raise ConfigurationError("kappa_shrink must be greater than 1")
        if self.max_inner < 1 or self.max_outer < 1:
            raise ConfigurationError("Iteration caps must be at least 1")
        if not 0 < self.alpha < 0.5:
            raise ConfigurationError("Line search alpha must be in (0, 0.5)")
        if not 0 < self.beta < 1:
            raise ConfigurationError("Line search beta must be in (0, 1)")
        if not 0 < self.boundary_fraction < 1:
            raise ConfigurationError("boundary_fraction must be in (0, 1)")
        for name in ('stop_tol', 'newton_tol', 'kkt_tol'):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SolverParams':
        """Build solver parameters from a config mapping."""
        allowed = {f.name for f in fields(cls)} - {'deadline'}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigurationError(f"Unknown solver keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigurationError(f"Invalid solver configuration: {e}")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop('deadline')
        return data


@dataclass(frozen=True)
class ExperimentConfig:
    """Monte-Carlo experiment configuration; keys match the JSON config file."""
    m: int = Constants.DEFAULT_M
    n: int = Constants.DEFAULT_N
    k_s: int = Constants.DEFAULT_K
    N: int = Constants.DEFAULT_SHARED_VECTORS
    sigma_corr: float = Constants.DEFAULT_SIGMA_CORR
    num_correlated_pairs: int = Constants.DEFAULT_CORRELATED_PAIRS
    trials: int = Constants.DEFAULT_TRIALS
    master_seed: int = Constants.DEFAULT_MASTER_SEED
    strategies: Tuple[str, ...] = Constants.STRATEGY_NAMES
    n_sweep: Optional[Tuple[int, ...]] = None
    k_values: Optional[Tuple[int, ...]] = None
    trial_timeout_seconds: float = Constants.DEFAULT_TRIAL_TIMEOUT_SECONDS
    solver: SolverParams = field(default_factory=SolverParams)

    def __post_init__(self):
        # JSON gives lists; keep the dataclass hashable and immutable
        object.__setattr__(self, 'strategies', tuple(self.strategies))
        if self.n_sweep is not None:
            object.__setattr__(self, 'n_sweep', tuple(int(v) for v in self.n_sweep))
        if self.k_values is not None:
            object.__setattr__(self, 'k_values', tuple(int(v) for v in self.k_values))

        if self.n < 1:
            raise ConfigurationError("n must be at least 1")
        if self.m < 2 or self.m % 2:
            raise ConfigurationError(f"m must be a positive even number, got {self.m}")
        if self.m // 2 < self.n:
            raise ConfigurationError(f"Each half needs at least n={self.n} rows, got m/2={self.m // 2}")
        if not 0.0 <= self.sigma_corr <= 1.0:
            raise ConfigurationError("sigma_corr must be in [0, 1]")
        if not 0 <= self.num_correlated_pairs <= self.m // 2:
            raise ConfigurationError(
                f"num_correlated_pairs must be in [0, m/2={self.m // 2}], got {self.num_correlated_pairs}"
            )
        if self.trials < 1:
            raise ConfigurationError("trials must be at least 1")
        if self.master_seed < 0:
            raise ConfigurationError("master_seed must be non-negative")
        if self.N < 0:
            raise ConfigurationError("N must be non-negative")
        if self.trial_timeout_seconds <= 0:
            raise ConfigurationError("trial_timeout_seconds must be positive")
        unknown = set(self.strategies) - set(Constants.STRATEGY_NAMES)
        if unknown or not self.strategies:
            raise ConfigurationError(
                f"strategies must be a non-empty subset of {list(Constants.STRATEGY_NAMES)}"
            )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        """Create configuration from a mapping with snake_case keys."""
        allowed = {f.name for f in fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {sorted(unknown)}")
        values = dict(data)
        if 'solver' in values:
            values['solver'] = SolverParams.from_dict(values['solver'] or {})
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigurationError(f"Invalid experiment configuration: {e}")

    @classmethod
    def from_json_file(cls, path: str) -> 'ExperimentConfig':
        """Load configuration from a JSON file."""
        return cls.from_dict(load_config_data(path))

    def to_dict(self) -> Dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data['strategies'] = list(self.strategies)
        data['n_sweep'] = list(self.n_sweep) if self.n_sweep is not None else None
        data['k_values'] = list(self.k_values) if self.k_values is not None else None
        data['solver'] = self.solver.to_dict()
        return data


@dataclass
class EnvironmentConfig:
    """Environment configuration validation."""
    default_seed: Optional[int] = None

    @classmethod
    def from_env(cls) -> 'EnvironmentConfig':
        """Create configuration from environment variables."""
        raw = os.getenv(Constants.SEED_ENV_VAR)
        if raw is None or raw.strip() == '':
            return cls()
        try:
            return cls(default_seed=int(raw))
        except ValueError:
            raise ConfigurationError(
                f"{Constants.SEED_ENV_VAR} must be an integer, got {raw!r}"
            )


def get_environment_config() -> EnvironmentConfig:
    """Get environment configuration with proper error handling."""
    try:
        return EnvironmentConfig.from_env()
    except ConfigurationError as e:
        logger.error(f"Environment configuration error: {e}")
        raise


def load_config_data(path: str) -> Dict[str, Any]:
    """Read a JSON config file into a plain mapping."""
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config file {path} must contain a JSON object")
    return data


def build_experiment_config(config_path: Optional[str] = None,
                            overrides: Optional[Dict[str, Any]] = None,
                            solver_overrides: Optional[Dict[str, Any]] = None,
                            env: Optional[EnvironmentConfig] = None) -> ExperimentConfig:
    """Effective configuration: flags > config file > environment seed > defaults.

    None-valued overrides are ignored. When neither the file nor the flags set
    num_correlated_pairs it defaults to min(15, m/2) so that small instances
    stay valid.
    """
    data = load_config_data(config_path) if config_path else {}
    if 'master_seed' not in data and env is not None and env.default_seed is not None:
        data['master_seed'] = env.default_seed

    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value

    solver = dict(data.get('solver') or {})
    for key, value in (solver_overrides or {}).items():
        if value is not None:
            solver[key] = value
    if solver:
        data['solver'] = solver

    if 'num_correlated_pairs' not in data and 'm' in data:
        try:
            data['num_correlated_pairs'] = min(Constants.DEFAULT_CORRELATED_PAIRS, int(data['m']) // 2)
        except (TypeError, ValueError):
            raise ConfigurationError(f"m must be an integer, got {data['m']!r}")

    return ExperimentConfig.from_dict(data)
