#!/usr/bin/env python3
"""
Validation functions for the sensor selection CLI tool
"""

import os
import logging
from typing import Iterable

from exceptions import ValidationError

logger = logging.getLogger(__name__)


def validate_centralized_budget(k: int, m: int, n: int) -> None:
    """Validate budget k for the centralized problem (n <= k < m)"""
    if k < n:
        raise ValidationError(f"Budget k={k} must be at least n={n}")
    if k >= m:
        raise ValidationError(f"Budget k={k} must be smaller than m={m}")


def validate_decentralized_budget(k: int, m: int, n: int) -> None:
    """Validate budget k for a two-node split (m and k even, n <= k < m)

    Each node may pick fewer than n sensors; only the stacked selection
    has to reach rank n.
    """
    if m % 2:
        raise ValidationError(f"Sensor count m={m} must be even for a two-node split")
    if k % 2:
        raise ValidationError(f"Budget k={k} must be even for a two-node split")
    validate_centralized_budget(k, m, n)


def validate_shared_count(N: int, n: int) -> None:
    """Validate number of shared vectors"""
    if N < 0:
        raise ValidationError(f"Number of shared vectors N={N} cannot be negative")
    if N > n:
        raise ValidationError(f"Number of shared vectors N={N} cannot exceed n={n}")


def validate_shared_counts(values: Iterable[int], n: int) -> None:
    """Validate a list of shared vector counts"""
    values = list(values)
    if not values:
        raise ValidationError("List of shared vector counts cannot be empty")
    for N in values:
        validate_shared_count(N, n)


def validate_jobs(jobs: int) -> None:
    """Validate parallel job count"""
    if jobs < 1:
        raise ValidationError("Number of jobs must be at least 1")


def validate_input_file(path: str) -> None:
    """Validate that an input file exists and is readable"""
    if not path:
        raise ValidationError("Input file path cannot be empty")
    if not os.path.isfile(path):
        raise ValidationError(f"Input file {path} does not exist")
    if not os.access(path, os.R_OK):
        raise ValidationError(f"Input file {path} is not readable")


def validate_output_file(path: str) -> None:
    """Validate output file and check if it can be written to"""
    if not path:
        raise ValidationError("Output file path cannot be empty")

    file_dir = os.path.dirname(path) or '.'
    if not os.path.isdir(file_dir):
        raise ValidationError(f"Directory {file_dir} does not exist")
    if not os.access(file_dir, os.W_OK):
        raise ValidationError(f"Directory {file_dir} is not writable")

    if os.path.exists(path):
        if not os.access(path, os.W_OK):
            raise ValidationError(f"Output file {path} is not writable")
        logger.warning(f"Output file {path} already exists and will be overwritten")


def validate_output_directory(output_dir: str) -> None:
    """Validate output directory exists and is writable"""
    if not output_dir:
        raise ValidationError("Output directory cannot be empty")

    if not os.path.isdir(output_dir):
        raise ValidationError(f"Output directory {output_dir} is not a directory")

    if not os.access(output_dir, os.W_OK):
        raise ValidationError(f"Output directory {output_dir} is not writable")
