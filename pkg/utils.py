#!/usr/bin/env python3
"""
Common utility functions: argument parsing helpers, file I/O and timing.
"""

import csv
import time
import logging
from typing import List, Iterator, TextIO, Optional
from contextlib import contextmanager

import numpy as np

from exceptions import ValidationError

logger = logging.getLogger(__name__)


def parse_comma_separated_ints(values_string: Optional[str]) -> List[int]:
    """Parse comma-separated integers into a clean list."""
    if not values_string:
        return []
    try:
        return [int(item.strip()) for item in values_string.split(',') if item.strip()]
    except ValueError:
        raise ValidationError(f"Expected comma-separated integers, got {values_string!r}")


@contextmanager
def safe_file_writer(file_path: str) -> Iterator[TextIO]:
    """Context manager for safe file writing with proper cleanup."""
    f = None
    try:
        f = open(file_path, 'w', newline='')
        yield f
    except Exception as e:
        logger.error(f"Failed to write to file {file_path}: {e}")
        raise
    finally:
        if f is not None:
            try:
                f.close()
            except Exception:
                pass


def read_matrix_csv(path: str) -> np.ndarray:
    """Read a header-less CSV with one comma-separated row per sensor."""
    rows = []
    try:
        with open(path, 'r', newline='') as f:
            for line_number, row in enumerate(csv.reader(f), start=1):
                if not row or all(not cell.strip() for cell in row):
                    continue
                try:
                    rows.append([float(cell) for cell in row])
                except ValueError:
                    raise ValidationError(f"Malformed CSV {path}: non-numeric value on line {line_number}")
    except OSError as e:
        raise ValidationError(f"Cannot read matrix file {path}: {e}")

    if not rows:
        raise ValidationError(f"Malformed CSV {path}: no rows")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ValidationError(f"Malformed CSV {path}: rows have different lengths")
    matrix = np.array(rows, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise ValidationError(f"Malformed CSV {path}: non-finite values")
    return matrix


def format_decimal(value: float, digits: int = 17) -> str:
    """Render a float with the given number of significant digits."""
    return f"{value:.{digits}g}"


def write_matrix_csv(path: str, matrix: np.ndarray) -> None:
    """Write a matrix as header-less CSV, one row per sensor."""
    with safe_file_writer(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        for row in np.atleast_2d(matrix):
            writer.writerow([repr(float(value)) for value in row])


class OperationTimer:
    """Context manager for timing operations."""

    def __init__(self, operation_name: str):
        self.operation_name = operation_name
        self.start_time = None

    def __enter__(self):
        self.start_time = time.time()
        logger.info(f"Starting {self.operation_name}")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.start_time:
            elapsed = time.time() - self.start_time
            if exc_type is None:
                logger.info(f"Completed {self.operation_name} in {elapsed:.2f}s")
            else:
                logger.error(f"Failed {self.operation_name} after {elapsed:.2f}s: {exc_val}")


def log_operation_progress(current: int, total: int, operation_name: str) -> None:
    """Log progress for long-running operations."""
    percentage = (current / total) * 100 if total > 0 else 0
    logger.info(f"{operation_name}: {current}/{total} ({percentage:.1f}%)")
