"""Shared fixtures for the sensor selection test suite."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from model import MeasurementMatrix, Partition  # noqa: E402

E1 = [1.0, 0.0]
E2 = [0.0, 1.0]


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def paired_rows():
    """Rows {e1, e1, e2, e2}."""
    return MeasurementMatrix([E1, E1, E2, E2])


@pytest.fixture
def interleaved_rows():
    """Rows {e1, e2, e1, e2}."""
    return MeasurementMatrix([E1, E2, E1, E2])


@pytest.fixture
def make_partition():
    """Factory for seeded standard normal partitions with `half` rows per node."""
    def factory(seed: int, half: int = 10, n: int = 3) -> Partition:
        generator = np.random.default_rng(seed)
        return Partition(
            a1=MeasurementMatrix(generator.standard_normal((half, n))),
            a2=MeasurementMatrix(generator.standard_normal((half, n))),
        )
    return factory
