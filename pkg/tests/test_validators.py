"""Tests for argument validators."""

import os

import pytest

from exceptions import ValidationError
from validators import (
    validate_centralized_budget, validate_decentralized_budget, validate_shared_count,
    validate_shared_counts, validate_jobs, validate_input_file, validate_output_file,
    validate_output_directory
)


class TestBudgets:

    def test_centralized(self):
        validate_centralized_budget(40, 100, 40)
        with pytest.raises(ValidationError):
            validate_centralized_budget(39, 100, 40)
        with pytest.raises(ValidationError):
            validate_centralized_budget(100, 100, 40)

    @pytest.mark.parametrize("k, m, n", [(41, 100, 40), (38, 100, 40), (100, 100, 40), (40, 99, 20)])
    def test_decentralized_rejects(self, k, m, n):
        with pytest.raises(ValidationError):
            validate_decentralized_budget(k, m, n)

    def test_decentralized_accepts(self):
        # 20 sensors per node with n=40
        validate_decentralized_budget(40, 100, 40)
        validate_decentralized_budget(80, 100, 40)
        validate_decentralized_budget(98, 100, 40)


class TestSharedCounts:

    def test_range(self):
        validate_shared_count(0, 3)
        validate_shared_count(3, 3)
        with pytest.raises(ValidationError):
            validate_shared_count(-1, 3)
        with pytest.raises(ValidationError):
            validate_shared_count(4, 3)

    def test_list(self):
        validate_shared_counts([0, 1, 2], 3)
        with pytest.raises(ValidationError):
            validate_shared_counts([], 3)


def test_jobs():
    validate_jobs(1)
    with pytest.raises(ValidationError):
        validate_jobs(0)


class TestFiles:

    def test_input_file(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1\n")
        validate_input_file(str(path))
        with pytest.raises(ValidationError):
            validate_input_file(str(tmp_path / "missing.csv"))
        with pytest.raises(ValidationError):
            validate_input_file("")

    def test_output_file(self, tmp_path):
        validate_output_file(str(tmp_path / "out.csv"))
        with pytest.raises(ValidationError):
            validate_output_file(str(tmp_path / "missing" / "out.csv"))

    def test_output_directory(self, tmp_path):
        validate_output_directory(str(tmp_path))
        with pytest.raises(ValidationError):
            validate_output_directory(os.path.join(str(tmp_path), "missing"))
