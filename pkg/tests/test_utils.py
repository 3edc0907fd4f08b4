"""Tests for parsing, CSV matrix I/O and timing helpers."""

import logging

import numpy as np
import pytest

from exceptions import ValidationError
from utils import (
    parse_comma_separated_ints, read_matrix_csv, write_matrix_csv, format_decimal, OperationTimer
)


class TestParseInts:

    def test_values(self):
        assert parse_comma_separated_ints("1, 2,,10") == [1, 2, 10]

    def test_empty(self):
        assert parse_comma_separated_ints(None) == []
        assert parse_comma_separated_ints("") == []

    def test_rejects_non_integers(self):
        with pytest.raises(ValidationError):
            parse_comma_separated_ints("1,two")


class TestMatrixCsv:

    def test_exact_floats(self, tmp_path, rng):
        matrix = rng.standard_normal((5, 3))
        path = tmp_path / "m.csv"
        write_matrix_csv(str(path), matrix)
        np.testing.assert_array_equal(read_matrix_csv(str(path)), matrix)

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,0\n\n0,1\n")
        np.testing.assert_array_equal(read_matrix_csv(str(path)), np.eye(2))

    @pytest.mark.parametrize("content", ["", "1,0\n0\n", "1,a\n", "1,inf\n"])
    def test_malformed(self, tmp_path, content):
        path = tmp_path / "m.csv"
        path.write_text(content)
        with pytest.raises(ValidationError, match="Malformed CSV"):
            read_matrix_csv(str(path))

    def test_missing(self, tmp_path):
        with pytest.raises(ValidationError):
            read_matrix_csv(str(tmp_path / "missing.csv"))


def test_format_decimal():
    assert format_decimal(1.0 / 3.0, 10) == "0.3333333333"
    assert float(format_decimal(0.1 + 0.2)) == 0.1 + 0.2


class TestOperationTimer:

    def test_logs_completion(self, caplog):
        with caplog.at_level(logging.INFO, logger="utils"):
            with OperationTimer("unit work"):
                pass
        assert "Starting unit work" in caplog.text
        assert "Completed unit work" in caplog.text

    def test_logs_failure(self, caplog):
        with caplog.at_level(logging.INFO, logger="utils"):
            with pytest.raises(RuntimeError):
                with OperationTimer("broken work"):
                    raise RuntimeError("boom")
        assert "Failed broken work" in caplog.text
