"""Tests for diqkd_lab.common: random streams, formatting, errors and configuration."""

from datetime import datetime

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from diqkd_lab.common import (
    Config,
    DomainError,
    EstimationError,
    InconsistentParametersError,
    NumericFailure,
    PreconditionError,
    block_generator,
    block_sizes,
    format_bits,
    format_key_value,
    format_sig,
    format_timestamp,
    write_csv,
)


class TestRng:
    def test_same_block_same_stream(self):
        assert_array_equal(block_generator(7, 3).random(5), block_generator(7, 3).random(5))

    def test_blocks_are_distinct(self):
        assert not np.array_equal(block_generator(7, 0).random(5), block_generator(7, 1).random(5))
        assert not np.array_equal(block_generator(7, 0).random(5), block_generator(8, 0).random(5))

    def test_negative_block(self):
        with pytest.raises(ValueError):
            block_generator(1, -1)

    def test_block_sizes_cover_total(self):
        assert list(block_sizes(10, 4)) == [(0, 4), (1, 4), (2, 2)]
        assert list(block_sizes(0, 4)) == []

    def test_block_sizes_rejects_zero(self):
        with pytest.raises(ValueError):
            list(block_sizes(10, 0))


class TestFormatting:
    def test_sig_digits(self):
        assert format_sig(0.1) == "0.1"
        assert format_sig(1 / 3, 4) == "0.3333"

    def test_key_value(self):
        assert format_key_value("r_DW", 0.5) == "r_DW=0.5"
        assert format_key_value("n", 10) == "n=10"

    def test_bits_keep_sign(self):
        assert format_bits(-0.25, 2) == "-0.25 bits"
        assert format_bits(0.25, 2) == "0.25 bits"

    def test_naive_timestamp_is_localized(self):
        assert format_timestamp(datetime(2024, 1, 2, 3, 4), "%Y-%m-%d %H:%M") == "2024-01-02 03:04"

    def test_write_csv_creates_parent(self, tmp_path):
        path = write_csv(tmp_path / "nested" / "out.csv", ("a", "b"), [(1, 2), (3, 4)])
        assert path.read_text() == "a,b\n1,2\n3,4\n"


class TestErrors:
    @pytest.mark.parametrize("cls", [PreconditionError, EstimationError, InconsistentParametersError])
    def test_domain_hierarchy(self, cls):
        assert issubclass(cls, DomainError)
        assert issubclass(cls, ValueError)

    def test_numeric_failure_is_not_a_domain_error(self):
        assert not issubclass(NumericFailure, DomainError)
        assert issubclass(NumericFailure, RuntimeError)


class TestConfig:
    def test_exit_codes(self):
        assert (Config.exit_ok, Config.exit_usage, Config.exit_verification, Config.exit_numeric) == (0, 2, 3, 4)

    def test_physical_constants(self):
        assert Config.tsirelson == pytest.approx(2.0 * 2.0**0.5)
        assert Config.local_bound < Config.tsirelson < Config.algebraic_bound
