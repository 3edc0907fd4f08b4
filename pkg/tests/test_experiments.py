"""Tests for instance generation, the Monte-Carlo harness and its CSV formats."""

import math

import numpy as np
import pytest

from config import ExperimentConfig
from exceptions import ValidationError
from experiments import (
    STATUS_TIMEOUT, TRIALS_CSV_COLUMNS, SUMMARY_CSV_COLUMNS, BUDGET_CSV_COLUMNS,
    generate_instance, run_trials, run_single_trial, sweep_shared_vectors, sweep_budget,
    aggregate_records, write_trials_csv, read_trials_csv, write_summary_csv, read_summary_csv,
    write_budget_csv
)
from model import enumerate_boolean_optimum


def small_config(**overrides) -> ExperimentConfig:
    values = dict(m=24, n=3, k_s=8, N=2, num_correlated_pairs=4, trials=3, master_seed=11)
    values.update(overrides)
    return ExperimentConfig(**values)


class TestGenerateInstance:

    def test_deterministic(self):
        cfg = small_config()
        first = generate_instance(cfg, (cfg.master_seed, 0))
        second = generate_instance(cfg, (cfg.master_seed, 0))
        np.testing.assert_array_equal(first.a1.rows, second.a1.rows)
        np.testing.assert_array_equal(first.a2.rows, second.a2.rows)
        assert first.correlated_pairs == second.correlated_pairs

    def test_trials_differ(self):
        cfg = small_config()
        first = generate_instance(cfg, (cfg.master_seed, 0))
        second = generate_instance(cfg, (cfg.master_seed, 1))
        assert not np.array_equal(first.a1.rows, second.a1.rows)

    def test_pairs_use_distinct_rows(self):
        cfg = small_config(num_correlated_pairs=12)
        partition = generate_instance(cfg, 5)
        rows1 = [i for i, _ in partition.correlated_pairs]
        rows2 = [j for _, j in partition.correlated_pairs]
        assert len(set(rows1)) == len(set(rows2)) == 12

    def test_zero_sigma_copies_rows(self):
        cfg = small_config(sigma_corr=0.0)
        partition = generate_instance(cfg, 3)
        for i, j in partition.correlated_pairs:
            np.testing.assert_array_equal(partition.a1.rows[i], partition.a2.rows[j])

    def test_unit_sigma_is_uncorrelated(self):
        cfg = ExperimentConfig(m=2000, n=40, num_correlated_pairs=1000, sigma_corr=1.0)
        partition = generate_instance(cfg, 8)
        products = [
            partition.a1.rows[i] @ partition.a2.rows[j]
            / (np.linalg.norm(partition.a1.rows[i]) * np.linalg.norm(partition.a2.rows[j]))
            for i, j in partition.correlated_pairs
        ]
        assert abs(np.mean(products)) < 0.1

    def test_pair_moment(self):
        cfg = ExperimentConfig(m=200, n=40, num_correlated_pairs=100, sigma_corr=0.1)
        products = []
        for seed in range(100):
            partition = generate_instance(cfg, (7, seed))
            products.extend(partition.a1.rows[i] @ partition.a2.rows[j] for i, j in partition.correlated_pairs)
        products = np.array(products)
        standard_error = np.std(products, ddof=1) / math.sqrt(products.size)
        assert abs(np.mean(products) - 0.99 * 40) < 3 * standard_error


class TestRunTrials:

    def test_record_layout(self):
        stats = run_trials(small_config())
        assert len(stats.records) == 3 * 4
        assert [r.strategy for r in stats.records[:4]] == ["centralized", "naive", "fdm", "lpm"]
        assert all(r.ok for r in stats.records)
        assert all(r.gap_rel_percent >= 0 for r in stats.records)

    def test_centralized_bound_shared_within_trial(self):
        stats = run_trials(small_config())
        for trial in range(3):
            uppers = {r.U_cen for r in stats.records if r.trial == trial}
            assert len(uppers) == 1

    def test_deterministic_output(self, tmp_path):
        cfg = small_config(trials=2)
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        write_trials_csv(str(first), run_trials(cfg).records)
        write_trials_csv(str(second), run_trials(cfg).records)
        assert first.read_bytes() == second.read_bytes()

    def test_parallel_matches_serial(self):
        cfg = small_config(trials=4)
        serial = run_trials(cfg, jobs=1)
        parallel = run_trials(cfg, jobs=2)
        assert [(r.trial, r.strategy, r.L) for r in serial.records] == \
            [(r.trial, r.strategy, r.L) for r in parallel.records]

    def test_aggregates_recomputable(self):
        stats = run_trials(small_config(trials=4))
        for strategy in ("centralized", "naive", "fdm", "lpm"):
            gaps = [r.gap_rel_percent for r in stats.records if r.strategy == strategy and r.ok]
            aggregate = stats.aggregate_for(strategy, 2)
            assert aggregate.mean_gap == pytest.approx(np.mean(gaps))
            assert aggregate.std_gap == pytest.approx(np.std(gaps, ddof=1))
            assert aggregate.trials_ok + aggregate.trials_failed == 4

    def test_single_trial_std_is_zero(self):
        stats = run_trials(small_config(trials=1))
        assert stats.aggregate_for("naive", 2).std_gap == 0.0

    def test_bounds_bracket_enumeration(self):
        cfg = ExperimentConfig(m=12, n=3, k_s=6, N=1, num_correlated_pairs=3, trials=20, master_seed=3)
        stats = run_trials(cfg)
        assert stats.inclusion_violations == 0
        for trial in range(cfg.trials):
            best, _ = enumerate_boolean_optimum(generate_instance(cfg, (cfg.master_seed, trial)).stacked(), 6)
            for record in stats.records:
                if record.trial != trial or not record.ok:
                    continue
                assert record.L <= best + 1e-9
                assert best <= record.U_cen + 1e-6 * max(1.0, abs(best))

    def test_timeouts_are_recorded(self):
        stats = run_trials(small_config(trials=2, trial_timeout_seconds=1e-9))
        assert all(r.status == STATUS_TIMEOUT for r in stats.records)
        aggregate = stats.aggregate_for("lpm", 2)
        assert aggregate.trials_ok == 0
        assert aggregate.trials_failed == 2
        assert math.isnan(aggregate.mean_gap)

    def test_per_node_budget_below_n(self):
        stats = run_trials(small_config(n=6, k_s=6, trials=2))
        assert len(stats.records) == 2 * 4
        assert all(r.status != "numerical_failure" for r in stats.records)
        assert stats.inclusion_violations == 0

    def test_default_configuration_runs(self):
        stats = run_trials(ExperimentConfig(trials=1))
        assert [r.strategy for r in stats.records] == ["centralized", "naive", "fdm", "lpm"]
        assert all(r.ok for r in stats.records)

    def test_invalid_budget(self):
        with pytest.raises(ValidationError):
            run_trials(small_config(k_s=7))

    def test_centralized_only_allows_odd_budget(self):
        stats = run_trials(small_config(k_s=7, strategies=("centralized",), trials=1))
        assert len(stats.records) == 1

    def test_rounding_anomaly_count(self):
        stats = run_trials(small_config(trials=4))
        assert 0 <= stats.rounding_anomalies <= 4
        single = run_single_trial(small_config(), 0, (2,), 8)
        naive = next(r for r in single.records if r.strategy == "naive")
        central = next(r for r in single.records if r.strategy == "centralized")
        assert single.rounding_anomaly == (naive.L > central.L)


class TestSweeps:

    def test_zero_column_equals_naive(self):
        stats = sweep_shared_vectors(small_config(trials=3), [0, 2])
        for trial in range(3):
            by_key = {(r.strategy, r.N): r.L for r in stats.records if r.trial == trial}
            assert by_key[("fdm", 0)] == by_key[("naive", 0)]
            assert by_key[("lpm", 0)] == by_key[("naive", 0)]

    def test_repeated_value_gives_identical_columns(self):
        stats = sweep_shared_vectors(small_config(trials=2), [1, 1])
        # aggregates come in (strategy, N) order, so each strategy appears twice in a row
        columns = stats.aggregates
        assert len(columns) == 8
        for index in range(0, 8, 2):
            assert columns[index] == columns[index + 1]

    def test_naive_is_independent_of_n(self):
        stats = sweep_shared_vectors(small_config(trials=2), [1, 3])
        assert stats.aggregate_for("naive", 1).mean_gap == stats.aggregate_for("naive", 3).mean_gap

    def test_rejects_n_above_dimension(self):
        with pytest.raises(ValidationError):
            sweep_shared_vectors(small_config(), [1, 4])

    def test_budget_sweep(self):
        rows = sweep_budget(small_config(trials=2), [8, 10])
        assert [(row.strategy, row.k_s) for row in rows[:4]] == [
            ("centralized", 8), ("naive", 8), ("fdm", 8), ("lpm", 8)
        ]
        assert {row.k_s for row in rows} == {8, 10}
        central = [row.mean_lower for row in rows if row.strategy == "centralized"]
        assert central[1] > central[0]


class TestCsv:

    def test_trials_round_trip(self, tmp_path):
        stats = run_trials(small_config(trials=2))
        path = tmp_path / "trials.csv"
        write_trials_csv(str(path), stats.records)
        assert path.read_text().splitlines()[0] == ",".join(TRIALS_CSV_COLUMNS)
        parsed = read_trials_csv(str(path))
        assert [(r.trial, r.strategy, r.N, r.U_cen, r.L, r.gap_rel_percent, r.status) for r in parsed] == \
            [(r.trial, r.strategy, r.N, r.U_cen, r.L, r.gap_rel_percent, r.status) for r in stats.records]

    def test_summary_columns(self, tmp_path):
        stats = run_trials(small_config(trials=2))
        path = tmp_path / "summary.csv"
        write_summary_csv(str(path), stats.aggregates)
        rows = read_summary_csv(str(path))
        assert tuple(rows[0].keys()) == SUMMARY_CSV_COLUMNS
        assert [row["strategy"] for row in rows] == ["centralized", "naive", "fdm", "lpm"]
        assert float(rows[1]["mean_gap"]) == pytest.approx(stats.aggregates[1].mean_gap, rel=1e-9)

    def test_budget_columns(self, tmp_path):
        path = tmp_path / "budget.csv"
        write_budget_csv(str(path), sweep_budget(small_config(trials=1), [8]))
        assert path.read_text().splitlines()[0] == ",".join(BUDGET_CSV_COLUMNS)

    def test_aggregate_excludes_failures(self):
        stats = run_trials(small_config(trials=2, trial_timeout_seconds=1e-9))
        aggregates = aggregate_records(stats.records, ["naive"], [2])
        assert aggregates[0].trials_failed == 2


@pytest.mark.slow
class TestDeskScaleAcceptance:
    """Qualitative orderings at the default problem size with fixed seeds."""

    def test_strategy_ordering(self):
        stats = run_trials(ExperimentConfig(trials=200), jobs=8)
        mean = {s: stats.aggregate_for(s, 5).mean_gap for s in ("centralized", "naive", "fdm", "lpm")}
        assert mean["centralized"] < mean["lpm"] <= mean["fdm"] < mean["naive"]
        assert mean["naive"] - mean["fdm"] > 1.0

    def test_shared_vector_trend(self):
        stats = sweep_shared_vectors(ExperimentConfig(trials=200), [1, 5, 10], jobs=8)
        for strategy in ("fdm", "lpm"):
            low, high = stats.aggregate_for(strategy, 1), stats.aggregate_for(strategy, 10)
            pooled = math.sqrt(low.std_gap ** 2 / low.trials_ok + high.std_gap ** 2 / high.trials_ok)
            assert high.mean_gap <= low.mean_gap + pooled
            assert high.mean_gap > stats.aggregate_for("centralized", 10).mean_gap
