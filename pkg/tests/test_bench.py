"""Tests for the experiment driver, trace format, and the CLI."""

import json
import math

import numpy as np
import pytest

from osgpcp import bench, cli
from osgpcp.kernels import KernelHyperparams
from osgpcp.stream import gen_iid, write_csv

SMALL = dict(dataset="iid", n=400, D=40, warmup=50, seed_features=3, seed_data=4)


@pytest.fixture(scope="module")
def small_result():
    return bench.run_experiment(bench.ExperimentConfig(**SMALL))


class TestRunExperiment:
    def test_row_count_is_n_minus_warmup(self, small_result):
        assert len(small_result.rows) == 400 - 50

    def test_slots_are_post_warmup(self, small_result):
        assert small_result.rows[0].t == 51
        assert small_result.rows[-1].t == 400

    def test_methods_share_predictive_center(self, small_result):
        for row in small_result.rows:
            centers = [
                (row.bayes_lo + row.bayes_hi) / 2.0,
                (row.scp_lo + row.scp_hi) / 2.0,
                (row.acp_lo + row.acp_hi) / 2.0,
            ]
            assert max(centers) - min(centers) <= 1e-9

    def test_empty_sets_encoded_reflected(self, small_result):
        for row in small_result.rows:
            if row.acp_empty:
                assert row.acp_lo > row.acp_hi
                assert row.acp_size == 0.0
            else:
                assert row.acp_lo <= row.acp_hi

    def test_q0_within_clip_band(self, small_result):
        assert 0.0 <= small_result.q0 <= small_result.config.B

    def test_warmup_must_fit_stream(self):
        with pytest.raises(ValueError):
            bench.run_experiment(bench.ExperimentConfig(dataset="iid", n=50, warmup=50))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            bench.ExperimentConfig(alpha=1.5)
        with pytest.raises(ValueError):
            bench.ExperimentConfig(dataset="nope")
        with pytest.raises(ValueError):
            bench.ExperimentConfig(dataset="csv")

    def test_no_label_leakage_into_sets(self, tmp_path):
        """Perturbing one label must not change that slot's intervals."""
        recs = gen_iid(240, seed=9)
        path_a, path_b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(recs, path_a, ["x"], "y")
        k = 150  # perturbed slot (1-based), well past warmup
        recs_b = [r if r.t != k else type(r)(t=r.t, x=r.x, y=r.y + 5.0) for r in recs]
        write_csv(recs_b, path_b, ["x"], "y")

        common = dict(dataset="csv", feature_columns=("x",), target_column="y",
                      D=30, warmup=60, seed_features=3)
        rows_a = bench.run_experiment(bench.ExperimentConfig(csv_path=str(path_a), **common)).rows
        rows_b = bench.run_experiment(bench.ExperimentConfig(csv_path=str(path_b), **common)).rows

        for ra, rb in zip(rows_a, rows_b):
            if ra.t < k:
                assert ra == rb
            elif ra.t == k:
                # sets were built before the label was revealed
                for field in ("bayes_lo", "bayes_hi", "scp_lo", "scp_hi", "acp_lo", "acp_hi", "q_t"):
                    assert getattr(ra, field) == getattr(rb, field)
                assert ra.y_true != rb.y_true
                break


class TestRunningCoverage:
    def _rows(self, flags):
        return [
            bench.TraceRow(
                t=i + 1, y_true=0.0,
                bayes_lo=0.0, bayes_hi=0.0, bayes_cov=f, bayes_size=0.0,
                scp_lo=0.0, scp_hi=0.0, scp_cov=f, scp_size=0.0,
                acp_lo=0.0, acp_hi=0.0, acp_cov=f, acp_size=0.0, acp_empty=0,
                q_t=0.0, eta_t=0.05, reset=0,
            )
            for i, f in enumerate(flags)
        ]

    def test_prefix_means(self):
        cov = bench.running_coverage(self._rows([1, 0, 1, 1]), "bayes")
        np.testing.assert_allclose(cov, [1.0, 0.5, 2.0 / 3.0, 0.75], rtol=1e-12)

    def test_all_covered(self):
        np.testing.assert_array_equal(bench.running_coverage(self._rows([1, 1, 1]), "osgpcp"), 1.0)

    def test_none_covered(self):
        np.testing.assert_array_equal(bench.running_coverage(self._rows([0, 0]), "standard_cp"), 0.0)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            bench.running_coverage(self._rows([1]), "mystery")

    def test_empty_rows(self):
        with pytest.raises(ValueError):
            bench.running_coverage([], "bayes")


class TestTraceIO:
    def test_round_trip(self, small_result, tmp_path):
        path = tmp_path / "trace.csv"
        bench.write_trace(small_result, path)
        loaded = bench.read_trace(path)
        assert loaded == small_result.rows  # repr formatting round-trips floats exactly

    def test_empty_rows_header_only(self, small_result, tmp_path):
        import dataclasses

        empty = dataclasses.replace(small_result, rows=[])
        path = tmp_path / "empty.csv"
        bench.write_trace(empty, path)
        lines = path.read_text().splitlines()
        assert lines == [",".join(bench.TRACE_COLUMNS)]

    def test_sidecar_contents(self, small_result, tmp_path):
        path = tmp_path / "trace.csv"
        bench.write_trace(small_result, path)
        meta = json.loads(bench.sidecar_path(path).read_text())
        assert meta["config"]["alpha"] == 0.1
        fitted = meta["fitted_hyperparams"]
        assert all(fitted[k] > 0 for k in ("sigma_theta2", "sigma_l2", "sigma_n2"))
        assert meta["acceptance_bands"]["final_coverage"] == [0.88, 0.92]

    def test_deterministic_bytes(self, small_result, tmp_path):
        rerun = bench.run_experiment(bench.ExperimentConfig(**SMALL))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        bench.write_trace(small_result, p1)
        bench.write_trace(rerun, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_validation(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n")
        with pytest.raises(ValueError):
            bench.read_trace(path)


class TestSummarize:
    def test_summary_fields(self, small_result):
        summary = bench.summarize(small_result.rows)
        for method in ("bayes", "standard_cp", "osgpcp"):
            assert 0.0 <= summary[method]["final_coverage"] <= 1.0
            assert summary[method]["mean_set_size"] >= 0.0
        assert summary["osgpcp"]["resets"] >= 0.0


class TestCli:
    def test_run_and_summarize(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        rc = cli.main([
            "run", "--dataset", "iid", "--n", "300", "--features", "30",
            "--warmup", "60", "--seed-features", "5", "--seed-data", "6",
            "--out", str(out),
        ])
        assert rc == 0
        assert out.exists() and bench.sidecar_path(out).exists()
        rc = cli.main(["summarize", str(out)])
        assert rc == 0
        captured = capsys.readouterr().out
        assert "final_coverage" in captured and "osgpcp" in captured

    def test_csv_dataset_flags(self, tmp_path):
        data = tmp_path / "in.csv"
        write_csv(gen_iid(200, seed=8), data, ["x"], "y")
        out = tmp_path / "trace.csv"
        rc = cli.main([
            "run", "--dataset", "csv", "--csv-path", str(data),
            "--feature-columns", "x", "--target-column", "y",
            "--features", "20", "--warmup", "40", "--out", str(out),
        ])
        assert rc == 0
        assert len(bench.read_trace(out)) == 160
