"""Harness tests: subcommands, aggregation oracles, reproducibility."""

import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from paretobo.cli import (
    aggregate_ranks,
    aggregate_tradeoff,
    bootstrap_ci,
    build_problem,
    main,
    suite_problems,
)
from paretobo.engine import Trace, IterationRecord
from paretobo.errors import ConfigError, HarnessError


def read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def synthetic_trace(path, incumbents, costs, problem="p", seed=0):
    """Write a hand-built trace with the given incumbent/cost schedule."""
    records = []
    cumulative = 0.0
    best = math.inf
    for i, (y, c) in enumerate(zip(incumbents, costs), start=1):
        cumulative += c
        best = min(best, y)
        records.append(
            IterationRecord(
                iteration=i,
                phase="bo",
                point=np.array([0.5]),
                config=np.array([0.5]),
                y=y,
                cost=c,
                cumulative_cost=cumulative,
                incumbent=best,
            )
        )
    trace = Trace(records=records, problem={"name": problem}, run_config={"seed": seed})
    trace.write(path)
    return trace


class TestSuites:
    def test_default_suite_has_six_problems(self):
        assert len(suite_problems("default")) == 6

    def test_unknown_suite_rejected(self):
        with pytest.raises(ConfigError):
            suite_problems("imaginary")

    def test_build_problem_parses_ids(self):
        problem = build_problem("hartmann3/expensive")
        assert problem.name == "hartmann3"
        with pytest.raises(ConfigError):
            build_problem("hartmann3")
        with pytest.raises(ConfigError):
            build_problem("hartmann3/quadratic")


class TestTradeoffAggregation:
    @staticmethod
    def rows():
        # two problems, one seed; EI baseline plus one cheaper/worse method
        out = []
        for problem, f_opt in (("p1", 0.0), ("p2", 1.0)):
            out.append(
                dict(method="ei", problem=problem, seed=0, f_opt=f_opt,
                     final_incumbent=f_opt + 1.0, total_cost=10.0)
            )
            out.append(
                dict(method="alpha1", problem=problem, seed=0, f_opt=f_opt,
                     final_incumbent=f_opt + 1.5, total_cost=5.0)
            )
        return out

    def test_ei_is_self_normalized(self):
        table = {r["method"]: r for r in aggregate_tradeoff(self.rows())}
        assert table["ei"]["mean_rel_time_pct"] == pytest.approx(100.0)
        assert table["ei"]["mean_rel_loss_pct"] == pytest.approx(0.0)

    def test_relative_values(self):
        table = {r["method"]: r for r in aggregate_tradeoff(self.rows())}
        assert table["alpha1"]["mean_rel_time_pct"] == pytest.approx(50.0)
        assert table["alpha1"]["mean_rel_loss_pct"] == pytest.approx(50.0)

    def test_missing_baseline_is_harness_error(self):
        rows = [r for r in self.rows() if r["method"] != "ei"]
        with pytest.raises(HarnessError):
            aggregate_tradeoff(rows)


class TestRankAggregation:
    def test_hand_built_rank_table(self, tmp_path):
        # slow-but-accurate ei; fast-but-weak alpha1; cheap cei in between
        manifest = []
        schedules = {
            "ei": ([5.0, 2.0, 1.0], [2.0, 2.0, 2.0]),
            "alpha1": ([5.0, 4.0, 3.0], [1.0, 1.0, 1.0]),
            "cei0.5": ([5.0, 3.0, 2.0], [0.5, 0.5, 0.5]),
        }
        for method, (ys, costs) in schedules.items():
            path = tmp_path / f"{method}.jsonl"
            synthetic_trace(path, ys, costs)
            manifest.append(
                dict(method=method, problem="p", seed=0, trace=str(path))
            )
        table = aggregate_ranks(manifest, (1.0, 5.0))
        by_key = {(r["multiple_pct"], r["method"]): r["mean_rank"] for r in table}
        # minimal budget = 3.0: cheapest full run among the EI_alpha family
        # (ei, alpha1); cei does not define it.
        # at 1x: ei = 5 (one record fits), alpha1 = 3, cei = 2
        assert by_key[(100.0, "cei0.5")] == 1.0
        assert by_key[(100.0, "alpha1")] == 2.0
        assert by_key[(100.0, "ei")] == 3.0
        # at 5x: everyone finished; ei 1 < cei 2 < alpha1 3
        assert by_key[(500.0, "ei")] == 1.0
        assert by_key[(500.0, "cei0.5")] == 2.0
        assert by_key[(500.0, "alpha1")] == 3.0

    def test_identical_traces_share_average_rank(self, tmp_path):
        manifest = []
        for method in ("ei", "alpha1", "eipu"):
            path = tmp_path / f"{method}.jsonl"
            synthetic_trace(path, [3.0, 1.0], [1.0, 1.0])
            manifest.append(dict(method=method, problem="p", seed=0, trace=str(path)))
        table = aggregate_ranks(manifest, (1.0,))
        assert all(r["mean_rank"] == 2.0 for r in table)  # (3+1)/2

    def test_rank_rows_sum_to_method_count_invariant(self, tmp_path):
        rng = np.random.default_rng(5)
        manifest = []
        for method in ("ei", "alpha1", "cei0.5", "eipu"):
            for seed in (0, 1):
                path = tmp_path / f"{method}-{seed}.jsonl"
                ys = rng.uniform(0, 5, size=4).tolist()
                costs = rng.uniform(0.5, 2.0, size=4).tolist()
                synthetic_trace(path, ys, costs, seed=seed)
                manifest.append(
                    dict(method=method, problem="p", seed=seed, trace=str(path))
                )
        table = aggregate_ranks(manifest, (1.0, 2.0))
        for multiple in (100.0, 200.0):
            total = sum(r["mean_rank"] for r in table if r["multiple_pct"] == multiple)
            assert total == pytest.approx(4 * 5 / 2)

    def test_missing_trace_is_harness_error(self, tmp_path):
        path = tmp_path / "ei.jsonl"
        synthetic_trace(path, [1.0], [1.0])
        manifest = [
            dict(method="ei", problem="p", seed=0, trace=str(path)),
            dict(method="ei", problem="q", seed=0, trace=str(path)),
            dict(method="alpha1", problem="p", seed=0, trace=str(path)),
        ]
        with pytest.raises(HarnessError):
            aggregate_ranks(manifest, (1.0,))


class TestBootstrap:
    def test_deterministic(self):
        values = np.arange(20, dtype=float)
        assert bootstrap_ci(values) == bootstrap_ci(values)

    def test_brackets_the_mean_for_tight_data(self):
        values = np.full(50, 3.0)
        lo, hi = bootstrap_ci(values)
        assert lo == hi == 3.0


class TestCommands:
    def test_run_command_writes_trace_and_summary(self, tmp_path):
        out = tmp_path / "out"
        code = main(
            [
                "run", "--problem", "branin/explinear", "--acq", "alpha:0.5",
                "--seed", "1", "--iters", "8", "--candidates", "64",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert (out / "trace.jsonl").exists()
        rows = read_csv(out / "summary.csv")
        assert len(rows) == 1
        assert int(rows[0]["iterations"]) == 8

    def test_run_command_determinism_criterion(self, tmp_path):
        args = [
            "run", "--problem", "branin/cheap", "--acq", "cei:0.5",
            "--seed", "7", "--iters", "8", "--candidates", "64",
        ]
        main(args + ["--out", str(tmp_path / "a")])
        main(args + ["--out", str(tmp_path / "b")])
        assert (tmp_path / "a/trace.jsonl").read_bytes() == (
            tmp_path / "b/trace.jsonl"
        ).read_bytes()

    def test_biopt_command_end_to_end(self, tmp_path):
        out = tmp_path / "biopt"
        code = main(
            [
                "biopt", "--suite", "quick", "--seeds", "2", "--iters", "8",
                "--alphas", "1", "--lambdas", "", "--candidates", "64",
                "--out", str(out),
            ]
        )
        assert code == 0
        table = read_csv(out / "tradeoff.csv")
        methods = {r["method"] for r in table}
        assert methods == {"ei", "alpha1"}
        ei_row = next(r for r in table if r["method"] == "ei")
        assert float(ei_row["mean_rel_time_pct"]) == pytest.approx(100.0)
        assert float(ei_row["mean_rel_loss_pct"]) == pytest.approx(0.0)
        # traces are on disk, one per (method, problem, seed)
        assert len(read_csv(out / "runs.csv")) == 4

    def test_rank_command_reuses_stored_traces(self, tmp_path):
        out = tmp_path / "grid"
        main(
            [
                "time-alloc", "--suite", "quick", "--seeds", "1", "--iters", "8",
                "--alphas", "1", "--lambdas", "0.5", "--multiples", "1,10",
                "--candidates", "64", "--out", str(out),
            ]
        )
        first = (out / "ranks.csv").read_bytes()
        code = main(["rank", "--runs", str(out), "--multiples", "1,10"])
        assert code == 0
        assert (out / "ranks.csv").read_bytes() == first  # pure re-aggregation

    def test_cost_eval_command(self, tmp_path):
        out = tmp_path / "cost"
        code = main(
            [
                "cost-eval", "--train-sizes", "6,10", "--seeds", "2",
                "--out", str(out),
            ]
        )
        assert code == 0
        rows = read_csv(out / "cost_eval.csv")
        assert {(r["kind"], r["n_train"]) for r in rows} == {
            (k, n) for k in ("lv1", "lv2", "lv3", "warped_gp", "gplv3", "limited_gp3")
            for n in ("6", "10")
        }
        transfer = read_csv(out / "transfer_eval.csv")
        assert {r["kind"] for r in transfer} == {
            "transfer_task_aware", "transfer_naive"
        }

    def test_pareto_trace_command(self, tmp_path):
        out = tmp_path / "pt"
        code = main(
            [
                "pareto-trace", "--problem", "branin/explinear", "--acq", "cei:0.3",
                "--seed", "2", "--iters", "9", "--candidates", "64",
                "--out", str(out),
            ]
        )
        assert code == 0
        fronts = read_csv(out / "fronts.csv")
        assert fronts
        markers = read_csv(out / "markers.csv")
        per_iter = {}
        for row in markers:
            per_iter.setdefault(row["iteration"], []).append(row)
        assert all(len(v) == 4 for v in per_iter.values())
        # the alpha=0 marker is the max-EI front point of its iteration
        for it, rows in per_iter.items():
            front_eis = [
                float(r["ei"]) for r in fronts if r["iteration"] == it
            ]
            alpha0 = next(r for r in rows if float(r["alpha"]) == 0.0)
            assert float(alpha0["ei"]) == pytest.approx(max(front_eis))
        alphas = read_csv(out / "implied_alpha.csv")
        assert len(alphas) == len(per_iter)

    def test_error_is_machine_readable(self, tmp_path, capsys):
        code = main(
            ["run", "--problem", "nope", "--out", str(tmp_path / "x")]
        )
        assert code == 1
        err = capsys.readouterr().err.strip()
        record = json.loads(err)
        assert record["error"] == "ConfigError"
