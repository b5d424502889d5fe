"""Optimization-loop tests: budgets, determinism, traces, failures."""

import math

import numpy as np
import pytest

import paretobo.engine as engine_mod
from paretobo.acquisition import CEI, EI, EIAlpha, EICool, EIpu
from paretobo.bench import BlackBox, ExpLinear, make_synthetic
from paretobo.engine import (
    Iterations,
    RunConfig,
    SimulatedCost,
    constrained_best,
    read_trace,
    run,
    summary_row,
)
from paretobo.errors import ConfigError
from paretobo.space import Dimension, SearchSpace


def scripted_problem(ys, costs=None, space=None):
    """Black-box returning scripted (y, cost) values in call order."""
    space = space or SearchSpace(
        [Dimension("a", "continuous", 0, 1), Dimension("b", "continuous", 0, 1)]
    )
    ys = list(ys)
    costs = list(costs) if costs is not None else [1.0] * len(ys)
    calls = {"i": 0}

    def evaluate(u):
        i = calls["i"]
        calls["i"] += 1
        y, c = ys[i], costs[i]
        if y == "boom":
            raise RuntimeError("synthetic failure")
        return float(y), float(c)

    return BlackBox(space=space, evaluate=evaluate, name="scripted")


def quick_problem(seed=0):
    return make_synthetic("branin", ExpLinear(coefficients=(1.0, 0.5)), seed=seed)


def quick_config(**overrides):
    defaults = dict(
        seed=3, acquisition=EI(), budget=Iterations(9), candidate_count=64
    )
    defaults.update(overrides)
    return RunConfig(**defaults)


class TestBudgets:
    def test_iteration_budget_equal_to_init_design(self):
        trace = run(
            scripted_problem([3.0, 1.0, 2.0]),
            RunConfig(seed=0, budget=Iterations(3), init_design_size=3),
        )
        assert len(trace) == 3
        assert all(r.phase == "init" for r in trace.records)

    def test_running_minimum_incumbents(self):
        trace = run(
            scripted_problem([3.0, 1.0, 2.0]),
            RunConfig(seed=0, budget=Iterations(3), init_design_size=3),
        )
        assert [r.incumbent for r in trace.records] == [3.0, 1.0, 1.0]

    def test_iteration_budget_exact_count(self):
        trace = run(quick_problem(), quick_config())
        assert len(trace) == 9
        assert sum(1 for r in trace.records if r.phase == "init") == 5  # max(5, d)

    def test_cumulative_cost_is_exact_sum(self):
        trace = run(quick_problem(), quick_config())
        np.testing.assert_allclose(
            [r.cumulative_cost for r in trace.records],
            np.cumsum([r.cost for r in trace.records]),
            rtol=0,
            atol=0,
        )

    def test_simulated_cost_budget_flags_crossing_record(self):
        costs = [1.0] * 20
        trace = run(
            scripted_problem([5.0] * 20, costs),
            RunConfig(seed=0, budget=SimulatedCost(6.5), init_design_size=3),
        )
        assert trace.total_cost >= 6.5
        assert trace.records[-1].over_budget
        assert all(not r.over_budget for r in trace.records[:-1])
        # stops right after crossing: 7 records of unit cost
        assert len(trace) == 7

    def test_simulated_cost_stops_during_init(self):
        trace = run(
            scripted_problem([1.0] * 10, [2.0] * 10),
            RunConfig(seed=0, budget=SimulatedCost(3.0), init_design_size=8),
        )
        assert len(trace) == 2
        assert trace.records[-1].over_budget


class TestDeterminism:
    def test_identical_seeds_byte_identical_traces(self, tmp_path):
        cfg = quick_config(acquisition=EIAlpha(0.5))
        t1 = run(quick_problem(), cfg)
        t2 = run(quick_problem(), cfg)
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        t1.write(p1)
        t2.write(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_different_seeds_differ(self):
        t1 = run(quick_problem(), quick_config(seed=1))
        t2 = run(quick_problem(), quick_config(seed=2))
        assert t1.to_jsonl() != t2.to_jsonl()

    def test_alpha_zero_identical_to_ei(self):
        t_ei = run(quick_problem(), quick_config(acquisition=EI()))
        t_a0 = run(quick_problem(), quick_config(acquisition=EIAlpha(0.0)))
        assert [tuple(r.point) for r in t_ei.records] == [
            tuple(r.point) for r in t_a0.records
        ]

    def test_objective_scale_invariant_choices(self):
        # standardization makes the chosen points invariant to y units
        base = quick_problem()
        scaled = make_synthetic("branin", ExpLinear(coefficients=(1.0, 0.5)), seed=0)
        original_eval = base.evaluate
        scaled.evaluate = lambda u: (
            lambda yc: (1000.0 * yc[0] + 5.0, yc[1])
        )(original_eval(u))
        t1 = run(quick_problem(), quick_config())
        t2 = run(scaled, quick_config())
        assert [tuple(r.point) for r in t1.records] == [
            tuple(r.point) for r in t2.records
        ]


class TestModelInputsIsolation:
    def test_models_see_only_prior_observations(self, monkeypatch):
        seen_sizes = []
        real_fit = engine_mod.gp_fit

        def spy_fit(X, y, **kwargs):
            seen_sizes.append(len(y))
            return real_fit(X, y, **kwargs)

        monkeypatch.setattr(engine_mod, "gp_fit", spy_fit)
        trace = run(quick_problem(), quick_config(budget=Iterations(8)))
        assert len(trace) == 8
        # fits happen before BO evaluations 6, 7, 8 on 5, 6, 7 observations
        assert seen_sizes == [5, 6, 7]


class TestFailures:
    def test_failed_evaluation_recorded_and_excluded(self):
        ys = [3.0, "boom", 2.0, 1.5, 4.0, 2.5, 2.2, 2.1]
        trace = run(
            scripted_problem(ys, [1.0] * 8),
            RunConfig(seed=0, budget=Iterations(8), init_design_size=5,
                      candidate_count=32),
        )
        failed = [r for r in trace.records if r.failed]
        assert len(failed) == 1
        assert failed[0].y == math.inf
        # incumbent ignores the failure
        assert trace.records[1].incumbent == 3.0
        assert len(trace) == 8

    def test_all_failures_still_progress(self):
        ys = ["boom"] * 4 + [2.0, 1.0]
        trace = run(
            scripted_problem(ys, [1.0] * 6),
            RunConfig(seed=0, budget=Iterations(6), init_design_size=4,
                      candidate_count=16),
        )
        assert len(trace) == 6
        assert trace.final_incumbent == 1.0


class TestEICool:
    def test_requires_total_budget_with_iteration_cap(self):
        with pytest.raises(ConfigError):
            run(quick_problem(), quick_config(acquisition=EICool()))

    def test_resolves_from_simulated_cost_budget(self):
        cfg = quick_config(acquisition=EICool(), budget=SimulatedCost(40.0))
        trace = run(quick_problem(), cfg)
        assert trace.total_cost >= 40.0 or len(trace) >= 5

    def test_explicit_total_budget_with_iterations(self):
        cfg = quick_config(acquisition=EICool(total_budget=100.0))
        trace = run(quick_problem(), cfg)
        assert len(trace) == 9


class TestConstrainedBest:
    def test_full_budget_returns_overall_incumbent(self):
        trace = run(quick_problem(), quick_config())
        y_star, spend = constrained_best(trace, trace.total_cost + 1.0)
        assert y_star == trace.final_incumbent
        assert spend == trace.total_cost

    def test_budget_below_first_cost(self):
        trace = run(quick_problem(), quick_config())
        y_star, spend = constrained_best(trace, trace.records[0].cost / 2)
        assert y_star == math.inf
        assert spend == 0.0

    def test_matches_linear_scan_at_boundaries(self):
        trace = run(quick_problem(), quick_config(budget=Iterations(12)))
        for record in trace.records:
            tau = record.cumulative_cost
            y_star, spend = constrained_best(trace, tau)
            prefix = [r for r in trace.records if r.cumulative_cost <= tau]
            valid = [r.y for r in prefix if not r.failed]
            assert y_star == (min(valid) if valid else math.inf)
            assert spend == prefix[-1].cumulative_cost

    def test_rejects_nonpositive_tau(self):
        trace = run(quick_problem(), quick_config())
        with pytest.raises(ConfigError):
            constrained_best(trace, 0.0)


class TestTraceIO:
    def test_round_trip_preserves_records(self, tmp_path):
        trace = run(quick_problem(), quick_config(acquisition=CEI(0.5)))
        path = tmp_path / "t.jsonl"
        trace.write(path)
        loaded = read_trace(path)
        assert len(loaded) == len(trace)
        assert loaded.problem == trace.problem
        assert loaded.run_config == trace.run_config
        for a, b in zip(trace.records, loaded.records):
            assert a.iteration == b.iteration
            assert a.y == b.y
            assert a.cumulative_cost == b.cumulative_cost
            assert a.incumbent == b.incumbent
            assert a.cei_threshold == b.cei_threshold
            if a.front is not None:
                assert [(c.ei, c.cost_pred) for c in a.front] == [
                    (c.ei, c.cost_pred) for c in b.front
                ]

    def test_bo_records_carry_selection_fields(self):
        trace = run(quick_problem(), quick_config(acquisition=CEI(0.25)))
        bo = [r for r in trace.records if r.phase == "bo"]
        assert bo
        for r in bo:
            assert r.max_ei is not None
            assert r.cei_threshold is not None
            assert r.front is not None
            costs = [c.cost_pred for c in r.front]
            assert costs == sorted(costs)

    def test_summary_row_fields(self):
        trace = run(quick_problem(), quick_config())
        row = summary_row(trace)
        assert row["iterations"] == 9
        assert row["seed"] == 3
        assert row["final_incumbent"] == trace.final_incumbent

    def test_persistence_tracking(self):
        trace = run(
            quick_problem(),
            quick_config(budget=Iterations(8)),
            track_persistence=True,
        )
        bo = [r for r in trace.records if r.phase == "bo"]
        assert all(r.persistence is not None for r in bo[1:])
        for r in bo[1:]:
            assert 0 <= r.persistence.survived <= r.persistence.total


class TestTabularRuns:
    def test_run_snaps_to_table_rows(self, tmp_path):
        space = SearchSpace(
            [Dimension("a", "continuous", 0, 1), Dimension("b", "continuous", 0, 1)]
        )
        rng = np.random.default_rng(11)
        rows = rng.uniform(size=(40, 2))
        lines = ["a,b,y,cost"]
        for r in rows:
            lines.append(f"{r[0]},{r[1]},{r[0] + r[1]},{1.0 + r[0]}")
        path = tmp_path / "table.csv"
        path.write_text("\n".join(lines) + "\n")
        from paretobo.bench import load_tabular

        problem = load_tabular(path, space)
        trace = run(problem, RunConfig(seed=0, budget=Iterations(10), candidate_count=16))
        assert len(trace) == 10
        table_points = {tuple(np.round(r, 12)) for r in problem.candidate_pool}
        for record in trace.records:
            assert tuple(np.round(record.point, 12)) in table_points
