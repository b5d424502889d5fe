"""Experiment harness: budgeted-run grids and figure-ready aggregates.

Subcommands:

- ``run``           one optimization run, trace + summary written to disk
- ``biopt``         fixed-iteration grid; accuracy/cost trade-off vs. the EI
                    baseline per method (relative time %, relative loss %)
- ``time-alloc``    same grid, then average ranks at multiples of the
                    per-problem minimal budget
- ``rank``          re-aggregate ranks from stored traces only
- ``cost-eval``     held-out log-RMSE of every cost-model family vs. the
                    number of training evaluations, plus the leave-one-task-
                    out transfer protocol
- ``pareto-trace``  one run with full front logging: per-iteration fronts,
                    EI_alpha maximizer markers, persistence stats

Aggregation is a pure function of the trace files; bootstrap intervals use
a fixed-seed resampler, so repeated aggregation is byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from . import acquisition as acq
from .bench import (
    BlackBox,
    CheapOptimum,
    ExpensiveOptimum,
    ExpLinear,
    OBJECTIVES,
    cost_bench_space,
    cost_suite_split,
    load_tabular,
    make_synthetic,
    synthetic_transfer_tasks,
)
from .cost import (
    ONLINE_COST_KINDS,
    cost_rmse,
    fit_cost_model_unit,
    load_cost_csv,
    transfer_fit,
    _log_costs,
    _unit_matrix,
)
from .engine import (
    Iterations,
    RunConfig,
    SimulatedCost,
    Trace,
    constrained_best,
    read_trace,
    run,
    summary_row,
)
from .errors import ConfigError, HarnessError, ParetoBOError
from .space import SearchSpace

BOOTSTRAP_RESAMPLES = 1000
BOOTSTRAP_SEED = 2024
DEFAULT_MULTIPLES = (1.0, 5.0, 10.0, 20.0)
MARKER_ALPHAS = (0.0, 0.25, 0.5, 1.0)

SUITES = {
    "default": [
        ("branin", "explinear"),
        ("branin", "expensive"),
        ("branin", "cheap"),
        ("hartmann3", "explinear"),
        ("hartmann3", "expensive"),
        ("hartmann3", "cheap"),
    ],
    "expensive": [("branin", "expensive"), ("hartmann3", "expensive")],
    "quick": [("branin", "explinear")],
}


def build_problem(problem_id: str, noise_sd: float = 0.0, seed: int = 0) -> BlackBox:
    """Instantiate a suite problem like ``branin/expensive``."""
    try:
        objective, cost_id = problem_id.split("/")
    except ValueError:
        raise ConfigError(
            f"problem id must look like 'branin/expensive', got {problem_id!r}"
        ) from None
    if objective not in OBJECTIVES:
        raise ConfigError(f"unknown objective {objective!r}")
    d = len(OBJECTIVES[objective].space)
    if cost_id == "explinear":
        cost = ExpLinear(coefficients=(3.0 / d,) * d)
    elif cost_id == "expensive":
        cost = ExpensiveOptimum(base=1.0, contrast=20.0)
    elif cost_id == "cheap":
        cost = CheapOptimum(base=1.0, contrast=20.0)
    else:
        raise ConfigError(f"unknown cost surface {cost_id!r}")
    return make_synthetic(objective, cost, noise_sd=noise_sd, seed=seed)


def suite_problems(suite: str) -> list[str]:
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    return [f"{obj}/{cost}" for obj, cost in SUITES[suite]]


# ---------------------------------------------------------------------------
# Run grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunTask:
    method_id: str
    acquisition: dict
    problem_id: str
    seed: int
    noise_sd: float
    iterations: int | None
    cost_budget: float | None
    cost_model: str
    candidate_count: int
    out_dir: str

    def run_config(self) -> RunConfig:
        budget = (
            Iterations(self.iterations)
            if self.iterations is not None
            else SimulatedCost(self.cost_budget)
        )
        return RunConfig(
            seed=self.seed,
            acquisition=acq.kind_from_dict(self.acquisition),
            cost_model=self.cost_model,
            budget=budget,
            candidate_count=self.candidate_count,
        )

    def trace_path(self) -> Path:
        safe_problem = self.problem_id.replace("/", "_")
        return (
            Path(self.out_dir)
            / "traces"
            / self.method_id
            / safe_problem
            / f"seed{self.seed}.jsonl"
        )


def _execute_task(task: RunTask) -> dict:
    problem = build_problem(task.problem_id, task.noise_sd, seed=task.seed)
    trace = run(problem, task.run_config())
    path = task.trace_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    trace.write(path)
    row = summary_row(trace)
    row.update(
        method=task.method_id,
        problem=task.problem_id,
        seed=task.seed,
        trace=str(path),
        f_opt=problem.f_opt,
    )
    return row


def run_grid(
    methods: list[acq.AcquisitionKind],
    problems: list[str],
    seeds: int,
    out_dir: Path,
    iterations: int | None = None,
    cost_budget: float | None = None,
    noise_sd: float = 0.0,
    cost_model: str = "lv3",
    candidate_count: int = acq.DEFAULT_CANDIDATE_COUNT,
    jobs: int = 1,
) -> list[dict]:
    """Run methods x problems x seeds, write traces, return the manifest."""
    tasks = [
        RunTask(
            method_id=acq.kind_id(kind),
            acquisition=acq.kind_to_dict(kind),
            problem_id=problem,
            seed=seed,
            noise_sd=noise_sd,
            iterations=iterations,
            cost_budget=cost_budget,
            cost_model=cost_model,
            candidate_count=candidate_count,
            out_dir=str(out_dir),
        )
        for kind in methods
        for problem in problems
        for seed in range(seeds)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_execute_task, tasks))
    else:
        rows = [_execute_task(task) for task in tasks]
    rows.sort(key=lambda r: (r["method"], r["problem"], r["seed"]))
    _write_csv(out_dir / "runs.csv", rows)
    return rows


def _write_csv(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        path.write_text("")
        return
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _read_manifest(out_dir: Path) -> list[dict]:
    manifest = out_dir / "runs.csv"
    if not manifest.exists():
        raise HarnessError(f"no run manifest at {manifest}")
    with open(manifest, newline="") as handle:
        return list(csv.DictReader(handle))


def bootstrap_ci(
    values: np.ndarray, stat=np.mean, n_boot: int = BOOTSTRAP_RESAMPLES
) -> tuple[float, float]:
    """Seeded percentile bootstrap 95% interval of ``stat`` over rows."""
    rng = np.random.default_rng(BOOTSTRAP_SEED)
    values = np.asarray(values)
    n = values.shape[0]
    stats = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, n, size=n)
        stats[b] = stat(values[idx], axis=0) if values.ndim == 1 else stat(values[idx])
    return float(np.percentile(stats, 2.5)), float(np.percentile(stats, 97.5))


# ---------------------------------------------------------------------------
# biopt: accuracy/cost trade-off vs. the EI baseline
# ---------------------------------------------------------------------------


def aggregate_tradeoff(rows: list[dict]) -> list[dict]:
    """Per-method trade-off relative to the matched EI run.

    Relative time is total cost as a percentage of EI's on the same
    (problem, seed); relative loss compares simple regret (incumbent minus
    the problem's known optimum) against EI's, as a percentage.
    """
    baseline: dict[tuple[str, str], dict] = {}
    for row in rows:
        if row["method"] == "ei":
            baseline[(row["problem"], str(row["seed"]))] = row
    if not baseline:
        raise HarnessError("trade-off aggregation needs EI baseline runs")

    methods = sorted({row["method"] for row in rows})
    out = []
    for method in methods:
        rel_time, rel_loss = [], []
        for row in rows:
            if row["method"] != method:
                continue
            key = (row["problem"], str(row["seed"]))
            if key not in baseline:
                raise HarnessError(f"missing EI baseline for {key}")
            base = baseline[key]
            f_opt = float(row["f_opt"])
            regret = float(row["final_incumbent"]) - f_opt
            regret_base = float(base["final_incumbent"]) - f_opt
            rel_time.append(100.0 * float(row["total_cost"]) / float(base["total_cost"]))
            rel_loss.append(
                100.0 * (regret - regret_base) / max(regret_base, 1e-12)
            )
        rel_time = np.array(rel_time)
        rel_loss = np.array(rel_loss)
        time_ci = bootstrap_ci(rel_time)
        loss_ci = bootstrap_ci(rel_loss)
        out.append(
            {
                "method": method,
                "runs": len(rel_time),
                "mean_rel_time_pct": float(np.mean(rel_time)),
                "median_rel_time_pct": float(np.median(rel_time)),
                "mean_rel_time_ci_lo": time_ci[0],
                "mean_rel_time_ci_hi": time_ci[1],
                "mean_rel_loss_pct": float(np.mean(rel_loss)),
                "median_rel_loss_pct": float(np.median(rel_loss)),
                "mean_rel_loss_ci_lo": loss_ci[0],
                "mean_rel_loss_ci_hi": loss_ci[1],
            }
        )
    return out


def cmd_biopt(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    methods: list[acq.AcquisitionKind] = [acq.EI()]
    methods += [acq.EIAlpha(a) for a in _parse_floats(args.alphas) if a > 0]
    methods += [acq.CEI(l) for l in _parse_floats(args.lambdas)]
    if args.eipu:
        methods.append(acq.EIpu())
    rows = run_grid(
        methods,
        suite_problems(args.suite),
        args.seeds,
        out_dir,
        iterations=args.iters,
        noise_sd=args.noise,
        cost_model=args.cost_model,
        candidate_count=args.candidates,
        jobs=args.jobs,
    )
    table = aggregate_tradeoff(rows)
    _write_csv(out_dir / "tradeoff.csv", table)
    (out_dir / "tradeoff_meta.json").write_text(
        json.dumps(
            {
                "normalization": "simple regret (incumbent - known optimum) "
                "relative to the matched EI run; times relative to EI",
                "bootstrap_resamples": BOOTSTRAP_RESAMPLES,
                "bootstrap_seed": BOOTSTRAP_SEED,
            },
            indent=2,
        )
        + "\n"
    )
    for row in table:
        print(
            f"{row['method']:>12}: time {row['mean_rel_time_pct']:.1f}% "
            f"(median {row['median_rel_time_pct']:.1f}%), "
            f"loss {row['mean_rel_loss_pct']:.2f}% "
            f"(median {row['median_rel_loss_pct']:.2f}%)"
        )
    return 0


# ---------------------------------------------------------------------------
# time-alloc / rank: average ranks at budget multiples
# ---------------------------------------------------------------------------


def _alpha_grid_methods(methods: list[str]) -> list[str]:
    """Methods that define the minimal budget (the EI_alpha family)."""
    grid = [m for m in methods if m == "ei" or m == "eipu" or m.startswith("alpha")]
    return grid or list(methods)


def aggregate_ranks(
    manifest: list[dict], multiples: tuple[float, ...]
) -> list[dict]:
    """Average rank per (budget multiple, method) with bootstrap intervals.

    The minimal budget of a (problem, seed) pair is the smallest total cost
    at which a method from the EI_alpha family finished its full iteration
    budget; ranks (1 = lowest incumbent, ties averaged) are taken over all
    methods at each multiple of it, then averaged across pairs.
    """
    methods = sorted({row["method"] for row in manifest})
    pairs = sorted({(row["problem"], str(row["seed"])) for row in manifest})
    traces: dict[tuple[str, str, str], Trace] = {}
    for row in manifest:
        key = (row["method"], row["problem"], str(row["seed"]))
        traces[key] = read_trace(row["trace"])

    grid_methods = _alpha_grid_methods(methods)
    minimal_budget: dict[tuple[str, str], float] = {}
    for pair in pairs:
        costs = []
        for method in grid_methods:
            trace = traces.get((method, *pair))
            if trace is None:
                raise HarnessError(f"missing trace for {method} on {pair}")
            costs.append(trace.total_cost)
        minimal_budget[pair] = min(costs)

    out = []
    for multiple in multiples:
        rank_rows = np.empty((len(pairs), len(methods)))
        for p, pair in enumerate(pairs):
            budget = multiple * minimal_budget[pair]
            best = []
            for method in methods:
                trace = traces.get((method, *pair))
                if trace is None:
                    raise HarnessError(f"missing trace for {method} on {pair}")
                y_star, _ = constrained_best(trace, budget)
                best.append(y_star)
            rank_rows[p] = rankdata(best, method="average")
        for m, method in enumerate(methods):
            ci = bootstrap_ci(rank_rows[:, m])
            out.append(
                {
                    "multiple_pct": 100.0 * multiple,
                    "method": method,
                    "mean_rank": float(np.mean(rank_rows[:, m])),
                    "ci_lo": ci[0],
                    "ci_hi": ci[1],
                    "pairs": len(pairs),
                }
            )
    return out


def cmd_time_alloc(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    if args.runs:
        manifest = _read_manifest(Path(args.runs))
    else:
        methods: list[acq.AcquisitionKind] = [acq.EI(), acq.EIpu()]
        methods += [acq.EIAlpha(a) for a in _parse_floats(args.alphas) if a > 0]
        methods += [acq.CEI(l) for l in _parse_floats(args.lambdas)]
        manifest = run_grid(
            methods,
            suite_problems(args.suite),
            args.seeds,
            out_dir,
            iterations=args.iters,
            noise_sd=args.noise,
            cost_model=args.cost_model,
            candidate_count=args.candidates,
            jobs=args.jobs,
        )
    table = aggregate_ranks(manifest, tuple(_parse_floats(args.multiples)))
    _write_csv(out_dir / "ranks.csv", table)
    for row in table:
        print(
            f"{row['multiple_pct']:7.0f}% {row['method']:>12}: "
            f"rank {row['mean_rank']:.3f} [{row['ci_lo']:.3f}, {row['ci_hi']:.3f}]"
        )
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    manifest = _read_manifest(Path(args.runs))
    table = aggregate_ranks(manifest, tuple(_parse_floats(args.multiples)))
    out_dir = Path(args.out) if args.out else Path(args.runs)
    _write_csv(out_dir / "ranks.csv", table)
    for row in table:
        print(
            f"{row['multiple_pct']:7.0f}% {row['method']:>12}: "
            f"rank {row['mean_rank']:.3f} [{row['ci_lo']:.3f}, {row['ci_hi']:.3f}]"
        )
    return 0


# ---------------------------------------------------------------------------
# cost-eval: cost-model accuracy protocols
# ---------------------------------------------------------------------------

COST_EVAL_KINDS = ("lv1", "lv2", "lv3", "warped_gp", "gplv3", "limited_gp3")


def cost_model_sweep(
    train_sizes: list[int],
    seeds: int,
    kinds: tuple[str, ...] = COST_EVAL_KINDS,
    samples_loader=None,
    test_size: int = 200,
) -> list[dict]:
    """Held-out log-RMSE per (model kind, n_train), averaged over seeds.

    Without a loader, data comes from the synthetic multiplicative-cost
    suite: training points concentrated in a random sub-box, test points
    cube-wide (cost models in an optimization loop predict far from their
    training data).
    """
    results: dict[tuple[str, int], list[float]] = {}
    skipped: set[tuple[str, int]] = set()
    for seed in range(seeds):
        rng = np.random.default_rng(1000 + seed)
        if samples_loader is None:
            eval_space, train_pool, test = cost_suite_split(
                rng, max(train_sizes), n_test=test_size
            )
        else:
            pool, eval_space = samples_loader(rng)
            test = pool[-test_size:] if len(pool) > test_size else pool[len(pool) // 2 :]
            train_pool = pool[: len(pool) - len(test)]
        U_test = _unit_matrix(eval_space, test)
        log_test = _log_costs(test)
        for n_train in train_sizes:
            if n_train > len(train_pool):
                skipped.add(("*", n_train))
                continue
            train = train_pool[:n_train]
            U = _unit_matrix(eval_space, train)
            costs = np.array([s.cost for s in train])
            for kind in kinds:
                model = fit_cost_model_unit(
                    kind, eval_space, U, costs, np.random.default_rng(seed)
                )
                pred = model.predict_log_unit(U_test)
                rmse = float(np.sqrt(np.mean((pred - log_test) ** 2)))
                results.setdefault((kind, n_train), []).append(rmse)
    for kind, n_train in sorted(skipped):
        print(
            f"warning: n_train={n_train} exceeds the dataset size; skipped",
            file=sys.stderr,
        )
    out = []
    for (kind, n_train), rmses in sorted(results.items()):
        ci = bootstrap_ci(np.array(rmses))
        out.append(
            {
                "kind": kind,
                "n_train": n_train,
                "mean_log_rmse": float(np.mean(rmses)),
                "ci_lo": ci[0],
                "ci_hi": ci[1],
                "seeds": len(rmses),
            }
        )
    return out


def transfer_loto(seeds: int, n_tasks: int = 5, n_per_task: int = 40) -> list[dict]:
    """Leave-one-task-out comparison of transfer cost models."""
    space = cost_bench_space(7)
    coefs = np.array([2.0, 0.0, -1.5, 0.0, 1.0, 0.0, 0.0])
    rmses: dict[str, list[float]] = {"transfer_task_aware": [], "transfer_naive": []}
    for seed in range(seeds):
        rng = np.random.default_rng(5000 + seed)
        data = synthetic_transfer_tasks(space, n_tasks, n_per_task, rng, coefs)
        for held_out in range(n_tasks):
            train_tasks = [t for i, t in enumerate(data.tasks) if i != held_out]
            meta, test_samples = data.tasks[held_out]
            train_data = type(data)(tasks=train_tasks)
            for kind in ("task_aware", "naive"):
                model = transfer_fit(space, train_data, kind)
                rmses[f"transfer_{kind}"].append(
                    cost_rmse(model, test_samples, meta=meta)
                )
    out = []
    for kind, values in sorted(rmses.items()):
        ci = bootstrap_ci(np.array(values))
        out.append(
            {
                "kind": kind,
                "mean_log_rmse": float(np.mean(values)),
                "ci_lo": ci[0],
                "ci_hi": ci[1],
                "evaluations": len(values),
            }
        )
    return out


def cmd_cost_eval(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    loader = None
    if args.data:
        if not args.space_file:
            raise ConfigError("--data needs --space-file for the dimension layout")
        space = SearchSpace.load(args.space_file)
        samples = load_cost_csv(args.data, space)

        def loader(rng):
            idx = rng.permutation(len(samples))
            return [samples[i] for i in idx], space

    table = cost_model_sweep(
        _parse_ints(args.train_sizes), args.seeds, samples_loader=loader
    )
    _write_csv(out_dir / "cost_eval.csv", table)
    transfer_table = transfer_loto(args.seeds)
    _write_csv(out_dir / "transfer_eval.csv", transfer_table)
    for row in table:
        print(
            f"{row['kind']:>12} n={row['n_train']:<4} "
            f"log-RMSE {row['mean_log_rmse']:.4f} "
            f"[{row['ci_lo']:.4f}, {row['ci_hi']:.4f}]"
        )
    for row in transfer_table:
        print(f"{row['kind']:>20}: log-RMSE {row['mean_log_rmse']:.4f}")
    return 0


# ---------------------------------------------------------------------------
# pareto-trace: full front logging for one run
# ---------------------------------------------------------------------------


def _marker_rows(record) -> list[dict]:
    """EI_alpha maximizers over the stored front (argmax is front-invariant)."""
    rows = []
    eis = np.array([c.ei for c in record.front])
    costs = np.array([c.cost_pred for c in record.front])
    for alpha in MARKER_ALPHAS:
        scores = eis / costs**alpha
        idx = acq._argmax_with_tiebreak(scores, costs)
        rows.append(
            {
                "iteration": record.iteration,
                "alpha": alpha,
                "ei": float(eis[idx]),
                "cost": float(costs[idx]),
            }
        )
    return rows


def cmd_pareto_trace(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    problem = build_problem(args.problem, args.noise, seed=args.seed)
    cfg = RunConfig(
        seed=args.seed,
        acquisition=acq.parse_kind(args.acq),
        cost_model=args.cost_model,
        budget=Iterations(args.iters),
        candidate_count=args.candidates,
    )
    trace = run(problem, cfg, track_persistence=True)
    trace.write(out_dir / "trace.jsonl")

    bo_records = [r for r in trace.records if r.phase == "bo" and r.front is not None]
    front_rows, marker_rows, persistence_rows, alpha_rows = [], [], [], []
    for i, record in enumerate(bo_records):
        next_rec = bo_records[i + 1] if i + 1 < len(bo_records) else None
        flags = (
            next_rec.persistence.flags
            if next_rec is not None and next_rec.persistence is not None
            else None
        )
        for j, cand in enumerate(record.front):
            front_rows.append(
                {
                    "iteration": record.iteration,
                    "ei": cand.ei,
                    "cost": cand.cost_pred,
                    "survived_flag": ""
                    if flags is None or j >= len(flags)
                    else int(flags[j]),
                }
            )
        marker_rows.extend(_marker_rows(record))
        if record.persistence is not None:
            persistence_rows.append(
                {
                    "iteration": record.iteration,
                    "survived": record.persistence.survived,
                    "total": record.persistence.total,
                }
            )
        alpha_rows.append(
            {
                "iteration": record.iteration,
                "implied_alpha": ""
                if record.implied_alpha is None
                else record.implied_alpha,
                "cei_threshold": ""
                if record.cei_threshold is None
                else record.cei_threshold,
            }
        )
    _write_csv(out_dir / "fronts.csv", front_rows)
    _write_csv(out_dir / "markers.csv", marker_rows)
    _write_csv(out_dir / "persistence.csv", persistence_rows)
    _write_csv(out_dir / "implied_alpha.csv", alpha_rows)
    print(
        f"wrote {len(front_rows)} front points over {len(bo_records)} iterations "
        f"to {out_dir}"
    )
    return 0


# ---------------------------------------------------------------------------
# run: a single optimization run
# ---------------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.table:
        if not args.space_file:
            raise ConfigError("--table needs --space-file")
        space = SearchSpace.load(args.space_file)
        problem = load_tabular(args.table, space)
    else:
        problem = build_problem(args.problem, args.noise, seed=args.seed)
    budget = (
        SimulatedCost(args.budget) if args.budget is not None else Iterations(args.iters)
    )
    cfg = RunConfig(
        seed=args.seed,
        acquisition=acq.parse_kind(args.acq),
        cost_model=args.cost_model,
        budget=budget,
        candidate_count=args.candidates,
    )
    trace = run(problem, cfg)
    trace.write(out_dir / "trace.jsonl")
    row = summary_row(trace)
    _write_csv(out_dir / "summary.csv", [row])
    print(
        f"{problem.name} seed={args.seed}: best {trace.final_incumbent:.6g} "
        f"after {len(trace)} evaluations, total cost {trace.total_cost:.6g}"
    )
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _parse_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip() != ""]


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--suite", default="default", help="problem suite name")
    parser.add_argument("--seeds", type=int, default=20, help="seeds per problem")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    parser.add_argument("--noise", type=float, default=0.0, help="objective noise sd")
    parser.add_argument("--cost-model", default="lv3", choices=ONLINE_COST_KINDS)
    parser.add_argument("--candidates", type=int, default=1024)
    parser.add_argument("--config", default=None, help="JSON file with overrides")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paretobo",
        description="Cost-aware Bayesian optimization experiment harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single optimization run")
    _add_shared(p)
    p.add_argument("--problem", default="branin/explinear")
    p.add_argument("--table", default=None, help="tabular replay CSV")
    p.add_argument("--space-file", default=None, help="space JSON for --table")
    p.add_argument("--acq", default="ei")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--budget", type=float, default=None, help="simulated-cost cap")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("biopt", help="fixed-iteration trade-off grid")
    _add_shared(p)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--alphas", default="0.1,0.3,1", help="EI_alpha grid")
    p.add_argument("--lambdas", default="", help="CEI lambda grid")
    p.add_argument("--eipu", action="store_true", help="include the EIpu baseline")
    p.set_defaults(func=cmd_biopt)

    p = sub.add_parser("time-alloc", help="average ranks at budget multiples")
    _add_shared(p)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--alphas", default="0.1,0.3,1")
    p.add_argument("--lambdas", default="0.5")
    p.add_argument("--multiples", default="1,5,10,20")
    p.add_argument("--runs", default=None, help="reuse traces from this directory")
    p.set_defaults(func=cmd_time_alloc)

    p = sub.add_parser("rank", help="re-aggregate ranks from stored traces")
    p.add_argument("--runs", required=True)
    p.add_argument("--multiples", default="1,5,10,20")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("cost-eval", help="cost-model accuracy protocols")
    _add_shared(p)
    p.add_argument("--train-sizes", default="4,8,16,32,64")
    p.add_argument("--data", default=None, help="cost samples CSV")
    p.add_argument("--space-file", default=None, help="space JSON for --data")
    p.set_defaults(func=cmd_cost_eval)

    p = sub.add_parser("pareto-trace", help="one run with full front logging")
    _add_shared(p)
    p.add_argument("--problem", default="branin/explinear")
    p.add_argument("--acq", default="ei")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=30)
    p.set_defaults(func=cmd_pareto_trace)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParetoBOError as err:
        record = {"error": type(err).__name__, "message": str(err)}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
