"""Sequential optimization loop: init design, refits, proposals, budgets.

One run is strictly sequential and fully determined by its seed: the initial
design, every surrogate/cost-model refit, and candidate generation all draw
from a single seeded generator, so identical configs produce byte-identical
trace files. Budgets are either a fixed evaluation count or a simulated-cost
cap; the evaluation that crosses a cost cap is kept and flagged rather than
discarded, mirroring a wall-clock run where a started job completes.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import acquisition as acq
from .acquisition import AcquisitionKind, Candidate, implied_alpha
from .bench import BlackBox
from .cost import CostModel, fit_cost_model_unit
from .diagnostics import FrontSnapshot, PersistenceStat, front_persistence
from .errors import ConfigError
from .space import from_unit, sample_uniform
from .surrogate import gp_fit


@dataclass(frozen=True)
class Observation:
    """One black-box query in unit coordinates."""

    point: np.ndarray
    y: float
    cost: float
    failed: bool = False


@dataclass(frozen=True)
class Iterations:
    """Budget: a fixed number of evaluations."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"iteration budget must be >= 1, got {self.n}")


@dataclass(frozen=True)
class SimulatedCost:
    """Budget: a cap on cumulative simulated cost."""

    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigError(f"cost budget must be positive, got {self.tau}")


Budget = Iterations | SimulatedCost


@dataclass(frozen=True)
class RunConfig:
    seed: int
    acquisition: AcquisitionKind = acq.EI()
    cost_model: str = "lv3"
    budget: Budget = Iterations(50)
    init_design_size: int | None = None  # default: max(5, dimension count)
    candidate_count: int = acq.DEFAULT_CANDIDATE_COUNT
    perturbations_per_point: int = acq.PERTURBATIONS_PER_HISTORY_POINT
    perturbation_sd: float = acq.PERTURBATION_SD
    gp_restarts: int = 2

    def to_dict(self) -> dict:
        budget = (
            {"iterations": self.budget.n}
            if isinstance(self.budget, Iterations)
            else {"simulated_cost": self.budget.tau}
        )
        return {
            "seed": self.seed,
            "acquisition": acq.kind_to_dict(self.acquisition),
            "cost_model": self.cost_model,
            "budget": budget,
            "init_design_size": self.init_design_size,
            "candidate_count": self.candidate_count,
            "perturbations_per_point": self.perturbations_per_point,
            "perturbation_sd": self.perturbation_sd,
            "gp_restarts": self.gp_restarts,
        }

    def config_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass
class IterationRecord:
    iteration: int
    phase: str  # "init" or "bo"
    point: np.ndarray
    config: np.ndarray
    y: float
    cost: float
    cumulative_cost: float
    incumbent: float
    failed: bool = False
    over_budget: bool = False
    max_ei: float | None = None
    chosen_ei: float | None = None
    chosen_cost_pred: float | None = None
    cei_threshold: float | None = None
    implied_alpha: float | None = None
    degenerate: bool | None = None
    front: tuple[Candidate, ...] | None = None
    persistence: PersistenceStat | None = None

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "phase": self.phase,
            "point": [float(v) for v in self.point],
            "config": [float(v) for v in self.config],
            "y": self.y,
            "cost": self.cost,
            "cumulative_cost": self.cumulative_cost,
            "incumbent": self.incumbent,
            "failed": self.failed,
            "over_budget": self.over_budget,
            "max_ei": self.max_ei,
            "chosen_ei": self.chosen_ei,
            "chosen_cost_pred": self.chosen_cost_pred,
            "cei_threshold": self.cei_threshold,
            "implied_alpha": self.implied_alpha,
            "degenerate": self.degenerate,
            "front": None
            if self.front is None
            else [[c.ei, c.cost_pred] for c in self.front],
            "persistence": None
            if self.persistence is None
            else [self.persistence.survived, self.persistence.total],
        }


@dataclass
class Trace:
    records: list[IterationRecord]
    problem: dict = field(default_factory=dict)
    run_config: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def total_cost(self) -> float:
        return self.records[-1].cumulative_cost if self.records else 0.0

    @property
    def final_incumbent(self) -> float:
        return self.records[-1].incumbent if self.records else math.inf

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {"type": "meta", "problem": self.problem, "config": self.run_config},
                sort_keys=True,
            )
        ]
        lines.extend(json.dumps(r.to_dict(), sort_keys=True) for r in self.records)
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())


def read_trace(path: str | Path) -> Trace:
    """Reload a trace written by :meth:`Trace.write` (fronts as (ei, cost))."""
    records: list[IterationRecord] = []
    problem: dict = {}
    run_config: dict = {}
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            payload = json.loads(line)
            if payload.get("type") == "meta":
                problem = payload.get("problem", {})
                run_config = payload.get("config", {})
                continue
            front = payload.get("front")
            records.append(
                IterationRecord(
                    iteration=payload["iteration"],
                    phase=payload["phase"],
                    point=np.array(payload["point"]),
                    config=np.array(payload["config"]),
                    y=payload["y"],
                    cost=payload["cost"],
                    cumulative_cost=payload["cumulative_cost"],
                    incumbent=payload["incumbent"],
                    failed=payload["failed"],
                    over_budget=payload["over_budget"],
                    max_ei=payload.get("max_ei"),
                    chosen_ei=payload.get("chosen_ei"),
                    chosen_cost_pred=payload.get("chosen_cost_pred"),
                    cei_threshold=payload.get("cei_threshold"),
                    implied_alpha=payload.get("implied_alpha"),
                    degenerate=payload.get("degenerate"),
                    front=None
                    if front is None
                    else tuple(
                        Candidate(point=np.empty(0), ei=e, cost_pred=c)
                        for e, c in front
                    ),
                )
            )
    return Trace(records=records, problem=problem, run_config=run_config)


def constrained_best(trace: Trace, tau: float) -> tuple[float, float]:
    """Incumbent and spend over the prefix with cumulative cost <= tau.

    Returns (+inf, 0) when even the first evaluation exceeds the budget.
    """
    if tau <= 0:
        raise ConfigError(f"tau must be positive, got {tau}")
    best_y = math.inf
    spend = 0.0
    for record in trace.records:
        if record.cumulative_cost > tau:
            break
        spend = record.cumulative_cost
        if not record.failed and record.y < best_y:
            best_y = record.y
    if spend == 0.0:
        return math.inf, 0.0
    return best_y, spend


def _resolve_ei_cool(
    kind: acq.EICool, budget: Budget, init_cost: float
) -> acq.EICool:
    total = kind.total_budget
    if total is None:
        if isinstance(budget, SimulatedCost):
            total = budget.tau
        else:
            raise ConfigError(
                "EI-cool needs a total cost budget: set total_budget or use a "
                "SimulatedCost budget"
            )
    init = kind.init_budget if kind.init_budget is not None else init_cost
    if total <= init:
        raise ConfigError(
            f"EI-cool total budget ({total}) must exceed init budget ({init})"
        )
    return acq.EICool(total_budget=total, init_budget=init)


def _failure_cost(cost_pred: float | None, observed: list[float]) -> float:
    if cost_pred is not None:
        return cost_pred
    if observed:
        return float(np.exp(np.mean(np.log(observed))))
    return 1.0


def run(
    problem: BlackBox,
    cfg: RunConfig,
    fixed_cost_model: CostModel | None = None,
    track_persistence: bool = False,
) -> Trace:
    """Execute one budgeted optimization run and return its trace.

    ``fixed_cost_model`` (e.g. a transfer model fitted offline) disables the
    per-iteration cost-model refit. ``track_persistence`` re-scores each
    iteration's previous front under the new models for front diagnostics.
    """
    rng = np.random.default_rng(cfg.seed)
    space = problem.space
    dim = len(space)
    init_size = cfg.init_design_size or max(5, dim)

    budget = cfg.budget
    max_records = budget.n if isinstance(budget, Iterations) else None
    tau = budget.tau if isinstance(budget, SimulatedCost) else None

    records: list[IterationRecord] = []
    observations: list[Observation] = []
    cumulative = 0.0
    incumbent = math.inf

    def record_eval(
        point: np.ndarray,
        phase: str,
        sel: acq.SelectionResult | None = None,
        resolved_kind: AcquisitionKind | None = None,
    ) -> IterationRecord:
        nonlocal cumulative, incumbent
        cost_pred = sel.chosen.cost_pred if sel is not None else None
        try:
            y, cost = problem.evaluate(point)
            failed = False
        except Exception:
            y = math.inf
            cost = _failure_cost(
                cost_pred, [o.cost for o in observations if not o.failed]
            )
            failed = True
        cumulative += cost
        if not failed and y < incumbent:
            incumbent = y
        observations.append(Observation(point=point, y=y, cost=cost, failed=failed))
        record = IterationRecord(
            iteration=len(records) + 1,
            phase=phase,
            point=point,
            config=from_unit(space, point),
            y=y,
            cost=cost,
            cumulative_cost=cumulative,
            incumbent=incumbent,
            failed=failed,
            over_budget=tau is not None and cumulative > tau,
        )
        if sel is not None:
            record.max_ei = max(c.ei for c in sel.candidates)
            record.chosen_ei = sel.chosen.ei
            record.chosen_cost_pred = sel.chosen.cost_pred
            record.cei_threshold = sel.threshold
            record.degenerate = sel.degenerate
            record.front = tuple(sel.front)
            if isinstance(resolved_kind, acq.CEI):
                record.implied_alpha = implied_alpha(sel)
        records.append(record)
        return record

    # Initial design.
    init_points = sample_uniform(space, rng, init_size)
    if problem.candidate_pool is not None:
        # Tabular replay: the init design snaps to recorded rows.
        pool = problem.candidate_pool
        idx = rng.choice(pool.shape[0], size=min(init_size, pool.shape[0]), replace=False)
        init_points = pool[np.sort(idx)]
    for point in init_points:
        if max_records is not None and len(records) >= max_records:
            break
        if tau is not None and cumulative >= tau:
            break
        record_eval(point, "init")

    resolved_kind = cfg.acquisition
    if isinstance(resolved_kind, acq.EICool):
        resolved_kind = _resolve_ei_cool(resolved_kind, budget, cumulative)

    gp_params = None
    prev_front: tuple[Candidate, ...] | None = None

    # Sequential loop.
    while True:
        if max_records is not None and len(records) >= max_records:
            break
        if tau is not None and cumulative >= tau:
            break

        valid = [o for o in observations if not o.failed]
        if not valid:
            # No usable data yet (e.g. failing init design): sample uniformly.
            point = sample_uniform(space, rng, 1)[0]
            record_eval(point, "bo")
            continue

        X = np.array([o.point for o in valid])
        ys = np.array([o.y for o in valid])
        costs = np.array([o.cost for o in valid])

        model = gp_fit(X, ys, restarts=cfg.gp_restarts, rng=rng, warm_start=gp_params)
        gp_params = model.params
        cost_model = fixed_cost_model
        if cost_model is None:
            cost_model = fit_cost_model_unit(cfg.cost_model, space, X, costs, rng)

        sel = acq.propose(
            resolved_kind,
            model,
            cost_model,
            history_points=X,
            history_targets=ys,
            observed_costs=costs,
            candidate_count=cfg.candidate_count,
            rng=rng,
            spent=cumulative,
            candidate_pool=problem.candidate_pool,
            perturbations_per_point=cfg.perturbations_per_point,
            perturbation_sd=cfg.perturbation_sd,
        )
        record = record_eval(sel.chosen.point, "bo", sel, resolved_kind)

        if track_persistence and prev_front is not None:
            record.persistence = front_persistence(
                FrontSnapshot(iteration=record.iteration - 1, front=prev_front),
                model,
                cost_model,
                float(np.min(ys)),
                sel.front,
            )
        prev_front = tuple(sel.front)

    return Trace(
        records=records,
        problem=problem.descriptor,
        run_config=cfg.to_dict(),
    )


def summary_row(trace: Trace) -> dict:
    """One-line run summary for the harness CSV."""
    cfg = trace.run_config
    payload = json.dumps(cfg, sort_keys=True)
    return {
        "config_hash": hashlib.sha256(payload.encode()).hexdigest()[:12],
        "seed": cfg.get("seed"),
        "problem": trace.problem.get("name"),
        "final_incumbent": trace.final_incumbent,
        "total_cost": trace.total_cost,
        "iterations": len(trace),
    }
