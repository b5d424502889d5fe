"""Cost-aware acquisition functions and Pareto-front selection.

The family implemented here scores candidates in the (expected improvement,
predicted cost) plane:

- ``EI``                 plain expected improvement,
- ``EIpu``               EI per unit cost, EI(x) / c(x),
- ``EIAlpha(alpha)``     scalarization EI(x) / c(x)**alpha,
- ``EICool``             EIAlpha with alpha decaying from 1 to 0 as the
                         budget is consumed,
- ``CEI(lam)``           minimum predicted cost among candidates whose EI is
                         at least (1 - lam) times the maximum EI.

Selection happens over a finite candidate set (quasi-random points plus
local perturbations of past evaluations), which makes the per-iteration
EI-cost Pareto front an explicit, loggable object. Every selection rule
here returns a candidate that is non-dominated within its candidate set.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.special import ndtr
from scipy.stats import qmc

from .errors import ConfigError, NumericError, UsageError
from .surrogate import GPModel, gp_posterior_many

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Candidate generation defaults: see propose().
DEFAULT_CANDIDATE_COUNT = 2048
PERTURBATIONS_PER_HISTORY_POINT = 10
PERTURBATION_SD = 0.05

# Scan grid for implied_alpha(): alpha = 0 plus a log-spaced sweep up to 8.
IMPLIED_ALPHA_GRID = np.concatenate(
    [[0.0], np.logspace(-3, math.log10(8.0), 120)]
)


@dataclass(frozen=True)
class EI:
    """Plain expected improvement."""


@dataclass(frozen=True)
class EIpu:
    """Expected improvement per unit cost."""


@dataclass(frozen=True)
class EIAlpha:
    """EI / cost**alpha with a fixed exponent."""

    alpha: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")


@dataclass(frozen=True)
class EICool:
    """EI / cost**alpha with alpha decaying from 1 to 0 over the budget.

    ``total_budget``/``init_budget`` may be left as None and resolved by the
    optimization loop (total from the run budget, init from the cost of the
    initial design).
    """

    total_budget: float | None = None
    init_budget: float | None = None


@dataclass(frozen=True)
class CEI:
    """Cost minimization constrained to near-maximal EI."""

    lam: float

    def __post_init__(self):
        if not (0.0 <= self.lam <= 1.0):
            raise ConfigError(f"lambda must be in [0, 1], got {self.lam}")


AcquisitionKind = EI | EIpu | EIAlpha | EICool | CEI


@dataclass(frozen=True)
class Candidate:
    """A proposed point scored with (EI, predicted cost)."""

    point: np.ndarray
    ei: float
    cost_pred: float


@dataclass
class SelectionResult:
    """Outcome of one acquisition step over a scored candidate set."""

    chosen: Candidate
    chosen_index: int
    front: list[Candidate]
    candidates: list[Candidate]
    threshold: float | None = None
    degenerate: bool = False


def ei(mu, sigma, f_min):
    """Expected improvement under a Gaussian posterior, minimization form.

    For sigma > 0 returns (f_min - mu) * Phi(z) + sigma * phi(z) with
    z = (f_min - mu) / sigma; for sigma = 0 the deterministic improvement
    max(0, f_min - mu). Accepts scalars or arrays; always nonnegative.
    """
    mu_arr = np.asarray(mu, dtype=float)
    sigma_arr = np.asarray(sigma, dtype=float)
    if not (
        np.all(np.isfinite(mu_arr))
        and np.all(np.isfinite(sigma_arr))
        and np.isfinite(f_min)
    ):
        raise NumericError("non-finite inputs to ei()")
    if np.any(sigma_arr < 0):
        raise NumericError("negative sigma in ei()")

    gap = f_min - mu_arr
    z = np.where(sigma_arr > 0, gap / np.where(sigma_arr > 0, sigma_arr, 1.0), 0.0)
    pdf = _INV_SQRT2PI * np.exp(-0.5 * z * z)
    cdf = ndtr(z)
    value = np.where(sigma_arr > 0, gap * cdf + sigma_arr * pdf, np.maximum(gap, 0.0))
    value = np.maximum(value, 0.0)
    if np.ndim(mu) == 0 and np.ndim(sigma) == 0:
        return float(value)
    return value


def ei_gradients(mu: float, sigma: float, f_min: float) -> tuple[float, float]:
    """Analytic (dEI/dmu, dEI/dsigma); requires sigma > 0."""
    if sigma <= 0:
        raise NumericError("ei_gradients requires sigma > 0")
    z = (f_min - mu) / sigma
    pdf = _INV_SQRT2PI * math.exp(-0.5 * z * z)
    cdf = 0.5 * (1.0 + math.erf(z * _INV_SQRT2))
    return -cdf, pdf


def ei_cool_alpha(total_budget: float, init_budget: float, spent: float) -> float:
    """Cooling exponent (total - spent) / (total - init), clamped to [0, 1]."""
    if total_budget <= init_budget:
        raise ConfigError(
            f"total budget ({total_budget}) must exceed init budget ({init_budget})"
        )
    alpha = (total_budget - spent) / (total_budget - init_budget)
    return min(max(alpha, 0.0), 1.0)


def score(kind: AcquisitionKind, cand: Candidate, spent: float = 0.0) -> float:
    """Pointwise acquisition value of a scored candidate.

    CEI has no pointwise score (its rule is selection-level); passing it
    here is a usage error.
    """
    if isinstance(kind, CEI):
        raise UsageError("CEI has no pointwise score; use cei_select/select")
    return cand.ei / cand.cost_pred ** _effective_alpha(kind, spent)


Dominance = Literal["strict", "weak", "none"]


def dominates(p: Candidate, q: Candidate) -> Dominance:
    """Dominance of p over q in the (cost, EI) plane.

    Weak: p costs no more and has at least the EI of q. Strict: weak with
    at least one inequality strict.
    """
    if p.cost_pred <= q.cost_pred and p.ei >= q.ei:
        if p.cost_pred < q.cost_pred or p.ei > q.ei:
            return "strict"
        return "weak"
    return "none"


def pareto_front(cands: Sequence[Candidate]) -> list[Candidate]:
    """Non-dominated candidates, sorted by ascending predicted cost.

    Duplicates (identical cost and EI) are all retained.
    """
    if not cands:
        raise UsageError("pareto_front needs at least one candidate")
    costs = np.array([c.cost_pred for c in cands])
    eis = np.array([c.ei for c in cands])
    order = np.lexsort((-eis, costs))

    front: list[Candidate] = []
    best_cheaper = -math.inf
    i = 0
    while i < len(order):
        j = i
        cost_here = costs[order[i]]
        while j < len(order) and costs[order[j]] == cost_here:
            j += 1
        group = order[i:j]
        group_max = eis[group[0]]  # sorted descending within equal cost
        if group_max > best_cheaper:
            front.extend(cands[k] for k in sorted(g for g in group if eis[g] == group_max))
        best_cheaper = max(best_cheaper, group_max)
        i = j
    return front


def _argmax_with_tiebreak(scores: np.ndarray, costs: np.ndarray) -> int:
    """Index of the best score; ties go to lower cost, then lower index."""
    tied = np.flatnonzero(scores == scores.max())
    tied = tied[costs[tied] == costs[tied].min()]
    return int(tied[0])


def _effective_alpha(kind: AcquisitionKind, spent: float) -> float:
    """Cost exponent implied by an EI-family acquisition kind."""
    if isinstance(kind, EI):
        return 0.0
    if isinstance(kind, EIpu):
        return 1.0
    if isinstance(kind, EIAlpha):
        return kind.alpha
    if isinstance(kind, EICool):
        if kind.total_budget is None or kind.init_budget is None:
            raise ConfigError("EICool budgets not resolved")
        return ei_cool_alpha(kind.total_budget, kind.init_budget, spent)
    raise UsageError(f"{kind!r} has no pointwise cost exponent")


def cei_select(cands: Sequence[Candidate], lam: float) -> SelectionResult:
    """Minimum-cost candidate among those with EI >= (1 - lam) * max EI.

    Cost ties go to the higher EI, then to the lower index. The chosen
    candidate is always non-dominated within ``cands``.
    """
    if not cands:
        raise UsageError("cei_select needs at least one candidate")
    if not (0.0 <= lam <= 1.0):
        raise ConfigError(f"lambda must be in [0, 1], got {lam}")
    eis = np.array([c.ei for c in cands])
    costs = np.array([c.cost_pred for c in cands])
    threshold = (1.0 - lam) * float(np.max(eis))
    feasible = np.flatnonzero(eis >= threshold)

    # min cost, then max EI, then lowest index
    at_min_cost = feasible[costs[feasible] == costs[feasible].min()]
    chosen_idx = int(at_min_cost[eis[at_min_cost] == eis[at_min_cost].max()][0])
    return SelectionResult(
        chosen=cands[chosen_idx],
        chosen_index=chosen_idx,
        front=pareto_front(cands),
        candidates=list(cands),
        threshold=threshold,
        degenerate=bool(np.max(eis) <= 0.0),
    )


def select(
    kind: AcquisitionKind, cands: Sequence[Candidate], spent: float = 0.0
) -> SelectionResult:
    """Apply an acquisition rule to an already-scored candidate set."""
    if isinstance(kind, CEI):
        return cei_select(cands, kind.lam)
    if not cands:
        raise UsageError("select needs at least one candidate")
    costs = np.array([c.cost_pred for c in cands])
    eis = np.array([c.ei for c in cands])
    scores = eis / costs ** _effective_alpha(kind, spent)
    chosen_idx = _argmax_with_tiebreak(scores, costs)
    return SelectionResult(
        chosen=cands[chosen_idx],
        chosen_index=chosen_idx,
        front=pareto_front(cands),
        candidates=list(cands),
        threshold=None,
        degenerate=bool(np.max(eis) <= 0.0),
    )


def generate_candidates(
    dim: int,
    history_points: np.ndarray | None,
    candidate_count: int,
    rng: np.random.Generator,
    candidate_pool: np.ndarray | None = None,
    perturbations_per_point: int = PERTURBATIONS_PER_HISTORY_POINT,
    perturbation_sd: float = PERTURBATION_SD,
) -> np.ndarray:
    """Candidate set: quasi-random points plus local history perturbations.

    When ``candidate_pool`` is given (tabular replay), candidates are drawn
    from the pool instead, so proposals always land on recorded rows.
    """
    if candidate_count < 1:
        raise ConfigError(f"candidate_count must be >= 1, got {candidate_count}")
    if candidate_pool is not None:
        pool = np.atleast_2d(np.asarray(candidate_pool, dtype=float))
        if pool.shape[0] <= candidate_count:
            return pool.copy()
        idx = rng.choice(pool.shape[0], size=candidate_count, replace=False)
        return pool[np.sort(idx)]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # non-power-of-two draws
        sobol = qmc.Sobol(d=dim, scramble=True, seed=rng)
        cands = sobol.random(candidate_count)
    if history_points is not None and len(history_points) > 0 and perturbations_per_point > 0:
        hist = np.atleast_2d(np.asarray(history_points, dtype=float))
        noise = rng.normal(
            0.0, perturbation_sd, size=(hist.shape[0], perturbations_per_point, dim)
        )
        local = np.clip(hist[:, None, :] + noise, 0.0, 1.0).reshape(-1, dim)
        cands = np.vstack([cands, local])
    return cands


def score_candidates(
    points: np.ndarray,
    model: GPModel,
    cost_predictions: np.ndarray,
    f_min: float,
    cost_floor: float,
) -> list[Candidate]:
    """Score unit-cube points with (EI, clamped predicted cost)."""
    means, variances = gp_posterior_many(model, points)
    sigmas = np.sqrt(variances)
    eis = ei(means, sigmas, f_min)
    costs = np.maximum(np.asarray(cost_predictions, dtype=float), cost_floor)
    return [
        Candidate(point=points[i].copy(), ei=float(eis[i]), cost_pred=float(costs[i]))
        for i in range(points.shape[0])
    ]


def propose(
    kind: AcquisitionKind,
    model: GPModel,
    cost_model,
    history_points: np.ndarray,
    history_targets: np.ndarray,
    observed_costs: np.ndarray,
    candidate_count: int,
    rng: np.random.Generator,
    spent: float = 0.0,
    candidate_pool: np.ndarray | None = None,
    perturbations_per_point: int = PERTURBATIONS_PER_HISTORY_POINT,
    perturbation_sd: float = PERTURBATION_SD,
) -> SelectionResult:
    """One acquisition step: generate, score, and select a candidate.

    ``cost_model`` must expose ``predict_unit(points) -> costs`` over unit
    coordinates. Predicted costs are clamped below at
    max(1e-6, 0.01 * min observed cost) to avoid the divide-by-vanishing-cost
    pathology of cost-normalized acquisitions.
    """
    points = generate_candidates(
        model.train_inputs.shape[1],
        history_points,
        candidate_count,
        rng,
        candidate_pool,
        perturbations_per_point,
        perturbation_sd,
    )
    f_min = float(np.min(history_targets))
    cost_floor = 1e-6
    if len(observed_costs) > 0:
        cost_floor = max(1e-6, 0.01 * float(np.min(observed_costs)))
    cost_pred = cost_model.predict_unit(points)
    cands = score_candidates(points, model, cost_pred, f_min, cost_floor)
    return select(kind, cands, spent)


def kind_to_dict(kind: AcquisitionKind) -> dict:
    """JSON-friendly encoding of an acquisition kind."""
    if isinstance(kind, EI):
        return {"kind": "ei"}
    if isinstance(kind, EIpu):
        return {"kind": "eipu"}
    if isinstance(kind, EIAlpha):
        return {"kind": "ei_alpha", "alpha": kind.alpha}
    if isinstance(kind, EICool):
        return {
            "kind": "ei_cool",
            "total_budget": kind.total_budget,
            "init_budget": kind.init_budget,
        }
    if isinstance(kind, CEI):
        return {"kind": "cei", "lam": kind.lam}
    raise ConfigError(f"unknown acquisition kind {kind!r}")


def kind_from_dict(payload: dict) -> AcquisitionKind:
    name = payload.get("kind")
    if name == "ei":
        return EI()
    if name == "eipu":
        return EIpu()
    if name == "ei_alpha":
        return EIAlpha(alpha=float(payload["alpha"]))
    if name == "ei_cool":
        return EICool(
            total_budget=payload.get("total_budget"),
            init_budget=payload.get("init_budget"),
        )
    if name == "cei":
        return CEI(lam=float(payload["lam"]))
    raise ConfigError(f"unknown acquisition kind {payload!r}")


def parse_kind(text: str) -> AcquisitionKind:
    """Parse CLI notation: ei, eipu, alpha:0.5, cei:0.25, ei-cool[:TOTAL]."""
    parts = text.strip().lower().split(":")
    name = parts[0]
    if name == "ei":
        return EI()
    if name == "eipu":
        return EIpu()
    if name in ("alpha", "ei-alpha", "ei_alpha"):
        if len(parts) != 2:
            raise ConfigError(f"expected alpha:<value>, got {text!r}")
        return EIAlpha(alpha=float(parts[1]))
    if name == "cei":
        if len(parts) != 2:
            raise ConfigError(f"expected cei:<lambda>, got {text!r}")
        return CEI(lam=float(parts[1]))
    if name in ("ei-cool", "ei_cool", "cool"):
        total = float(parts[1]) if len(parts) > 1 else None
        init = float(parts[2]) if len(parts) > 2 else None
        return EICool(total_budget=total, init_budget=init)
    raise ConfigError(f"unknown acquisition {text!r}")


def kind_id(kind: AcquisitionKind) -> str:
    """Compact identifier used in file names and tables."""
    if isinstance(kind, EI):
        return "ei"
    if isinstance(kind, EIpu):
        return "eipu"
    if isinstance(kind, EIAlpha):
        return f"alpha{kind.alpha:g}"
    if isinstance(kind, EICool):
        return "ei-cool"
    if isinstance(kind, CEI):
        return f"cei{kind.lam:g}"
    raise ConfigError(f"unknown acquisition kind {kind!r}")


def implied_alpha(sel: SelectionResult) -> float | None:
    """Exponent that EIAlpha would have needed to pick the same candidate.

    Scans a fixed grid (0 plus log-spaced values up to 8), finds the longest
    contiguous run of grid values whose EIAlpha argmax (same tie-breaks)
    matches the selection, and returns that run's midpoint. None when no
    grid value reproduces the choice.
    """
    eis = np.array([c.ei for c in sel.candidates])
    costs = np.array([c.cost_pred for c in sel.candidates])
    matches = np.zeros(len(IMPLIED_ALPHA_GRID), dtype=bool)
    for g, alpha in enumerate(IMPLIED_ALPHA_GRID):
        scores = eis / costs**alpha
        matches[g] = _argmax_with_tiebreak(scores, costs) == sel.chosen_index

    best_len, best_start = 0, -1
    run_len, run_start = 0, 0
    for g, hit in enumerate(matches):
        if hit:
            if run_len == 0:
                run_start = g
            run_len += 1
            if run_len > best_len:
                best_len, best_start = run_len, run_start
        else:
            run_len = 0
    if best_len == 0:
        return None
    lo = IMPLIED_ALPHA_GRID[best_start]
    hi = IMPLIED_ALPHA_GRID[best_start + best_len - 1]
    return float(0.5 * (lo + hi))
