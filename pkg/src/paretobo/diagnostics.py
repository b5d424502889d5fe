"""Instrumentation for the EI-cost front dynamics across iterations.

Two views of why the front moves between consecutive iterations:

- ``ei_decomposition`` splits the change in a point's EI into the incumbent
  shift (constant across the space) and a residual local term driven by the
  surrogate update. The two terms sum to the exact delta by construction.
- ``front_persistence`` re-scores the previous iteration's front under the
  new surrogate/cost models and counts how many points remain non-dominated
  against the current front.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .acquisition import Candidate, ei, pareto_front
from .cost import CostModel
from .surrogate import GPModel, gp_posterior_many


@dataclass(frozen=True)
class EIDecomposition:
    """Exact two-term split of EI_{t+1}(x) - EI_t(x)."""

    global_term: float  # incumbent shift, constant across the space
    local_term: float   # residual: surrogate-update effect at x
    exact_delta: float


@dataclass(frozen=True)
class FrontSnapshot:
    """The non-dominated candidate set at one iteration."""

    iteration: int
    front: tuple[Candidate, ...]


@dataclass(frozen=True)
class PersistenceStat:
    """How much of a previous front survives re-scoring."""

    survived: int
    total: int
    rescored: tuple[tuple[tuple[float, float], tuple[float, float]], ...]
    flags: tuple[bool, ...] = ()


def _ei_at(model: GPModel, x: np.ndarray, f_min: float) -> float:
    means, variances = gp_posterior_many(model, np.asarray(x, float)[None, :])
    return float(ei(float(means[0]), float(np.sqrt(variances[0])), f_min))


def ei_decomposition(
    model_t: GPModel,
    model_t1: GPModel,
    y_min_t: float,
    y_min_t1: float,
    x: np.ndarray,
) -> EIDecomposition:
    """Split the EI change at ``x`` between iterations t and t+1.

    global_term is the incumbent difference y_min(t+1) - y_min(t);
    local_term is defined as the residual so that
    global_term + local_term == exact_delta exactly.
    """
    ei_t = _ei_at(model_t, x, y_min_t)
    ei_t1 = _ei_at(model_t1, x, y_min_t1)
    exact_delta = ei_t1 - ei_t
    global_term = y_min_t1 - y_min_t
    return EIDecomposition(
        global_term=global_term,
        local_term=exact_delta - global_term,
        exact_delta=exact_delta,
    )


def rescore(
    points: Sequence[np.ndarray],
    model: GPModel,
    cost_model: CostModel,
    f_min: float,
    cost_floor: float = 1e-6,
) -> list[Candidate]:
    """Score points under (new) surrogate and cost models."""
    pts = np.array([np.asarray(p, float) for p in points])
    means, variances = gp_posterior_many(model, pts)
    eis = ei(means, np.sqrt(variances), f_min)
    costs = np.maximum(cost_model.predict_unit(pts), cost_floor)
    return [
        Candidate(point=pts[i].copy(), ei=float(eis[i]), cost_pred=float(costs[i]))
        for i in range(len(pts))
    ]


def front_persistence(
    prev: FrontSnapshot,
    model_t1: GPModel,
    cost_model_t1: CostModel,
    y_min_t1: float,
    current_front: Sequence[Candidate],
    cost_floor: float = 1e-6,
) -> PersistenceStat:
    """Survival of the previous front under the new models.

    Each previous front point is re-scored with the new surrogate and cost
    model; it survives if it is non-dominated within the union of the
    re-scored previous front and the current candidate front.
    """
    old = list(prev.front)
    new_scores = rescore(
        [c.point for c in old], model_t1, cost_model_t1, y_min_t1, cost_floor
    )
    union = new_scores + list(current_front)
    surviving_ids = {id(c) for c in pareto_front(union)}
    flags = tuple(id(c) in surviving_ids for c in new_scores)
    rescored = tuple(
        ((c.ei, c.cost_pred), (n.ei, n.cost_pred)) for c, n in zip(old, new_scores)
    )
    return PersistenceStat(
        survived=sum(flags), total=len(old), rescored=rescored, flags=flags
    )
