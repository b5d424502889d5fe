"""Evaluation-cost prediction models.

All models regress the log cost. Features are the unit-cube coordinates of
the configuration, i.e. each dimension enters through its fitting transform
(log for log-scaled dimensions, identity otherwise) rescaled to [0, 1];
predictions with an intercept are invariant to that affine rescaling.

Families:

- ``lv{k}``        ordinary least squares on the k most significant features
                   ("low-variance" linear model),
- ``warped_gp``    GP on all features vs. log cost,
- ``gplv{k}``      LV(k) plus a GP on its log-residuals,
- ``limited_gp3``  GP restricted to the 3 most significant features,
- ``transfer_*``   LV models pooled across tasks, optionally with log
                   dataset meta-features as extra regressors,
- ``constant``     geometric mean of observed costs (low-data fallback).

Predictions are exp(log-space prediction) - the median of the implied
log-normal - which avoids variance blow-ups when GPs extrapolate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError, UsageError
from .space import SearchSpace, to_unit
from .surrogate import GPModel, gp_fit, gp_posterior_many

# Keeps exp() finite while leaving any realistic prediction untouched.
_LOG_CLIP = 300.0

RIDGE_LAMBDA = 1e-8


@dataclass(frozen=True)
class CostSample:
    """One recorded evaluation: native configuration and positive cost."""

    config: np.ndarray
    cost: float

    def __post_init__(self):
        object.__setattr__(self, "config", np.asarray(self.config, dtype=float))
        if not (self.cost > 0 and math.isfinite(self.cost)):
            raise DataError(f"cost must be positive and finite, got {self.cost}")


@dataclass(frozen=True)
class MetaFeatures:
    """Core dataset descriptors used by transfer cost models."""

    n_rows: int
    n_cols: int
    n_classes: int = 0

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1 or self.n_classes < 0:
            raise DataError(f"bad meta-features {self}")

    def to_regressors(self) -> np.ndarray:
        # log1p for classes: regression tasks carry n_classes = 0.
        return np.array(
            [math.log(self.n_rows), math.log(self.n_cols), math.log1p(self.n_classes)]
        )


@dataclass
class TransferDataset:
    """Cost samples grouped by task, each task tagged with meta-features."""

    tasks: list[tuple[MetaFeatures, list[CostSample]]]

    def __post_init__(self):
        if not self.tasks or not any(samples for _, samples in self.tasks):
            raise DataError("transfer dataset needs at least one task with samples")


class CostModel:
    """Base interface: strictly positive finite cost predictions."""

    def predict_log_unit(
        self, points: np.ndarray, meta: MetaFeatures | None = None
    ) -> np.ndarray:
        raise NotImplementedError

    def predict_unit(
        self, points: np.ndarray, meta: MetaFeatures | None = None
    ) -> np.ndarray:
        """Predicted costs at unit-cube points of shape (m, d)."""
        logp = self.predict_log_unit(np.atleast_2d(np.asarray(points, float)), meta)
        return np.exp(np.clip(logp, -_LOG_CLIP, _LOG_CLIP))

    def predict(self, config: np.ndarray, meta: MetaFeatures | None = None) -> float:
        """Predicted cost for one native configuration."""
        point = to_unit(self._space, config)
        return float(self.predict_unit(point[None, :], meta)[0])


@dataclass
class ConstantCost(CostModel):
    """Geometric mean of the observed costs; the low-data fallback."""

    log_cost: float
    _space: SearchSpace = None
    kind: str = "constant"
    selected_features: tuple[int, ...] = ()
    ridge_fallback: bool = False

    def predict_log_unit(self, points, meta=None):
        return np.full(points.shape[0], self.log_cost)


@dataclass
class LinearCost(CostModel):
    """OLS of log cost on centered selected features (ridge on rank loss)."""

    _space: SearchSpace
    kind: str
    selected_features: tuple[int, ...]
    coef: np.ndarray
    intercept: float
    feature_means: np.ndarray
    ridge_fallback: bool = False
    n_meta: int = 0  # trailing regressors taken from meta-features

    def predict_log_unit(self, points, meta=None):
        cols = points[:, list(self.selected_features)]
        if self.n_meta:
            if meta is None:
                raise UsageError(
                    f"{self.kind} model requires meta-features at predict time"
                )
            meta_cols = np.tile(meta.to_regressors(), (points.shape[0], 1))
            cols = np.hstack([cols, meta_cols])
        return self.intercept + (cols - self.feature_means) @ self.coef


@dataclass
class GPCost(CostModel):
    """GP on (a subset of) features vs. log cost; optional linear base."""

    _space: SearchSpace
    kind: str
    gp: GPModel | None
    selected_features: tuple[int, ...]
    base: LinearCost | None = None
    residual_gp_active: bool = True
    ridge_fallback: bool = False

    def predict_log_unit(self, points, meta=None):
        logp = np.zeros(points.shape[0])
        if self.base is not None:
            logp = self.base.predict_log_unit(points, meta)
        if self.gp is not None and self.residual_gp_active:
            sub = (
                points[:, list(self.selected_features)]
                if self.selected_features
                else points
            )
            means, _ = gp_posterior_many(self.gp, sub)
            logp = logp + means
        return logp


def _unit_matrix(space: SearchSpace, samples: Sequence[CostSample]) -> np.ndarray:
    return np.array([to_unit(space, s.config) for s in samples])


def _log_costs(samples: Sequence[CostSample]) -> np.ndarray:
    return np.log(np.array([s.cost for s in samples]))


# ---------------------------------------------------------------------------
# Unit-space fitting cores (also used directly by the optimization loop)
# ---------------------------------------------------------------------------


def _select_features_core(U: np.ndarray, logc: np.ndarray, k: int) -> list[int]:
    d = U.shape[1]
    k_eff = min(k, d)
    if len(logc) < k_eff + 2:
        raise DataError(f"need at least {k_eff + 2} samples to select {k_eff} features")
    yc = logc - logc.mean()
    y_var = float(yc @ yc)
    # Guard against ulp-level residuals of constant targets masquerading
    # as signal (mean() of identical floats is not exact).
    scale = max(1.0, float(np.max(np.abs(logc))))
    degenerate_y = y_var <= len(logc) * (1e-12 * scale) ** 2
    r_squared = np.zeros(d)
    if not degenerate_y:
        for j in range(d):
            xc = U[:, j] - U[:, j].mean()
            x_var = float(xc @ xc)
            if x_var > 0:
                r_squared[j] = (float(xc @ yc) ** 2) / (x_var * y_var)
    order = sorted(range(d), key=lambda j: (-r_squared[j], j))
    return order[:k_eff]


def _centered_linear_fit(
    X: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, float, np.ndarray, bool]:
    """OLS with centered columns; ridge (lambda=1e-8) when rank-deficient."""
    means = X.mean(axis=0)
    Xc = X - means
    yc = y - y.mean()
    ridge = np.linalg.matrix_rank(Xc) < Xc.shape[1]
    if ridge:
        gram = Xc.T @ Xc + RIDGE_LAMBDA * np.eye(Xc.shape[1])
        coef = np.linalg.solve(gram, Xc.T @ yc)
    else:
        coef, *_ = np.linalg.lstsq(Xc, yc, rcond=None)
    return coef, float(y.mean()), means, ridge


def _lv_fit_core(space: SearchSpace, U: np.ndarray, logc: np.ndarray, k: int) -> LinearCost:
    features = _select_features_core(U, logc, k)
    coef, intercept, means, ridge = _centered_linear_fit(U[:, features], logc)
    return LinearCost(
        _space=space,
        kind=f"lv{len(features)}",
        selected_features=tuple(features),
        coef=coef,
        intercept=intercept,
        feature_means=means,
        ridge_fallback=ridge,
    )


def _warped_gp_fit_core(space, U, logc, rng, restarts) -> GPCost:
    if len(logc) < 2:
        raise DataError("warped GP needs at least 2 samples")
    gp = gp_fit(U, logc, restarts=restarts, rng=rng)
    return GPCost(_space=space, kind="warped_gp", gp=gp, selected_features=())


def _limited_gp_fit_core(space, U, logc, rng, restarts) -> GPCost:
    features = _select_features_core(U, logc, 3)
    gp = gp_fit(U[:, features], logc, restarts=restarts, rng=rng)
    return GPCost(
        _space=space, kind="limited_gp3", gp=gp, selected_features=tuple(features)
    )


def _gplv_fit_core(space, U, logc, k, rng, restarts) -> GPCost:
    base = _lv_fit_core(space, U, logc, k)
    resid = logc - base.predict_log_unit(U)
    gp = gp_fit(U, resid, restarts=restarts, rng=rng)
    model = GPCost(
        _space=space,
        kind=f"gplv{len(base.selected_features)}",
        gp=gp,
        selected_features=(),
        base=base,
    )
    # Keep the residual GP only when it does not worsen the in-sample fit,
    # so GPLV's training error never exceeds the base model's.
    gp_rmse = float(np.sqrt(np.mean((logc - model.predict_log_unit(U)) ** 2)))
    base_rmse = float(np.sqrt(np.mean(resid**2)))
    if gp_rmse > base_rmse:
        model.residual_gp_active = False
    return model


# ---------------------------------------------------------------------------
# Public fitting API over native-unit samples
# ---------------------------------------------------------------------------


def select_features(space: SearchSpace, samples: Sequence[CostSample], k: int) -> list[int]:
    """Indices of the k features with highest univariate R-squared vs. log cost.

    Simple-regression R-squared equals the squared correlation, so the
    ranking is invariant to the affine unit-cube rescaling. Ties break
    toward the lower dimension index; k is capped at the dimension count.
    """
    return _select_features_core(_unit_matrix(space, samples), _log_costs(samples), k)


def constant_fit(space: SearchSpace, samples: Sequence[CostSample]) -> ConstantCost:
    if not samples:
        raise DataError("need at least one cost sample")
    return ConstantCost(log_cost=float(np.mean(_log_costs(samples))), _space=space)


def lv_fit(space: SearchSpace, samples: Sequence[CostSample], k: int) -> LinearCost:
    """Low-variance linear model: log cost ~ intercept + k selected features."""
    return _lv_fit_core(space, _unit_matrix(space, samples), _log_costs(samples), k)


def warped_gp_fit(
    space: SearchSpace,
    samples: Sequence[CostSample],
    rng: np.random.Generator | None = None,
    restarts: int = 3,
) -> GPCost:
    """GP on all features vs. log cost; predicts exp(posterior mean)."""
    return _warped_gp_fit_core(
        space, _unit_matrix(space, samples), _log_costs(samples), rng, restarts
    )


def limited_gp_fit(
    space: SearchSpace,
    samples: Sequence[CostSample],
    rng: np.random.Generator | None = None,
    restarts: int = 3,
) -> GPCost:
    """GP trained on only the 3 most significant features."""
    return _limited_gp_fit_core(
        space, _unit_matrix(space, samples), _log_costs(samples), rng, restarts
    )


def gplv_fit(
    space: SearchSpace,
    samples: Sequence[CostSample],
    k: int,
    rng: np.random.Generator | None = None,
    restarts: int = 3,
) -> GPCost:
    """LV(k) base plus a GP on its log-residuals."""
    return _gplv_fit_core(
        space, _unit_matrix(space, samples), _log_costs(samples), k, rng, restarts
    )


def transfer_fit(
    space: SearchSpace,
    data: TransferDataset,
    kind: str,
    k: int = 3,
) -> LinearCost:
    """Offline LV model pooled across tasks.

    ``task_aware`` appends log meta-features (rows, cols, log1p classes) as
    regressors, so predictions need the target task's meta-features;
    ``naive`` pools all samples and ignores task identity.
    """
    if kind not in ("task_aware", "naive"):
        raise ConfigError(f"unknown transfer kind {kind!r}")
    samples: list[CostSample] = []
    metas: list[MetaFeatures] = []
    for meta, task_samples in data.tasks:
        samples.extend(task_samples)
        metas.extend([meta] * len(task_samples))

    U = _unit_matrix(space, samples)
    logc = _log_costs(samples)
    features = _select_features_core(U, logc, k)
    cols = U[:, features]
    n_meta = 0
    if kind == "task_aware":
        meta_cols = np.array([m.to_regressors() for m in metas])
        cols = np.hstack([cols, meta_cols])
        n_meta = meta_cols.shape[1]
    coef, intercept, means, ridge = _centered_linear_fit(cols, logc)
    return LinearCost(
        _space=space,
        kind=f"transfer_{kind}",
        selected_features=tuple(features),
        coef=coef,
        intercept=intercept,
        feature_means=means,
        ridge_fallback=ridge,
        n_meta=n_meta,
    )


def cost_rmse(
    model: CostModel,
    test: Sequence[CostSample],
    meta: MetaFeatures | None = None,
    space: SearchSpace | None = None,
) -> float:
    """Root-mean-squared error in log-cost space on held-out samples."""
    if not test:
        raise DataError("need at least one test sample")
    space = space or model._space
    U = _unit_matrix(space, test)
    pred_log = model.predict_log_unit(U, meta)
    true_log = _log_costs(test)
    return float(np.sqrt(np.mean((pred_log - true_log) ** 2)))


# ---------------------------------------------------------------------------
# Kind registry and the BO-facing factory
# ---------------------------------------------------------------------------

ONLINE_COST_KINDS = (
    "constant",
    "lv1",
    "lv2",
    "lv3",
    "warped_gp",
    "gplv1",
    "gplv2",
    "gplv3",
    "limited_gp3",
)


def _min_samples(kind: str) -> int:
    if kind.startswith("lv") or kind.startswith("gplv"):
        return int(kind[-1]) + 2
    if kind == "warped_gp":
        return 3
    if kind == "limited_gp3":
        return 5
    return 1


def fit_cost_model_unit(
    kind: str,
    space: SearchSpace,
    unit_points: np.ndarray,
    costs: np.ndarray,
    rng: np.random.Generator | None = None,
    restarts: int = 3,
) -> CostModel:
    """Fit an online cost model directly on unit coordinates.

    Used by the optimization loop. Falls back to the constant (geometric
    mean) predictor while fewer samples than the kind's minimum are
    available, so a usable cost estimate exists from the first iteration.
    """
    if kind not in ONLINE_COST_KINDS:
        raise ConfigError(
            f"unknown cost model kind {kind!r}; choose from {ONLINE_COST_KINDS}"
        )
    U = np.atleast_2d(np.asarray(unit_points, dtype=float))
    costs = np.asarray(costs, dtype=float)
    if costs.size < 1:
        raise DataError("need at least one cost observation")
    if np.any(costs <= 0) or not np.all(np.isfinite(costs)):
        raise DataError("costs must be positive and finite")
    logc = np.log(costs)
    if kind == "constant" or len(costs) < _min_samples(kind):
        return ConstantCost(log_cost=float(np.mean(logc)), _space=space)
    if kind.startswith("lv"):
        return _lv_fit_core(space, U, logc, int(kind[-1]))
    if kind == "warped_gp":
        return _warped_gp_fit_core(space, U, logc, rng, restarts)
    if kind.startswith("gplv"):
        return _gplv_fit_core(space, U, logc, int(kind[-1]), rng, restarts)
    return _limited_gp_fit_core(space, U, logc, rng, restarts)


# ---------------------------------------------------------------------------
# CSV interfaces
# ---------------------------------------------------------------------------


def load_cost_csv(path: str | Path, space: SearchSpace) -> list[CostSample]:
    """Read cost samples: one column per dimension (native units), then `cost`."""
    samples = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        missing = [n for n in space.names + ["cost"] if n not in reader.fieldnames]
        if missing:
            raise DataError(f"{path}: missing columns {missing}")
        for row_num, row in enumerate(reader, start=2):
            try:
                config = np.array([float(row[n]) for n in space.names])
                cost = float(row["cost"])
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}:{row_num}: malformed row: {exc}") from exc
            samples.append(CostSample(config=config, cost=cost))
    if not samples:
        raise DataError(f"{path}: no data rows")
    return samples


def load_transfer_csv(path: str | Path, space: SearchSpace) -> TransferDataset:
    """Read transfer data: dimension columns, `cost`, then meta-feature columns."""
    meta_cols = ("n_rows", "n_cols", "n_classes")
    grouped: dict[MetaFeatures, list[CostSample]] = {}
    order: list[MetaFeatures] = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        missing = [
            n for n in space.names + ["cost", *meta_cols] if n not in reader.fieldnames
        ]
        if missing:
            raise DataError(f"{path}: missing columns {missing}")
        for row_num, row in enumerate(reader, start=2):
            try:
                config = np.array([float(row[n]) for n in space.names])
                cost = float(row["cost"])
                meta = MetaFeatures(*(int(row[c]) for c in meta_cols))
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}:{row_num}: malformed row: {exc}") from exc
            if meta not in grouped:
                grouped[meta] = []
                order.append(meta)
            grouped[meta].append(CostSample(config=config, cost=cost))
    return TransferDataset(tasks=[(meta, grouped[meta]) for meta in order])
