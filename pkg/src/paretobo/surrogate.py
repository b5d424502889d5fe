"""Gaussian process regression over the unit cube.

Matern-5/2 kernel with per-dimension (ARD) lengthscales, a constant mean
and Gaussian observation noise. Targets are standardized to zero mean and
unit variance before fitting; posteriors are reported in native units.

Hyperparameters are obtained by multi-start bounded quasi-Newton (L-BFGS-B)
maximization of the log marginal likelihood, parameterized as
``theta = [log signal_variance, log lengthscale_1..d, log noise_variance,
mean_constant]`` with analytic gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import minimize

from .errors import DataError, ModelError

SQRT5 = math.sqrt(5.0)

# Optimizer bounds in theta space.
LOG_SIGNAL_BOUNDS = (math.log(1e-4), math.log(1e4))
LOG_LENGTHSCALE_BOUNDS = (math.log(1e-3), math.log(1e3))
LOG_NOISE_BOUNDS = (math.log(1e-8), math.log(1e2))
MEAN_BOUNDS = (-5.0, 5.0)

# Diagonal jitter escalation on Cholesky failure.
JITTERS = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


@dataclass(frozen=True)
class KernelParams:
    """Kernel hyperparameters in standardized-target space."""

    signal_variance: float
    lengthscales: np.ndarray
    noise_variance: float
    mean_constant: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "lengthscales", np.asarray(self.lengthscales, dtype=float)
        )
        if self.signal_variance <= 0:
            raise DataError("signal_variance must be positive")
        if np.any(self.lengthscales <= 0):
            raise DataError("lengthscales must be positive")
        if self.noise_variance < 0:
            raise DataError("noise_variance must be nonnegative")

    def to_theta(self) -> np.ndarray:
        return np.concatenate(
            [
                [math.log(self.signal_variance)],
                np.log(self.lengthscales),
                [math.log(max(self.noise_variance, 1e-12)), self.mean_constant],
            ]
        )

    @classmethod
    def from_theta(cls, theta: np.ndarray, dim: int) -> "KernelParams":
        return cls(
            signal_variance=math.exp(theta[0]),
            lengthscales=np.exp(theta[1 : 1 + dim]),
            noise_variance=math.exp(theta[1 + dim]),
            mean_constant=float(theta[2 + dim]),
        )


@dataclass(frozen=True)
class Posterior:
    """Predictive mean/variance in native target units."""

    mean: float
    variance: float


@dataclass
class GPModel:
    """Fitted GP: training data, hyperparameters and cached factorization."""

    train_inputs: np.ndarray
    train_targets_std: np.ndarray
    params: KernelParams
    target_mean: float
    target_std: float
    degenerate_targets: bool
    chol: tuple = field(repr=False, default=None)
    alpha: np.ndarray = field(repr=False, default=None)
    jitter: float = 0.0
    fit_info: dict = field(default_factory=dict)

    @property
    def n_train(self) -> int:
        return self.train_inputs.shape[0]


def _matern52(scaled_sq: np.ndarray, signal_variance: float) -> np.ndarray:
    """Matern-5/2 values from squared lengthscale-scaled distances."""
    s = SQRT5 * np.sqrt(np.maximum(scaled_sq, 0.0))
    return signal_variance * (1.0 + s + s * s / 3.0) * np.exp(-s)


def _cross_kernel(X1: np.ndarray, X2: np.ndarray, params: KernelParams) -> np.ndarray:
    diff = X1[:, None, :] - X2[None, :, :]
    scaled_sq = np.sum((diff / params.lengthscales) ** 2, axis=-1)
    return _matern52(scaled_sq, params.signal_variance)


def _factorize(K: np.ndarray):
    """Cholesky with escalating diagonal jitter; raises after the last step."""
    n = K.shape[0]
    last_err = None
    for jitter in JITTERS:
        try:
            chol = cho_factor(K + jitter * np.eye(n), lower=True)
            return chol, jitter
        except np.linalg.LinAlgError as err:
            last_err = err
    raise ModelError(f"kernel factorization failed at jitter {JITTERS[-1]}: {last_err}")


def _standardize(y: np.ndarray) -> tuple[np.ndarray, float, float, bool]:
    mean = float(np.mean(y))
    std = float(np.std(y))
    if std < 1e-12:
        return np.zeros_like(y), mean, 1.0, True
    # Rounding canonicalizes the standardized targets so that affine
    # re-scalings of y (unit changes) produce bit-identical fits.
    return np.round((y - mean) / std, 12), mean, std, False


def build_model(X: np.ndarray, y: np.ndarray, params: KernelParams) -> GPModel:
    """Assemble a GPModel with given hyperparameters (no fitting)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0] or y.shape[0] < 1:
        raise DataError(f"bad training shapes X={X.shape} y={y.shape}")
    if not np.all(np.isfinite(y)):
        raise DataError("non-finite training targets")
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite training inputs")
    y_std, t_mean, t_std, degenerate = _standardize(y)
    K = _cross_kernel(X, X, params)
    K[np.diag_indices_from(K)] += params.noise_variance
    chol, jitter = _factorize(K)
    alpha = cho_solve(chol, y_std - params.mean_constant)
    return GPModel(
        train_inputs=X,
        train_targets_std=y_std,
        params=params,
        target_mean=t_mean,
        target_std=t_std,
        degenerate_targets=degenerate,
        chol=chol,
        alpha=alpha,
        jitter=jitter,
    )


def _mll_value_and_grad(
    theta: np.ndarray, X: np.ndarray, y_std: np.ndarray, sq_diffs: np.ndarray
) -> tuple[float, np.ndarray]:
    """Log marginal likelihood and its gradient w.r.t. theta.

    ``sq_diffs`` is the precomputed (d, n, n) tensor of per-dimension squared
    coordinate differences. Gradients use the standard trace identity
    dMLL/dp = 0.5 tr((aa^T - K^{-1}) dK/dp) with a = K^{-1}(y - m).
    """
    n, d = X.shape
    sv = math.exp(theta[0])
    ls = np.exp(theta[1 : 1 + d])
    nv = math.exp(theta[1 + d])
    m = theta[2 + d]

    inv_ls_sq = 1.0 / (ls * ls)
    scaled_sq = np.tensordot(inv_ls_sq, sq_diffs, axes=(0, 0))
    s = SQRT5 * np.sqrt(np.maximum(scaled_sq, 0.0))
    exp_term = np.exp(-s)
    Kf = sv * (1.0 + s + s * s / 3.0) * exp_term
    K = Kf + nv * np.eye(n)

    chol, _ = _factorize(K)
    resid = y_std - m
    a = cho_solve(chol, resid)
    log_det = 2.0 * np.sum(np.log(np.diag(chol[0])))
    mll = -0.5 * float(resid @ a) - 0.5 * log_det - 0.5 * n * math.log(2.0 * math.pi)

    K_inv = cho_solve(chol, np.eye(n))
    A = np.outer(a, a) - K_inv

    grad = np.empty_like(theta)
    grad[0] = 0.5 * np.sum(A * Kf)
    # dK/dlog(ls_i) = sv * (5/3) (1 + s) exp(-s) * sq_diffs_i / ls_i^2
    base = sv * (5.0 / 3.0) * (1.0 + s) * exp_term
    for i in range(d):
        dK = base * (sq_diffs[i] * inv_ls_sq[i])
        grad[1 + i] = 0.5 * np.sum(A * dK)
    grad[1 + d] = 0.5 * nv * np.trace(A)
    grad[2 + d] = float(np.sum(a))
    return mll, grad


def _default_start(d: int) -> np.ndarray:
    params = KernelParams(
        signal_variance=1.0,
        lengthscales=np.full(d, 0.3),
        noise_variance=1e-3,
        mean_constant=0.0,
    )
    return params.to_theta()


def _random_start(d: int, rng: np.random.Generator) -> np.ndarray:
    theta = np.empty(d + 3)
    theta[0] = rng.uniform(math.log(0.1), math.log(10.0))
    theta[1 : 1 + d] = rng.uniform(math.log(0.05), math.log(2.0), size=d)
    theta[1 + d] = rng.uniform(math.log(1e-6), math.log(1e-1))
    theta[2 + d] = rng.uniform(-0.5, 0.5)
    return theta


def gp_fit(
    X: np.ndarray,
    y: np.ndarray,
    restarts: int = 5,
    rng: np.random.Generator | None = None,
    warm_start: KernelParams | None = None,
    maxiter: int = 60,
) -> GPModel:
    """Fit GP hyperparameters by multi-start L-BFGS-B on the MLL.

    The returned model's MLL is at least the MLL of every start's initial
    parameters. ``warm_start`` (e.g. the previous iteration's params in a
    sequential loop) replaces the default first start.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.shape[0] or y.shape[0] < 1:
        raise DataError(f"bad training shapes X={X.shape} y={y.shape}")
    if not np.all(np.isfinite(y)):
        raise DataError("non-finite training targets")
    if rng is None:
        rng = np.random.default_rng(0)
    n, d = X.shape

    y_std, t_mean, t_std, degenerate = _standardize(y)
    sq_diffs = (X.T[:, :, None] - X.T[:, None, :]) ** 2  # (d, n, n)

    def neg_mll(theta: np.ndarray) -> tuple[float, np.ndarray]:
        try:
            mll, grad = _mll_value_and_grad(theta, X, y_std, sq_diffs)
        except ModelError:
            return 1e25, np.zeros_like(theta)
        if not np.isfinite(mll):
            return 1e25, np.zeros_like(theta)
        return -mll, -grad

    starts = [warm_start.to_theta() if warm_start is not None else _default_start(d)]
    for _ in range(max(0, restarts - 1)):
        starts.append(_random_start(d, rng))

    bounds = (
        [LOG_SIGNAL_BOUNDS]
        + [LOG_LENGTHSCALE_BOUNDS] * d
        + [LOG_NOISE_BOUNDS, MEAN_BOUNDS]
    )
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    evaluated: list[tuple[float, np.ndarray]] = []
    init_mlls: list[float] = []
    for theta0 in starts:
        theta0 = np.clip(theta0, lo, hi)
        f0, _ = neg_mll(theta0)
        init_mlls.append(-f0)
        evaluated.append((-f0, theta0))
        result = minimize(
            neg_mll,
            theta0,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": maxiter},
        )
        f_final, _ = neg_mll(result.x)
        evaluated.append((-f_final, result.x))

    best_mll, best_theta = max(evaluated, key=lambda item: item[0])
    if not np.isfinite(best_mll):
        raise ModelError("all hyperparameter starts failed to factorize")

    params = KernelParams.from_theta(best_theta, d)
    model = build_model(X, y, params)
    model.fit_info = {
        "mll": best_mll,
        "init_mlls": init_mlls,
        "restarts": len(starts),
    }
    return model


def gp_posterior_many(model: GPModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means/variances (native units) at points ``X`` of shape (m, d)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    params = model.params
    k_star = _cross_kernel(X, model.train_inputs, params)  # (m, n)
    mean_std = params.mean_constant + k_star @ model.alpha
    v = cho_solve(model.chol, k_star.T)  # (n, m)
    var_std = (
        params.signal_variance
        + params.noise_variance
        - np.einsum("mn,nm->m", k_star, v)
    )
    var_std = np.maximum(var_std, 0.0)
    mean = model.target_mean + model.target_std * mean_std
    var = (model.target_std**2) * var_std
    return mean, var


def gp_posterior(model: GPModel, x: np.ndarray) -> Posterior:
    """Posterior at a single point, de-standardized to native units."""
    means, variances = gp_posterior_many(model, np.asarray(x, dtype=float)[None, :])
    return Posterior(mean=float(means[0]), variance=float(variances[0]))


def log_marginal_likelihood(model: GPModel) -> float:
    """Exact MLL of the standardized targets under the model's params."""
    resid = model.train_targets_std - model.params.mean_constant
    log_det = 2.0 * np.sum(np.log(np.diag(model.chol[0])))
    n = model.n_train
    return float(
        -0.5 * resid @ model.alpha - 0.5 * log_det - 0.5 * n * math.log(2 * math.pi)
    )
