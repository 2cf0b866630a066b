"""Gaussian-process regression with marginal-likelihood hyperparameter search.

Given observations (X, y) with independent Gaussian noise of variance
``noise_var``, the posterior at a query point x is Gaussian with

    mean(x) = k(x, X) [K + noise_var I]^{-1} y
    var(x)  = k(x, x) - k(x, X) [K + noise_var I]^{-1} k(X, x)

computed through a cached Cholesky factor of the noisy kernel matrix.
Hyperparameters (ARD length scales, signal variance, noise variance) are
chosen by maximizing the log marginal likelihood

    log p(y) = -1/2 y^T alpha - sum_i log L_ii - n/2 log(2 pi)

with L-BFGS-B from several quasi-random starting points, using the analytic
gradient d log p / d eta = 1/2 tr((alpha alpha^T - K_y^{-1}) dK_y/d eta).

Inputs are mapped to the unit box and outputs standardized before modelling,
so the search box for the hyperparameters is expressed in those units.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize
from scipy.stats import qmc
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import (
    ArgumentError,
    ConvergenceError,
    ExtrapolationWarning,
    InsufficientDataError,
    NumericalError,
)
from .kernels import (
    SMOOTHNESS_ORDERS,
    KernelParams,
    cross_kernel,
    kernel_matrix,
    kernel_matrix_with_scale_gradients,
)
from .transforms import BoxScaler, Standardizer
from .validation import as_matrix, as_vector, check_choice

# Diagonal jitter added before every factorization, relative to the signal
# variance; escalated tenfold on failure up to the cap.
JITTER_START = 1e-8
JITTER_MAX = 1e-4


def chol_with_jitter(A, amplitude_sq):
    """Lower Cholesky factor of A + jitter * I.

    Starts at ``JITTER_START * amplitude_sq`` and escalates tenfold until
    the factorization succeeds, raising NumericalError past the cap.
    Returns ``(L, jitter_used)``.
    """
    n = A.shape[0]
    jitter = JITTER_START * amplitude_sq
    cap = JITTER_MAX * amplitude_sq
    while jitter <= cap * (1.0 + 1e-12):
        try:
            return np.linalg.cholesky(A + jitter * np.eye(n)), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise NumericalError(
        f"covariance factorization failed for a {n}x{n} matrix even with "
        f"jitter {cap:g}; the data may contain near-duplicate points with "
        "inconsistent outputs"
    )


def lml_and_gradient(X, y, params: KernelParams, noise_var: float):
    """Log marginal likelihood and its gradient at fixed hyperparameters.

    The gradient is with respect to the log hyperparameters, ordered as
    ``[log length_scale_1..d, log amplitude_sq, log noise_var]``.  The base
    jitter is included in the noisy kernel matrix (and, being proportional
    to the signal variance, in the amplitude derivative).  Raises
    ``np.linalg.LinAlgError`` if the matrix is not factorizable at the base
    jitter level.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    d = params.dimension
    K, K_scale_grads = kernel_matrix_with_scale_gradients(X, params)
    jitter = JITTER_START * params.amplitude_sq
    Ky = K + (noise_var + jitter) * np.eye(n)
    L = np.linalg.cholesky(Ky)
    alpha = cho_solve((L, True), y)
    lml = (
        -0.5 * float(y @ alpha)
        - float(np.sum(np.log(np.diag(L))))
        - 0.5 * n * math.log(2.0 * math.pi)
    )
    K_inv = cho_solve((L, True), np.eye(n))
    W = np.outer(alpha, alpha) - K_inv
    grad = np.empty(d + 2)
    for i in range(d):
        grad[i] = 0.5 * float(np.sum(W * K_scale_grads[i]))
    grad[d] = 0.5 * float(np.sum(W * (K + jitter * np.eye(n))))
    grad[d + 1] = 0.5 * noise_var * float(np.trace(W))
    return lml, grad


@dataclass(frozen=True)
class FitConfig:
    """Hyperparameter-search settings.

    Bounds are in the model's internal units: unit-box inputs and
    standardized outputs.
    """

    n_restarts: int = 10
    seed: int = 0
    length_scale_bounds: tuple = (1e-3, 10.0)
    amplitude_bounds: tuple = (1e-3, 1e3)
    noise_bounds: tuple = (1e-8, 1.0)

    def __post_init__(self):
        if int(self.n_restarts) < 1:
            raise ArgumentError("n_restarts must be at least 1")
        for name in ("length_scale_bounds", "amplitude_bounds", "noise_bounds"):
            lo, hi = getattr(self, name)
            if not (0 < lo < hi) or not np.isfinite(hi):
                raise ArgumentError(f"{name} must satisfy 0 < low < high")
            object.__setattr__(self, name, (float(lo), float(hi)))
        object.__setattr__(self, "n_restarts", int(self.n_restarts))

    def to_dict(self) -> dict:
        return {
            "n_restarts": self.n_restarts,
            "seed": self.seed,
            "length_scale_bounds": list(self.length_scale_bounds),
            "amplitude_bounds": list(self.amplitude_bounds),
            "noise_bounds": list(self.noise_bounds),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FitConfig":
        return cls(
            n_restarts=int(doc.get("n_restarts", 10)),
            seed=int(doc.get("seed", 0)),
            length_scale_bounds=tuple(doc.get("length_scale_bounds", (1e-3, 10.0))),
            amplitude_bounds=tuple(doc.get("amplitude_bounds", (1e-3, 1e3))),
            noise_bounds=tuple(doc.get("noise_bounds", (1e-8, 1.0))),
        )


def _search_hyperparameters(X, y, smoothness, fixed_kernel, fixed_noise, config):
    """Multi-restart L-BFGS-B maximization of the log marginal likelihood.

    Either the kernel parameters or the noise variance may be pinned; the
    remaining log coordinates are optimized inside the config box.  Restart
    starting points come from a seeded scrambled Sobol sequence, and ties
    resolve to the earliest restart, so the search is deterministic.
    """
    n, d = X.shape
    log_lo = np.log(
        np.r_[
            np.full(d, config.length_scale_bounds[0]),
            config.amplitude_bounds[0],
            config.noise_bounds[0],
        ]
    )
    log_hi = np.log(
        np.r_[
            np.full(d, config.length_scale_bounds[1]),
            config.amplitude_bounds[1],
            config.noise_bounds[1],
        ]
    )
    fixed = np.full(d + 2, np.nan)
    if fixed_kernel is not None:
        fixed[:d] = np.log(fixed_kernel.length_scales)
        fixed[d] = np.log(fixed_kernel.amplitude_sq)
    if fixed_noise is not None:
        fixed[d + 1] = np.log(float(fixed_noise))
    free = np.isnan(fixed)
    n_free = int(free.sum())
    FAIL = 1e25

    def objective(x_free):
        x = np.where(free, 0.0, fixed)
        x[free] = x_free
        scales = np.exp(x[:d])
        params = KernelParams(np.exp(x[d]), scales, smoothness)
        noise = np.exp(x[d + 1])
        try:
            lml, grad = lml_and_gradient(X, y, params, noise)
        except np.linalg.LinAlgError:
            return FAIL, np.zeros(n_free)
        if not np.isfinite(lml):
            return FAIL, np.zeros(n_free)
        return -lml, -grad[free]

    sampler = qmc.Sobol(d=n_free, scramble=True, seed=config.seed)
    m = max(1, math.ceil(math.log2(config.n_restarts)))
    unit = sampler.random_base2(m)[: config.n_restarts]
    starts = qmc.scale(unit, log_lo[free], log_hi[free])
    box = list(zip(log_lo[free], log_hi[free]))

    best_val = np.inf
    best_x = None
    for x0 in starts:
        result = minimize(objective, x0, jac=True, method="L-BFGS-B", bounds=box)
        if np.isfinite(result.fun) and result.fun < best_val:
            best_val = result.fun
            best_x = result.x
    if best_x is None or best_val >= FAIL:
        raise ConvergenceError(
            "hyperparameter search found no factorizable candidate; "
            "check the data for pathological scaling"
        )
    x = np.where(free, 0.0, fixed)
    x[free] = best_x
    # Pinned values pass through exactly rather than via exp(log(.)).
    if fixed_kernel is not None:
        params = fixed_kernel
    else:
        params = KernelParams(np.exp(x[d]), np.exp(x[:d]), smoothness)
    noise = float(fixed_noise) if fixed_noise is not None else float(np.exp(x[d + 1]))
    return params, noise


class GaussianProcess(BaseEstimator):
    """Gaussian-process regressor with automatic hyperparameter selection.

    Follows the fit/predict estimator convention.  By default inputs are
    mapped to the unit box (using ``input_bounds`` when given, otherwise
    the data range) and outputs are standardized; ``kernel_params`` and
    ``noise_var``, when supplied, are interpreted in those internal units
    and pin the corresponding hyperparameters instead of searching.

    Parameters
    ----------
    smoothness : str
        Matern order, one of "half", "three_halves", "five_halves".
    normalize_inputs : bool
        Map inputs to the unit box before modelling.
    standardize_outputs : bool
        Center and scale outputs before modelling.
    kernel_params : KernelParams or None
        Pin the kernel hyperparameters (skip searching them).
    noise_var : float or None
        Pin the noise variance (skip searching it).
    input_bounds : tuple of (lower, upper) arrays, or None
        Box used for input normalization; defaults to the data range.
    fit_config : FitConfig or None
        Search budget and box; defaults to ``FitConfig()``.
    """

    def __init__(
        self,
        smoothness="five_halves",
        normalize_inputs=True,
        standardize_outputs=True,
        kernel_params=None,
        noise_var=None,
        input_bounds=None,
        fit_config=None,
    ):
        self.smoothness = smoothness
        self.normalize_inputs = normalize_inputs
        self.standardize_outputs = standardize_outputs
        self.kernel_params = kernel_params
        self.noise_var = noise_var
        self.input_bounds = input_bounds
        self.fit_config = fit_config

    def fit(self, X, y):
        X = as_matrix(X, "X")
        y = as_vector(y, "y", length=X.shape[0])
        if X.shape[0] == 0:
            raise InsufficientDataError("at least one observation is required")
        check_choice(self.smoothness, "smoothness", SMOOTHNESS_ORDERS)
        if self.noise_var is not None and float(self.noise_var) <= 0:
            raise ArgumentError("noise_var must be > 0")

        if self.normalize_inputs:
            if self.input_bounds is not None:
                lower, upper = self.input_bounds
                self.input_scaler_ = BoxScaler.from_bounds(lower, upper)
            else:
                self.input_scaler_ = BoxScaler.from_data(X)
        else:
            self.input_scaler_ = None
        if self.standardize_outputs:
            self.output_standardizer_ = Standardizer.fit(y)
        else:
            self.output_standardizer_ = Standardizer.identity()

        Xt = self._to_internal(X)
        yt = self.output_standardizer_.transform(y)
        config = self.fit_config if self.fit_config is not None else FitConfig()

        if self.kernel_params is not None and self.noise_var is not None:
            params, noise = self.kernel_params, float(self.noise_var)
        elif np.ptp(yt) == 0.0:
            # Constant outputs carry no signal to fit; fall back to a unit
            # kernel so predictions return the constant with broad variance.
            params = KernelParams(1.0, np.ones(X.shape[1]), self.smoothness)
            noise = 1e-6 if self.noise_var is None else float(self.noise_var)
        else:
            params, noise = _search_hyperparameters(
                Xt, yt, self.smoothness, self.kernel_params, self.noise_var, config
            )
        self.kernel_params_ = params
        self.noise_var_ = noise
        self.X_raw_ = X
        self.y_raw_ = y
        self._refactor(Xt, yt)
        return self

    def _to_internal(self, X):
        if self.input_scaler_ is None:
            return np.asarray(X, dtype=float)
        return self.input_scaler_.transform(X)

    def _refactor(self, Xt, yt):
        n = Xt.shape[0]
        K = kernel_matrix(Xt, self.kernel_params_)
        A = K + self.noise_var_ * np.eye(n)
        self.L_, self.jitter_ = chol_with_jitter(A, self.kernel_params_.amplitude_sq)
        self.alpha_ = cho_solve((self.L_, True), yt)
        self.Xt_ = Xt
        self.yt_ = yt
        self.lml_ = (
            -0.5 * float(yt @ self.alpha_)
            - float(np.sum(np.log(np.diag(self.L_))))
            - 0.5 * n * math.log(2.0 * math.pi)
        )

    def log_marginal_likelihood(self) -> float:
        check_is_fitted(self, "alpha_")
        return self.lml_

    def _warn_extrapolation(self, X):
        if self.input_scaler_ is None:
            return
        lower, upper = self.input_scaler_.lower, self.input_scaler_.upper
        tol = 1e-9 * np.maximum(upper - lower, 1.0)
        outside = np.any((X < lower - tol) | (X > upper + tol), axis=1)
        if np.any(outside):
            warnings.warn(
                f"{int(outside.sum())} query point(s) lie outside the "
                "region the model was trained on; predictions there are "
                "extrapolations",
                ExtrapolationWarning,
                stacklevel=3,
            )

    def posterior(self, X, include_noise=False):
        """Posterior mean and variance at query rows, in original units."""
        check_is_fitted(self, "alpha_")
        X = as_matrix(X, "X", n_cols=self.X_raw_.shape[1])
        self._warn_extrapolation(X)
        Z = self._to_internal(X)
        Ks = cross_kernel(Z, self.Xt_, self.kernel_params_)
        mean_t = Ks @ self.alpha_
        V = solve_triangular(self.L_, Ks.T, lower=True)
        var_t = self.kernel_params_.amplitude_sq - np.sum(V * V, axis=0)
        if include_noise:
            var_t = var_t + self.noise_var_
        var_t = np.maximum(var_t, 0.0)
        mean = self.output_standardizer_.inverse_transform(mean_t)
        var = self.output_standardizer_.inverse_transform_variance(var_t)
        return mean, var

    def joint_posterior(self, X, include_noise=False):
        """Posterior mean vector and full covariance matrix at query rows."""
        check_is_fitted(self, "alpha_")
        X = as_matrix(X, "X", n_cols=self.X_raw_.shape[1])
        self._warn_extrapolation(X)
        Z = self._to_internal(X)
        Ks = cross_kernel(Z, self.Xt_, self.kernel_params_)
        mean_t = Ks @ self.alpha_
        V = solve_triangular(self.L_, Ks.T, lower=True)
        Kqq = kernel_matrix(Z, self.kernel_params_)
        cov_t = Kqq - V.T @ V
        if include_noise:
            cov_t = cov_t + self.noise_var_ * np.eye(len(Z))
        cov_t = 0.5 * (cov_t + cov_t.T)
        mean = self.output_standardizer_.inverse_transform(mean_t)
        cov = self.output_standardizer_.inverse_transform_variance(cov_t)
        return mean, cov

    def predict(self, X, return_std=False):
        mean, var = self.posterior(X)
        if return_std:
            return mean, np.sqrt(var)
        return mean

    def condition_on(self, X_new, y_new) -> "GaussianProcess":
        """A new model conditioned on extra observations without refitting.

        Hyperparameters and the input/output transforms are carried over
        unchanged, so conditioning is cheap and deterministic.  Used to
        fold synthetic placeholder outputs for pending points into batch
        construction.
        """
        check_is_fitted(self, "alpha_")
        X_new = as_matrix(X_new, "X_new", n_cols=self.X_raw_.shape[1])
        y_new = as_vector(y_new, "y_new", length=X_new.shape[0])
        X_all = np.vstack([self.X_raw_, X_new])
        y_all = np.concatenate([self.y_raw_, y_new])
        other = type(self)(**self.get_params())
        other.input_scaler_ = self.input_scaler_
        other.output_standardizer_ = self.output_standardizer_
        other.kernel_params_ = self.kernel_params_
        other.noise_var_ = self.noise_var_
        other.X_raw_ = X_all
        other.y_raw_ = y_all
        other._refactor(
            other._to_internal(X_all), other.output_standardizer_.transform(y_all)
        )
        return other
