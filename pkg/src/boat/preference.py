"""Learning a latent utility from pairwise comparisons.

Each comparison says design w was preferred to design l.  With latent
utilities f and comparison noise ``noise_scale``, the probability of the
observed outcome is Phi((f_w - f_l) / (sqrt(2) noise_scale)), and the
latent vector gets a Gaussian-process prior.  The posterior mode is found
by damped Newton iterations on the negative log posterior

    psi(f) = 1/2 f^T K^{-1} f - sum_p log Phi(z_p)

whose curvature K^{-1} + A^T Lambda A (A the scaled pair incidence matrix,
Lambda_p = u_p (z_p + u_p), u_p = phi(z_p)/Phi(z_p)) also yields the
Laplace approximation used both for the predictive variance and for the
evidence that selects kernel hyperparameters from a small grid.

Predictions at new designs follow the usual mode-based formulas

    mean(x) = k(x, X) K^{-1} f_hat
    var(x)  = k(x, x) - k(x, X) K^{-1} k(X, x) + v^T (K^{-1} + W)^{-1} v

with v = K^{-1} k(X, x).  Utilities are relative: only differences are
identified, so predicted values are comparable with each other but carry
no unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve
from scipy.stats import norm
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import ArgumentError, ConvergenceError, InsufficientDataError
from .gp import chol_with_jitter
from .kernels import SMOOTHNESS_ORDERS, KernelParams, cross_kernel, kernel_matrix
from .transforms import BoxScaler
from .validation import as_matrix, as_vector, check_choice

DEFAULT_LENGTH_GRID = (0.1, 0.25, 0.5, 1.0, 2.0)
DEFAULT_AMPLITUDE_GRID = (0.25, 1.0, 4.0)


@dataclass(frozen=True)
class PreferenceSet:
    """Pairwise outcomes over an indexed set of designs.

    ``pairs`` holds (winner, loser) index rows into the design matrix the
    model is fit on.  Contradictory pairs are allowed; the comparison noise
    absorbs them.
    """

    pairs: np.ndarray
    n_items: int

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=int)
        if pairs.size == 0:
            pairs = pairs.reshape(0, 2)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ArgumentError("pairs must be an (m, 2) array of indices")
        n = int(self.n_items)
        if n < 1:
            raise ArgumentError("n_items must be positive")
        if pairs.size:
            if pairs.min() < 0 or pairs.max() >= n:
                raise ArgumentError("pair indices must lie in [0, n_items)")
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise ArgumentError("a design cannot be compared with itself")
        pairs.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "n_items", n)

    def __len__(self) -> int:
        return self.pairs.shape[0]

    def to_dict(self) -> dict:
        return {"pairs": self.pairs.tolist(), "n_items": self.n_items}

    @classmethod
    def from_dict(cls, doc: dict) -> "PreferenceSet":
        return cls(np.asarray(doc["pairs"], dtype=int), int(doc["n_items"]))


def build_preferences(values, error_bound, sense="minimize", valid=None):
    """Derive comparisons from measured values with a known error band.

    Two designs are comparable only when their intervals value +/- bound do
    not overlap; the winner is the better side under ``sense``.  Designs
    flagged invalid take part in no comparison.
    """
    values = as_vector(values, "values")
    n = values.size
    check_choice(sense, "sense", ("minimize", "maximize"))
    bounds = np.asarray(error_bound, dtype=float)
    if bounds.ndim == 0:
        bounds = np.full(n, float(bounds))
    bounds = as_vector(bounds, "error_bound", length=n)
    if np.any(bounds < 0):
        raise ArgumentError("error_bound must be non-negative")
    if valid is None:
        valid = np.ones(n, dtype=bool)
    valid = np.asarray(valid, dtype=bool).ravel()
    if valid.size != n:
        raise ArgumentError("valid mask length does not match values")

    pairs = []
    for i in range(n):
        if not valid[i]:
            continue
        for j in range(i + 1, n):
            if not valid[j]:
                continue
            if values[i] + bounds[i] < values[j] - bounds[j]:
                low, high = i, j
            elif values[j] + bounds[j] < values[i] - bounds[i]:
                low, high = j, i
            else:
                continue
            winner, loser = (low, high) if sense == "minimize" else (high, low)
            pairs.append((winner, loser))
    return PreferenceSet(np.asarray(pairs, dtype=int).reshape(-1, 2), n)


def _laplace_mode(K_inv, A, max_iter, tol):
    """Damped Newton search for the posterior mode.

    Returns (f_hat, u, W, psi); raises ConvergenceError when the gradient
    does not fall under ``tol`` within the iteration budget.
    """
    n = K_inv.shape[0]

    def psi_of(f):
        z = A @ f
        return 0.5 * float(f @ (K_inv @ f)) - float(norm.logcdf(z).sum())

    f = np.zeros(n)
    for _ in range(max_iter):
        z = A @ f
        u = np.exp(norm.logpdf(z) - norm.logcdf(z))
        grad = K_inv @ f - A.T @ u
        if np.max(np.abs(grad)) < tol:
            lam = u * (z + u)
            W = A.T @ (lam[:, None] * A)
            return f, u, W, psi_of(f)
        lam = u * (z + u)
        W = A.T @ (lam[:, None] * A)
        H = K_inv + W
        L_H, _ = chol_with_jitter(H, float(np.max(np.diag(H))))
        delta = -cho_solve((L_H, True), grad)
        current = psi_of(f)
        step = 1.0
        accepted = False
        while step >= 2.0**-30:
            trial = f + step * delta
            if psi_of(trial) < current:
                f = trial
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # psi is convex and the damped Newton step is a descent
            # direction, so an iterate the line search cannot improve is
            # the mode to floating-point precision.  This happens when
            # near-coincident designs make K, and with it the gradient,
            # too ill-conditioned for the plain tolerance to be reachable.
            return f, u, W, current
    raise ConvergenceError(
        "posterior mode search did not converge; consider loosening the "
        "comparison noise or checking the pairs for heavy contradiction"
    )


class PreferenceGP(BaseEstimator):
    """Latent-utility model over designs, trained on pairwise outcomes.

    Kernel hyperparameters (a shared length scale and the amplitude) are
    chosen from small grids by Laplace evidence.  Inputs are mapped to the
    unit box by default, and the grids are expressed in those units.
    """

    def __init__(
        self,
        smoothness="five_halves",
        noise_scale=0.1,
        normalize_inputs=True,
        input_bounds=None,
        length_scale_grid=DEFAULT_LENGTH_GRID,
        amplitude_grid=DEFAULT_AMPLITUDE_GRID,
        max_iter=200,
        tol=1e-6,
    ):
        self.smoothness = smoothness
        self.noise_scale = noise_scale
        self.normalize_inputs = normalize_inputs
        self.input_bounds = input_bounds
        self.length_scale_grid = length_scale_grid
        self.amplitude_grid = amplitude_grid
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, preferences):
        X = as_matrix(X, "X")
        check_choice(self.smoothness, "smoothness", SMOOTHNESS_ORDERS)
        if not np.isfinite(self.noise_scale) or self.noise_scale <= 0:
            raise ArgumentError("noise_scale must be finite and > 0")
        if isinstance(preferences, PreferenceSet):
            prefs = preferences
        else:
            prefs = PreferenceSet(np.asarray(preferences, dtype=int), X.shape[0])
        if prefs.n_items != X.shape[0]:
            raise ArgumentError(
                f"preferences index {prefs.n_items} designs but X has "
                f"{X.shape[0]} rows"
            )
        if len(prefs) == 0:
            raise InsufficientDataError(
                "at least one preference pair is required"
            )

        if self.normalize_inputs:
            if self.input_bounds is not None:
                lower, upper = self.input_bounds
                self.input_scaler_ = BoxScaler.from_bounds(lower, upper)
            else:
                self.input_scaler_ = BoxScaler.from_data(X)
        else:
            self.input_scaler_ = None
        Xt = self._to_internal(X)

        n, d = X.shape
        m = len(prefs)
        scale = 1.0 / (math.sqrt(2.0) * float(self.noise_scale))
        A = np.zeros((m, n))
        rows = np.arange(m)
        A[rows, prefs.pairs[:, 0]] += scale
        A[rows, prefs.pairs[:, 1]] -= scale

        best = None
        for li, length in enumerate(self.length_scale_grid):
            for ai, amp in enumerate(self.amplitude_grid):
                params = KernelParams(
                    float(amp), np.full(d, float(length)), self.smoothness
                )
                K = kernel_matrix(Xt, params)
                L_K, jitter = chol_with_jitter(K, params.amplitude_sq)
                K_inv = cho_solve((L_K, True), np.eye(n))
                try:
                    f_hat, u, W, psi = _laplace_mode(
                        K_inv, A, int(self.max_iter), float(self.tol)
                    )
                except ConvergenceError:
                    continue
                sign, logdet = np.linalg.slogdet(
                    np.eye(n) + (K + jitter * np.eye(n)) @ W
                )
                if sign <= 0:
                    continue
                evidence = -psi - 0.5 * logdet
                key = (evidence, -li, -ai)
                if best is None or key > best[0]:
                    best = (key, params, K_inv, f_hat, W)
        if best is None:
            raise ConvergenceError(
                "no kernel candidate produced a converged posterior mode"
            )
        _, params, K_inv, f_hat, W = best

        self.X_raw_ = X
        self.Xt_ = Xt
        self.preferences_ = prefs
        self.A_ = A
        self.kernel_params_ = params
        self.K_inv_ = K_inv
        self.W_ = W
        self.f_hat_ = f_hat
        self.beta_ = K_inv @ f_hat
        H = K_inv + W
        self.L_H_, _ = chol_with_jitter(H, float(np.max(np.diag(H))))
        self.evidence_ = best[0][0]
        return self

    def _to_internal(self, X):
        if self.input_scaler_ is None:
            return np.asarray(X, dtype=float)
        return self.input_scaler_.transform(X)

    @property
    def utilities_(self) -> np.ndarray:
        check_is_fitted(self, "f_hat_")
        return self.f_hat_

    def _laplace_gradient_check(self) -> np.ndarray:
        """Likelihood pull A^T u at the stored mode.

        Equal to K^{-1} f_hat at a true stationary point; exposed for
        diagnostics and tests.
        """
        check_is_fitted(self, "f_hat_")
        z = self.A_ @ self.f_hat_
        u = np.exp(norm.logpdf(z) - norm.logcdf(z))
        return self.A_.T @ u

    def posterior(self, X):
        """Latent-utility mean and variance at query designs."""
        check_is_fitted(self, "f_hat_")
        X = as_matrix(X, "X", n_cols=self.X_raw_.shape[1])
        Z = self._to_internal(X)
        Ks = cross_kernel(Z, self.Xt_, self.kernel_params_)
        mean = Ks @ self.beta_
        V = self.K_inv_ @ Ks.T
        base = self.kernel_params_.amplitude_sq - np.sum(Ks.T * V, axis=0)
        lift = np.sum(V * cho_solve((self.L_H_, True), V), axis=0)
        var = np.maximum(base + lift, 0.0)
        return mean, var

    def joint_posterior(self, X):
        check_is_fitted(self, "f_hat_")
        X = as_matrix(X, "X", n_cols=self.X_raw_.shape[1])
        Z = self._to_internal(X)
        Ks = cross_kernel(Z, self.Xt_, self.kernel_params_)
        mean = Ks @ self.beta_
        V = self.K_inv_ @ Ks.T
        Kqq = kernel_matrix(Z, self.kernel_params_)
        cov = Kqq - Ks @ V + V.T @ cho_solve((self.L_H_, True), V)
        cov = 0.5 * (cov + cov.T)
        return mean, cov

    def predict(self, X, return_std=False):
        mean, var = self.posterior(X)
        if return_std:
            return mean, np.sqrt(var)
        return mean

    def condition_on(self, X_new, y_new):
        raise ArgumentError(
            "a preference model cannot be conditioned on placeholder "
            "outputs; use the joint_qei or local_penalization strategy"
        )


def suggest_preferential(model, space, q, budget=None, seed=0, spec=None):
    """Next designs to print and compare, from a fitted preference model.

    Improvement is measured against the best mode utility among the
    designs already compared.
    """
    from .acquisition import AcquisitionSpec
    from .optimize import suggest_batch

    check_is_fitted(model, "f_hat_")
    spec = spec if spec is not None else AcquisitionSpec(strategy="joint_qei")
    if spec.strategy == "constant_liar":
        raise ArgumentError(
            "constant_liar is not available for preference models"
        )
    incumbent = float(model.f_hat_.max())
    return suggest_batch(model, space, incumbent, q, spec=spec, budget=budget, seed=seed)
