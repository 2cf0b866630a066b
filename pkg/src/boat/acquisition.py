"""Acquisition values for choosing the next experiments.

For a Gaussian posterior with mean m and standard deviation s, and an
incumbent best value f, expected improvement for maximization is

    EI(x) = (m - f) Phi(z) + s phi(z),    z = (m - f) / s

with the degenerate s = 0 limit max(0, m - f).  The optimistic bound is
UCB(x) = m + beta s.  A black-box output constrained to stay at or below a
threshold t is satisfied with probability Phi((t - m) / s), and the product
of such probabilities times EI gives the constrained criterion; while no
feasible observation exists the product alone is used, turning the search
into pure feasibility seeking.

Batch (q-point) expected improvement is estimated by Monte Carlo over the
joint posterior of the batch.  The normal draws are laid out so that any
leading sub-batch reuses exactly the draws it would get on its own, which
makes the estimate reproducible and monotone under batch inclusion for a
fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import ArgumentError
from .validation import as_vector, check_choice

ACQUISITION_KINDS = ("ei", "ucb")
BATCH_STRATEGIES = ("joint_qei", "constant_liar", "local_penalization")
INCUMBENT_SOURCES = ("best_observed", "best_posterior")


@dataclass(frozen=True)
class AcquisitionSpec:
    """Acquisition choice and its knobs, as stored with a campaign.

    ``kind`` selects the single-point criterion, ``strategy`` the batch
    construction, ``n_samples`` the Monte Carlo budget for joint batch
    scoring, ``rho`` the augmentation strength of the Chebyshev
    scalarization, and ``incumbent_source`` whether improvement is measured
    against the best observed output or the best posterior mean at the
    observed designs.
    """

    kind: str = "ei"
    beta: float = 2.0
    strategy: str = "joint_qei"
    n_samples: int = 2048
    rho: float = 0.05
    incumbent_source: str = "best_observed"

    def __post_init__(self):
        check_choice(self.kind, "kind", ACQUISITION_KINDS)
        check_choice(self.strategy, "strategy", BATCH_STRATEGIES)
        check_choice(self.incumbent_source, "incumbent_source", INCUMBENT_SOURCES)
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ArgumentError("beta must be finite and >= 0")
        if int(self.n_samples) < 16:
            raise ArgumentError("n_samples must be at least 16")
        if not np.isfinite(self.rho) or self.rho < 0:
            raise ArgumentError("rho must be finite and >= 0")
        object.__setattr__(self, "n_samples", int(self.n_samples))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "rho", float(self.rho))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "beta": self.beta,
            "strategy": self.strategy,
            "n_samples": self.n_samples,
            "rho": self.rho,
            "incumbent_source": self.incumbent_source,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AcquisitionSpec":
        defaults = cls()
        return cls(
            kind=doc.get("kind", defaults.kind),
            beta=float(doc.get("beta", defaults.beta)),
            strategy=doc.get("strategy", defaults.strategy),
            n_samples=int(doc.get("n_samples", defaults.n_samples)),
            rho=float(doc.get("rho", defaults.rho)),
            incumbent_source=doc.get("incumbent_source", defaults.incumbent_source),
        )


def expected_improvement(mean, var, incumbent: float) -> np.ndarray:
    """Expected improvement over ``incumbent`` for maximization."""
    mean = as_vector(mean, "mean")
    var = as_vector(var, "var", length=mean.size)
    if np.any(var < 0):
        raise ArgumentError("var must be non-negative")
    if not np.isfinite(incumbent):
        raise ArgumentError("incumbent must be finite")
    sd = np.sqrt(var)
    delta = mean - incumbent
    ei = np.maximum(delta, 0.0)
    positive = sd > 0
    if np.any(positive):
        z = delta[positive] / sd[positive]
        ei[positive] = delta[positive] * norm.cdf(z) + sd[positive] * norm.pdf(z)
    return ei


def upper_confidence_bound(mean, var, beta: float = 2.0) -> np.ndarray:
    """Optimistic estimate mean + beta * sd."""
    mean = as_vector(mean, "mean")
    var = as_vector(var, "var", length=mean.size)
    if np.any(var < 0):
        raise ArgumentError("var must be non-negative")
    if not np.isfinite(beta) or beta < 0:
        raise ArgumentError("beta must be finite and >= 0")
    return mean + beta * np.sqrt(var)


def probability_of_feasibility(mean, var, threshold: float, direction: str = "le"):
    """Probability the constrained output lands on the feasible side.

    With zero posterior variance this collapses to a 0/1 indicator on the
    mean.
    """
    mean = as_vector(mean, "mean")
    var = as_vector(var, "var", length=mean.size)
    check_choice(direction, "direction", ("le", "ge"))
    if not np.isfinite(threshold):
        raise ArgumentError("threshold must be finite")
    if np.any(var < 0):
        raise ArgumentError("var must be non-negative")
    sd = np.sqrt(var)
    margin = threshold - mean if direction == "le" else mean - threshold
    out = np.where(margin >= 0, 1.0, 0.0)
    positive = sd > 0
    out[positive] = norm.cdf(margin[positive] / sd[positive])
    return out


def feasibility_weighted_improvement(mean, var, incumbent, pof) -> np.ndarray:
    """EI times the probability all constraints hold.

    ``incumbent`` is the best objective value among feasible observations;
    pass None while none exists, in which case the criterion is the
    feasibility probability alone.
    """
    pof = as_vector(pof, "pof")
    if np.any((pof < 0) | (pof > 1)):
        raise ArgumentError("pof values must lie in [0, 1]")
    if incumbent is None:
        return pof.copy()
    return expected_improvement(mean, var, incumbent) * pof


def incumbent_from(values, feasible=None):
    """Best (largest) value among rows marked feasible, or None if no row is.

    The default mask treats every row as feasible.
    """
    values = as_vector(values, "values")
    if feasible is None:
        feasible = np.ones(values.size, dtype=bool)
    feasible = np.asarray(feasible, dtype=bool).ravel()
    if feasible.size != values.size:
        raise ArgumentError("feasible mask length does not match values")
    if not np.any(feasible):
        return None
    return float(values[feasible].max())


def _nested_cholesky(A: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor whose leading blocks never depend on later rows.

    Near-zero pivots (degenerate batch directions) are floored and their
    column zeroed instead of jittering the whole matrix, so the factor of
    any leading sub-batch is exactly the leading block of the full factor.
    """
    q = A.shape[0]
    L = np.zeros((q, q))
    for i in range(q):
        s = A[i, i] - float(L[i, :i] @ L[i, :i])
        floor = 1e-12 * max(A[i, i], 1e-12)
        if s <= floor:
            L[i, i] = math.sqrt(floor)
            continue
        L[i, i] = math.sqrt(s)
        if i + 1 < q:
            L[i + 1 :, i] = (A[i + 1 :, i] - L[i + 1 :, :i] @ L[i, :i]) / L[i, i]
    return L


def q_expected_improvement(
    mean, cov, incumbent: float, n_samples: int = 2048, seed: int = 0
) -> float:
    """Monte Carlo joint expected improvement of a batch.

    Draws ``z`` with shape (q, n_samples) so sample streams are stable
    under appending batch elements: with a fixed seed, scoring a leading
    sub-batch reuses exactly its own rows of draws, making the estimate
    monotone non-decreasing as the batch grows.
    """
    mean = as_vector(mean, "mean")
    cov = np.asarray(cov, dtype=float)
    q = mean.size
    if cov.shape != (q, q):
        raise ArgumentError(f"cov must be ({q}, {q}), got {cov.shape}")
    if not np.isfinite(incumbent):
        raise ArgumentError("incumbent must be finite")
    if n_samples < 1:
        raise ArgumentError("n_samples must be positive")
    # An exact repeat of an earlier batch member adds nothing to the batch
    # maximum; dropping it keeps the estimate identical to the smaller
    # batch, draw for draw.
    kept: list = []
    for i in range(q):
        duplicate = any(
            mean[i] == mean[k] and np.array_equal(cov[i], cov[k]) for k in kept
        )
        if not duplicate:
            kept.append(i)
    if len(kept) < q:
        mean = mean[kept]
        cov = cov[np.ix_(kept, kept)]
        q = len(kept)
    L = _nested_cholesky(cov)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((q, n_samples))
    samples = mean[:, None] + L @ z
    improvement = np.maximum(samples.max(axis=0) - incumbent, 0.0)
    return float(improvement.mean())


def augmented_chebyshev(values, weights, rho: float = 0.05) -> np.ndarray:
    """Scalarize multi-objective rows for maximization.

    Computes min_i(w_i y_i) + rho * sum_i(w_i y_i) per row; the augmentation
    keeps the scalar strictly increasing in every objective so weakly
    dominated points cannot win ties.
    """
    Y = np.atleast_2d(np.asarray(values, dtype=float))
    w = as_vector(weights, "weights", length=Y.shape[1])
    if np.any(w < 0) or w.sum() <= 0:
        raise ArgumentError("weights must be non-negative with positive sum")
    if not np.isfinite(rho) or rho < 0:
        raise ArgumentError("rho must be finite and >= 0")
    weighted = Y * w
    return weighted.min(axis=1) + rho * weighted.sum(axis=1)


def pareto_mask(values, senses=None) -> np.ndarray:
    """Boolean mask of rows not dominated by any other row.

    ``senses`` gives per-column "maximize"/"minimize"; default maximize.
    Duplicate rows do not dominate each other, so all copies of a
    non-dominated point are kept.
    """
    Y = np.atleast_2d(np.asarray(values, dtype=float)).copy()
    if not np.all(np.isfinite(Y)):
        raise ArgumentError("values must be finite")
    if senses is not None:
        if len(senses) != Y.shape[1]:
            raise ArgumentError("senses length does not match objective count")
        for k, sense in enumerate(senses):
            check_choice(sense, "sense", ("maximize", "minimize"))
            if sense == "minimize":
                Y[:, k] = -Y[:, k]
    n = Y.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        at_least = np.all(Y >= Y[i], axis=1)
        strictly = np.any(Y > Y[i], axis=1)
        keep[i] = not np.any(at_least & strictly)
    return keep
