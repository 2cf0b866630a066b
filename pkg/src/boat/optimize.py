"""Acquisition maximization and batch suggestion.

The maximizer is derivative-free: a scrambled Sobol sweep over the design
box scores a dense candidate set, then the best few candidates get a
coordinate pattern-search polish (probe +/- step along each axis, accept
improvement, halve the step otherwise).  Everything is seeded, ties break
to the earliest candidate, and results are clipped to the box, so the
procedure is fully deterministic.

Batches are grown greedily.  The first element is always the plain
single-point acquisition maximizer, so a batch of one reduces exactly to
the sequential method; later elements come from the selected strategy:

    joint_qei          re-scores candidates by the Monte Carlo joint
                       expected improvement of the batch-plus-candidate,
                       sharing one draw matrix across steps
    constant_liar      conditions the model on a placeholder output equal
                       to the incumbent at each chosen point
    local_penalization multiplies the acquisition by a soft exclusion
                       factor around each chosen point, sized by a
                       Lipschitz estimate of the posterior mean
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.stats import norm, qmc

from .acquisition import (
    AcquisitionSpec,
    _nested_cholesky,
    expected_improvement,
    upper_confidence_bound,
)
from .errors import ArgumentError
from .space import DesignSpace

# Minimum pairwise distance between batch members, in unit-box coordinates.
MIN_SEPARATION = 1e-6


@dataclass(frozen=True)
class OptBudget:
    """Evaluation budget of the acquisition maximizer."""

    candidates: int = 512
    refinements: int = 10
    max_local_steps: int = 60

    def __post_init__(self):
        if int(self.candidates) < 1:
            raise ArgumentError("candidates must be at least 1")
        if int(self.refinements) < 0:
            raise ArgumentError("refinements must be >= 0")
        if int(self.max_local_steps) < 0:
            raise ArgumentError("max_local_steps must be >= 0")
        object.__setattr__(self, "candidates", int(self.candidates))
        object.__setattr__(self, "refinements", int(self.refinements))
        object.__setattr__(self, "max_local_steps", int(self.max_local_steps))

    def to_dict(self) -> dict:
        return {
            "candidates": self.candidates,
            "refinements": self.refinements,
            "max_local_steps": self.max_local_steps,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "OptBudget":
        return cls(
            candidates=int(doc.get("candidates", 512)),
            refinements=int(doc.get("refinements", 10)),
            max_local_steps=int(doc.get("max_local_steps", 60)),
        )


@dataclass
class OptResult:
    """Best point found plus the scored alternatives, ordered best-first."""

    x: np.ndarray
    value: float
    ranked_points: np.ndarray
    ranked_values: np.ndarray


def sobol_candidates(space: DesignSpace, n: int, seed: int) -> np.ndarray:
    """n scrambled Sobol points inside the design box.

    Sobol balance properties hold at powers of two, so the sampler draws
    the next power and keeps the first n rows.
    """
    if n < 1:
        raise ArgumentError("n must be positive")
    sampler = qmc.Sobol(d=space.dimension, scramble=True, seed=seed)
    m = max(1, math.ceil(math.log2(n)))
    unit = sampler.random_base2(m)[:n]
    return qmc.scale(unit, space.lower, space.upper)


def _pattern_search(acq_fn, x0, v0, space: DesignSpace, max_steps: int):
    """Coordinate descent with a halving step, in fractions of the box."""
    span = space.upper - space.lower
    x = np.array(x0, dtype=float)
    v = float(v0)
    step = 0.25
    steps = 0
    d = space.dimension
    while steps < max_steps and step >= 1e-4:
        probes = np.repeat(x[None, :], 2 * d, axis=0)
        for k in range(d):
            probes[2 * k, k] += step * span[k]
            probes[2 * k + 1, k] -= step * span[k]
        probes = np.clip(probes, space.lower, space.upper)
        values = np.asarray(acq_fn(probes), dtype=float)
        best = int(np.argmax(values))
        if values[best] > v:
            x = probes[best]
            v = float(values[best])
        else:
            step *= 0.5
        steps += 1
    return x, v


def maximize_acquisition(acq_fn, space: DesignSpace, budget=None, seed: int = 0):
    """Maximize a vectorized acquisition ``acq_fn((k, d)) -> (k,)`` over the box.

    Returns an OptResult whose ranked arrays hold every scored point
    (polished candidates first) in descending value order, for callers that
    need fallback alternatives.
    """
    budget = budget if budget is not None else OptBudget()
    X = sobol_candidates(space, budget.candidates, seed)
    values = np.asarray(acq_fn(X), dtype=float)
    if values.shape != (len(X),):
        raise ArgumentError(
            f"acquisition returned shape {values.shape}, expected ({len(X)},)"
        )
    values = np.where(np.isfinite(values), values, -np.inf)

    order = np.lexsort((np.arange(len(X)), -values))
    n_polish = min(budget.refinements, len(X))
    polished_points = []
    polished_values = []
    for idx in order[:n_polish]:
        x, v = _pattern_search(
            acq_fn, X[idx], values[idx], space, budget.max_local_steps
        )
        polished_points.append(x)
        polished_values.append(v)

    if polished_points:
        all_points = np.vstack([np.asarray(polished_points), X])
        all_values = np.concatenate([polished_values, values])
    else:
        all_points, all_values = X, values
    rank = np.lexsort((np.arange(len(all_values)), -all_values))
    ranked_points = np.clip(all_points[rank], space.lower, space.upper)
    ranked_values = all_values[rank]
    return OptResult(
        x=ranked_points[0].copy(),
        value=float(ranked_values[0]),
        ranked_points=ranked_points,
        ranked_values=ranked_values,
    )


def _derived_seed(seed: int, *branch: int) -> int:
    return int(np.random.SeedSequence([int(seed), *branch]).generate_state(1)[0])


def _to_unit(space: DesignSpace, X: np.ndarray) -> np.ndarray:
    span = np.where(space.upper > space.lower, space.upper - space.lower, 1.0)
    return (np.atleast_2d(X) - space.lower) / span


def _pick_separated(result: OptResult, chosen: list, space: DesignSpace, seed: int):
    """First ranked point at least MIN_SEPARATION from every chosen point."""
    if not chosen:
        return result.x
    chosen_unit = _to_unit(space, np.asarray(chosen))
    for point in result.ranked_points:
        gap = np.linalg.norm(_to_unit(space, point) - chosen_unit, axis=1).min()
        if gap >= MIN_SEPARATION:
            return point.copy()
    # Every scored point collides; fall back to a fresh space-filling draw.
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        point = space.lower + rng.random(space.dimension) * (
            space.upper - space.lower
        )
        gap = np.linalg.norm(_to_unit(space, point) - chosen_unit, axis=1).min()
        if gap >= MIN_SEPARATION:
            return point
    raise ArgumentError(
        "could not place a batch point away from the points already chosen"
    )


def _base_acquisition(model, spec: AcquisitionSpec, incumbent: float):
    def acq(X):
        mean, var = model.posterior(X)
        if spec.kind == "ucb":
            return upper_confidence_bound(mean, var, spec.beta)
        return expected_improvement(mean, var, incumbent)

    return acq


def _joint_extension_score(model, batch, incumbent, z):
    """Vectorized qEI of batch-plus-one-candidate sharing the draws ``z``.

    The batch covariance factor is extended one pivot per candidate, which
    reproduces exactly what the nested Cholesky of the full batch would
    produce, so greedy scores match a from-scratch re-scoring of the grown
    batch with the same seed.
    """
    j = len(batch)
    if j == 0:
        best_prev = None
        L0 = np.zeros((0, 0))
        mean_b = np.zeros(0)
    else:
        mean_b, cov_bb = model.joint_posterior(np.asarray(batch))
        L0 = _nested_cholesky(cov_bb)
        f0 = mean_b[:, None] + L0 @ z[:j]
        best_prev = f0.max(axis=0)

    def score(X):
        X = np.atleast_2d(X)
        stacked = np.vstack([np.asarray(batch).reshape(j, -1), X]) if j else X
        mean_all, cov_all = model.joint_posterior(stacked)
        mean_c = mean_all[j:]
        var_c = np.diag(cov_all)[j:]
        if j:
            C = cov_all[:j, j:]
            R = solve_triangular(L0, C, lower=True) if j else C
            proj = R.T @ z[:j]
            rem = var_c - np.sum(R * R, axis=0)
        else:
            proj = np.zeros((len(X), z.shape[1]))
            rem = var_c
        floor = 1e-12 * np.maximum(var_c, 1e-12)
        d = np.sqrt(np.maximum(rem, floor))
        collapsed = rem <= floor
        d = np.where(collapsed, np.sqrt(floor), d)
        F = mean_c[:, None] + proj + d[:, None] * z[j][None, :]
        if best_prev is not None:
            F = np.maximum(F, best_prev[None, :])
        return np.maximum(F - incumbent, 0.0).mean(axis=1)

    return score


def suggest_batch(
    model,
    space: DesignSpace,
    incumbent: float,
    q: int,
    spec: AcquisitionSpec | None = None,
    budget: OptBudget | None = None,
    seed: int = 0,
    avoid=None,
) -> np.ndarray:
    """Choose q design points to evaluate next.

    The first point maximizes the plain single-point acquisition, so every
    strategy agrees with the sequential method at q = 1.  Later points
    follow the strategy named in ``spec``.  All points lie inside the box
    and are pairwise separated by at least MIN_SEPARATION in unit-box
    coordinates, from each other and from any ``avoid`` rows (points
    already pending elsewhere, typically).
    """
    spec = spec if spec is not None else AcquisitionSpec()
    budget = budget if budget is not None else OptBudget()
    if q < 1:
        raise ArgumentError("q must be at least 1")
    if not np.isfinite(incumbent):
        raise ArgumentError("incumbent must be finite")

    keep_out: list = (
        [np.asarray(row, dtype=float) for row in np.atleast_2d(avoid)]
        if avoid is not None and np.size(avoid)
        else []
    )
    new_points: list = []

    def place(result, step):
        point = _pick_separated(
            result, keep_out + new_points, space, _derived_seed(seed, step, 1)
        )
        new_points.append(point)

    first = maximize_acquisition(
        _base_acquisition(model, spec, incumbent), space, budget, seed
    )
    place(first, 0)
    if q == 1:
        return np.asarray(new_points)

    if spec.strategy == "joint_qei":
        z = np.random.default_rng(seed).standard_normal((q, spec.n_samples))
        for step in range(1, q):
            score = _joint_extension_score(model, new_points, incumbent, z)
            result = maximize_acquisition(
                score, space, budget, _derived_seed(seed, step)
            )
            place(result, step)
    elif spec.strategy == "constant_liar":
        lying_model = model
        for step in range(1, q):
            lying_model = lying_model.condition_on(
                np.asarray(new_points[-1])[None, :], np.array([incumbent])
            )
            result = maximize_acquisition(
                _base_acquisition(lying_model, spec, incumbent),
                space,
                budget,
                _derived_seed(seed, step),
            )
            place(result, step)
    else:
        lipschitz, mean_top = _penalization_context(
            model, space, budget, _derived_seed(seed, 7)
        )
        base = _base_acquisition(model, spec, incumbent)
        for step in range(1, q):
            penalized = _penalized_acquisition(
                base, model, new_points, lipschitz, mean_top
            )
            result = maximize_acquisition(
                penalized, space, budget, _derived_seed(seed, step)
            )
            place(result, step)
    return np.asarray(new_points)


def _penalization_context(model, space: DesignSpace, budget: OptBudget, seed: int):
    """Lipschitz estimate of the posterior mean and its observed maximum."""
    X = sobol_candidates(space, budget.candidates, seed)
    span = space.upper - space.lower
    grads = np.zeros_like(X)
    for k in range(space.dimension):
        eps = 1e-4 * span[k]
        hi = X.copy()
        hi[:, k] = np.minimum(hi[:, k] + eps, space.upper[k])
        lo = X.copy()
        lo[:, k] = np.maximum(lo[:, k] - eps, space.lower[k])
        gap = hi[:, k] - lo[:, k]
        grads[:, k] = (model.predict(hi) - model.predict(lo)) / gap
    lipschitz = float(np.linalg.norm(grads, axis=1).max())
    lipschitz = max(lipschitz, 1e-12)
    mean_top = float(model.predict(model.X_raw_).max())
    return lipschitz, mean_top


def _penalized_acquisition(base, model, chosen, lipschitz, mean_top):
    centers = np.asarray(chosen)
    c_mean, c_var = model.posterior(centers)
    c_sd = np.sqrt(np.maximum(c_var, 1e-18))

    def acq(X):
        X = np.atleast_2d(X)
        values = np.asarray(base(X), dtype=float)
        for j in range(len(centers)):
            r = np.linalg.norm(X - centers[j], axis=1)
            zst = (lipschitz * r - (mean_top - c_mean[j])) / (math.sqrt(2.0) * c_sd[j])
            values = values * norm.cdf(zst)
        return values

    return acq
