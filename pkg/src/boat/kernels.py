"""Matern covariance family with per-dimension (ARD) length scales.

The three half-integer smoothness orders have closed polynomial-exponential
forms in the scaled distance

    r = sqrt(sum_d ((a_d - b_d) / length_scale_d)^2)

    half:         amplitude_sq * exp(-r)
    three_halves: amplitude_sq * exp(-sqrt(3) r) (1 + sqrt(3) r)
    five_halves:  amplitude_sq * exp(-sqrt(5) r) (1 + sqrt(5) r + 5/3 r^2)

Rougher orders produce rougher sample paths; ``five_halves`` is the default
everywhere in this package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

SMOOTHNESS_ORDERS = ("half", "three_halves", "five_halves")

SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)


@dataclass(frozen=True)
class KernelParams:
    """Hyperparameters of an ARD Matern kernel.

    ``amplitude_sq`` is the signal variance (the kernel value at zero
    distance); ``length_scales`` holds one positive scale per input
    dimension.
    """

    amplitude_sq: float
    length_scales: np.ndarray
    smoothness: str = "five_halves"

    def __post_init__(self):
        scales = np.asarray(self.length_scales, dtype=float).ravel()
        if scales.size == 0:
            raise ArgumentError("length_scales must be non-empty")
        if not np.all(np.isfinite(scales)) or np.any(scales <= 0):
            raise ArgumentError("length_scales must be finite and > 0")
        amp = float(self.amplitude_sq)
        if not np.isfinite(amp) or amp <= 0:
            raise ArgumentError("amplitude_sq must be finite and > 0")
        if self.smoothness not in SMOOTHNESS_ORDERS:
            raise ArgumentError(
                f"smoothness must be one of {SMOOTHNESS_ORDERS}, "
                f"got {self.smoothness!r}"
            )
        object.__setattr__(self, "amplitude_sq", amp)
        scales.setflags(write=False)
        object.__setattr__(self, "length_scales", scales)

    @property
    def dimension(self) -> int:
        return self.length_scales.size

    def to_dict(self) -> dict:
        return {
            "amplitude_sq": self.amplitude_sq,
            "length_scales": self.length_scales.tolist(),
            "smoothness": self.smoothness,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "KernelParams":
        return cls(
            float(doc["amplitude_sq"]),
            np.asarray(doc["length_scales"], dtype=float),
            doc.get("smoothness", "five_halves"),
        )


def _profile(r: np.ndarray, smoothness: str) -> np.ndarray:
    """The unit-amplitude radial profile g(r), with g(0) = 1."""
    if smoothness == "half":
        return np.exp(-r)
    if smoothness == "three_halves":
        sr = SQRT3 * r
        return np.exp(-sr) * (1.0 + sr)
    if smoothness == "five_halves":
        sr = SQRT5 * r
        return np.exp(-sr) * (1.0 + sr + (5.0 / 3.0) * r * r)
    raise ArgumentError(f"unknown smoothness {smoothness!r}")


def _scaled_distance(A: np.ndarray, B: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """Pairwise r between rows of A and rows of B."""
    Au = A / scales
    Bu = B / scales
    sq = (
        np.sum(Au * Au, axis=1)[:, None]
        + np.sum(Bu * Bu, axis=1)[None, :]
        - 2.0 * Au @ Bu.T
    )
    return np.sqrt(np.maximum(sq, 0.0))


def matern_kernel(a, b, params: KernelParams) -> float:
    """Covariance between two single points.

    Symmetric in its arguments and equal to ``amplitude_sq`` at zero
    distance.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    d = params.dimension
    if a.size != d or b.size != d:
        raise ArgumentError(
            f"points have dimensions {a.size} and {b.size}, kernel expects {d}"
        )
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ArgumentError("kernel inputs must be finite")
    u = (a - b) / params.length_scales
    r = float(np.sqrt(np.sum(u * u)))
    return params.amplitude_sq * float(_profile(np.array(r), params.smoothness))


def kernel_matrix(points, params: KernelParams) -> np.ndarray:
    """n-by-n covariance matrix of a point set.

    Exactly symmetric (filled from the upper triangle) with
    ``amplitude_sq`` on the diagonal.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[1] != params.dimension:
        raise ArgumentError(
            f"points must be (n, {params.dimension}), got {X.shape}"
        )
    if X.size and not np.all(np.isfinite(X)):
        raise ArgumentError("points must be finite")
    r = _scaled_distance(X, X, params.length_scales)
    K = params.amplitude_sq * _profile(r, params.smoothness)
    K = np.triu(K) + np.triu(K, 1).T
    np.fill_diagonal(K, params.amplitude_sq)
    return K


def cross_kernel(A, B, params: KernelParams) -> np.ndarray:
    """Covariance matrix between two point sets, shape (len(A), len(B))."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != params.dimension or B.shape[1] != params.dimension:
        raise ArgumentError("cross_kernel dimension mismatch")
    r = _scaled_distance(A, B, params.length_scales)
    return params.amplitude_sq * _profile(r, params.smoothness)


def kernel_matrix_with_scale_gradients(points, params: KernelParams):
    """Kernel matrix plus its derivatives w.r.t. each log length scale.

    Returns ``(K, grads)`` where ``grads[d]`` is dK / d(log length_scale_d).
    Derivatives follow from the radial profiles:

        d g(r) / d log(scale_d) = -g'(r) * u_d^2 / r,   u_d = delta_d / scale_d

    with the removable singularity at r = 0 set to zero (the diagonal does
    not depend on the length scales).
    """
    X = np.asarray(points, dtype=float)
    scales = params.length_scales
    U = X / scales
    diffs = U[:, None, :] - U[None, :, :]          # (n, n, d)
    r = np.sqrt(np.maximum(np.sum(diffs * diffs, axis=2), 0.0))
    K = params.amplitude_sq * _profile(r, params.smoothness)
    np.fill_diagonal(K, params.amplitude_sq)

    # -g'(r)/r, which stays bounded for the two smoother orders.
    sm = params.smoothness
    with np.errstate(divide="ignore", invalid="ignore"):
        if sm == "half":
            factor = np.where(r > 0, np.exp(-r) / r, 0.0)
        elif sm == "three_halves":
            factor = 3.0 * np.exp(-SQRT3 * r)
        else:
            factor = (5.0 / 3.0) * (1.0 + SQRT5 * r) * np.exp(-SQRT5 * r)

    grads = []
    for d in range(params.dimension):
        grads.append(params.amplitude_sq * factor * diffs[:, :, d] ** 2)
    return K, grads
