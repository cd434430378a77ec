"""Probability-simplex arithmetic on the floored constraint set.

Distributions are plain 1-D float arrays that sum to one.  The constraint
set used by the samplers is the simplex intersected with the entrywise floor
alpha/M, which keeps every client's selection probability bounded away from
zero.  Its KL projection has a closed sorted-threshold form: entries below a
data-dependent threshold are pinned to the floor and the rest are rescaled
proportionally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidAlphaError,
    NonFiniteInputError,
    NonPositiveInputError,
    SupportMismatchError,
    ZeroSumError,
)

# Absolute tolerance on the sum of a distribution after construction.
SUM_TOL = 1e-9
# Inputs whose sum deviates from one by at most this much are renormalized
# rather than rejected.
RENORM_TOL = 1e-6


@dataclass(frozen=True)
class FloorConstraint:
    """Simplex intersected with the entrywise floor ``alpha / M``.

    alpha = 1 collapses the set to the single point: the uniform
    distribution over M clients.
    """

    alpha: float
    M: int

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidAlphaError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")

    @property
    def floor(self) -> float:
        return self.alpha / self.M

    def contains(self, p: np.ndarray, tol: float = 1e-12) -> bool:
        p = np.asarray(p, dtype=np.float64)
        return (
            p.shape == (self.M,)
            and bool(np.all(p >= self.floor - tol))
            and abs(float(p.sum()) - 1.0) <= SUM_TOL
        )


def _check_weights(values, name: str = "weights") -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInputError(f"{name} contains NaN or infinite entries")
    if np.any(v < 0):
        raise ValueError(f"{name} contains negative entries")
    return v


def as_distribution(values, name: str = "distribution") -> np.ndarray:
    """Validate and renormalize a probability vector.

    Accepts sums within RENORM_TOL of one and divides them out; anything
    further off is rejected as a genuinely malformed distribution.
    """
    p = _check_weights(values, name)
    total = float(p.sum())
    if abs(total - 1.0) > RENORM_TOL:
        raise ValueError(f"{name} sums to {total}, not 1")
    return p / total


def uniform_distribution(m: int) -> np.ndarray:
    return np.full(m, 1.0 / m)


def make_distribution(weights) -> np.ndarray:
    """Normalize nonnegative weights into a probability vector."""
    w = _check_weights(weights)
    total = float(w.sum())
    if total <= 0.0:
        raise ZeroSumError("weights sum to zero")
    return w / total


def optimal_distribution(a) -> np.ndarray:
    """Variance-minimizing sampling distribution: entries proportional to sqrt(a).

    Minimizes the variance-reduction loss ``(1/K) sum_m a_m / q_m`` over the
    whole simplex.
    """
    a = _check_weights(a, "a")
    root = np.sqrt(a)
    total = float(root.sum())
    if total <= 0.0:
        raise ZeroSumError("a has no positive entry")
    return root / total


def kl_divergence(x, y) -> float:
    """Generalized KL divergence sum(x log(x/y)) - sum(x) + sum(y).

    Defined for nonnegative vectors (not just distributions); 0 log 0 is 0.
    For two distributions the linear terms cancel and this is the ordinary
    KL divergence.
    """
    x = _check_weights(x, "x")
    y = _check_weights(y, "y")
    if x.shape != y.shape:
        raise DimensionMismatchError(f"shapes differ: {x.shape} vs {y.shape}")
    pos = x > 0
    if np.any(pos & (y == 0)):
        raise SupportMismatchError("x has mass where y is zero")
    val = float(np.sum(x[pos] * np.log(x[pos] / y[pos])) - x.sum() + y.sum())
    return val


def floor_kl_projection(y, constraint: FloorConstraint) -> np.ndarray:
    """KL-project a positive vector onto the floored simplex.

    Sort the entries, find the smallest sorted rank whose entry clears the
    threshold ``y_(m) (1 - (m-1) alpha / M) > (alpha/M) sum_{j>=m} y_(j)``,
    pin everything below that rank to alpha/M, and rescale the rest
    proportionally so the result sums to one.  The output is invariant to
    positive rescaling of ``y``; we divide by the max entry up front purely
    to keep intermediates in floating-point range.

    Ties are broken by original index (stable sort) so runs are reproducible;
    any tie-break yields the same projection value.  The stable sort (timsort)
    also exploits the near-sortedness of multiplicative-update iterates,
    though correctness does not depend on that.
    """
    y = np.asarray(y, dtype=np.float64)
    m = constraint.M
    if y.shape != (m,):
        raise DimensionMismatchError(f"expected shape ({m},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise NonFiniteInputError("y contains NaN or infinite entries")
    if np.any(y <= 0):
        raise NonPositiveInputError("y must be strictly positive")
    alpha = constraint.alpha
    floor = constraint.floor
    if alpha == 1.0:
        # The constraint set is the single uniform point; returning it
        # directly keeps the degenerate case exact to the bit.
        return np.full(m, floor)

    y = y / y.max()
    order = np.argsort(y, kind="stable")
    ys = y[order]
    suffix = np.cumsum(ys[::-1])[::-1]
    ranks = np.arange(1, m + 1, dtype=np.float64)
    above = ys * (1.0 - (ranks - 1.0) / m * alpha) > floor * suffix
    hits = np.flatnonzero(above)
    if hits.size == 0:
        # The largest entry always clears the threshold when alpha < 1;
        # pinning everything is the safe fallback if rounding says otherwise.
        return np.full(m, floor)
    k = int(hits[0])
    out = np.empty(m)
    out[order[:k]] = floor
    scale = (1.0 - (k / m) * alpha) / suffix[k]
    out[order[k:]] = ys[k:] * scale
    return out


def total_variation(seq) -> float:
    """Sum of L1 distances between consecutive distributions in a sequence."""
    if len(seq) < 1:
        raise ValueError("sequence must contain at least one distribution")
    arrs = [np.asarray(p, dtype=np.float64) for p in seq]
    m = arrs[0].shape
    for p in arrs[1:]:
        if p.shape != m:
            raise DimensionMismatchError("distributions have differing lengths")
    return float(
        sum(np.abs(b - a).sum() for a, b in zip(arrs[:-1], arrs[1:]))
    )


def projection_gap(q, constraint: FloorConstraint) -> tuple[float, float, float]:
    """How far a distribution sits outside the floored simplex.

    Returns (psi, omega, phi): psi is the total mass missing below the floor,
    omega the ratio of that deficit to the mass available above the floor,
    and phi the resulting multiplicative loss inflation factor.  All three are
    zero when q already satisfies the floor; omega always lies in [0, 1] and
    phi is at most M / alpha.
    """
    q = as_distribution(q, "q")
    m = constraint.M
    if q.shape != (m,):
        raise DimensionMismatchError(f"expected shape ({m},), got {q.shape}")
    floor = constraint.floor
    below = q < floor
    psi = float(np.sum(floor - q[below]))
    if psi == 0.0:
        return 0.0, 0.0, 0.0
    above = float(np.sum(q[~below] - floor))
    omega = psi / above
    phi = omega / (1.0 - omega * (1.0 - floor))
    return psi, omega, phi
