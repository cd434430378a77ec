"""Client selection with replacement and the bandit-feedback loss estimators.

The server selects K clients per round and only learns the importance
weights ``a_m`` of the clients it selected.  The estimators here turn that
partial observation into unbiased estimates of the variance-reduction loss
``l(q) = (1/K) sum_m a_m / q_m`` and of its gradient, by importance-weighting
each observed client with the probability it was sampled under.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ZeroProbabilityError
from .rng import categorical
from .simplex import _check_weights


@dataclass(frozen=True)
class BanditFeedback:
    """What the server observes in one round.

    ``multiplicities`` counts how many of the K draws landed on each selected
    client; ``observed`` holds those clients' importance weights a_m.  Both
    mappings carry exactly the selected clients.
    """

    K: int
    multiplicities: Mapping[int, int]
    observed: Mapping[int, float]

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        total = sum(self.multiplicities.values())
        if total != self.K:
            raise ValueError(f"multiplicities sum to {total}, expected K={self.K}")
        if any(c < 1 for c in self.multiplicities.values()):
            raise ValueError("multiplicities must be positive")
        if set(self.observed) != set(self.multiplicities):
            raise ValueError("observed clients must match the selected clients")
        for m, a in self.observed.items():
            if not np.isfinite(a) or a < 0:
                raise ValueError(f"observed value for client {m} is invalid: {a}")

    @property
    def max_observed(self) -> float:
        return max(self.observed.values())


def sample_with_replacement(
    p: np.ndarray, k: int, rng: np.random.Generator
) -> dict[int, int]:
    """K i.i.d. draws from p, returned as client -> multiplicity."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    draws = categorical(rng, p, k)
    clients, counts = np.unique(draws, return_counts=True)
    return {int(m): int(c) for m, c in zip(clients, counts)}


def variance_loss(q: np.ndarray, a: np.ndarray, k: int) -> float:
    """True variance-reduction loss (1/K) sum_m a_m / q_m.

    Clients with zero weight contribute nothing even at zero probability;
    positive weight at zero probability makes the loss infinite and is
    rejected.
    """
    q = np.asarray(q, dtype=np.float64)
    a = _check_weights(a, "a")
    pos = a > 0
    if np.any(pos & (q <= 0)):
        raise ZeroProbabilityError("a client with positive weight has zero probability")
    return float(np.sum(a[pos] / q[pos]) / k)


def estimated_loss(q: np.ndarray, p: np.ndarray, fb: BanditFeedback) -> float:
    """Unbiased estimate of variance_loss(q, a, K) from one round's feedback.

    ``p`` is the distribution the selection was drawn from; ``q`` is the point
    the loss is evaluated at.
    """
    q = np.asarray(q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    ksq = float(fb.K) ** 2
    total = 0.0
    for m, count in fb.multiplicities.items():
        a = fb.observed[m]
        if a == 0.0:
            continue
        if q[m] <= 0 or p[m] <= 0:
            raise ZeroProbabilityError(f"observed client {m} has zero probability")
        total += a / (q[m] * p[m]) * count
    return total / ksq


def estimated_gradient(q: np.ndarray, p: np.ndarray, fb: BanditFeedback) -> np.ndarray:
    """Unbiased estimate of the loss gradient; zero at unobserved clients.

    Entry m is ``-(1/K^2) a_m N_m / (q_m^2 p_m)`` for selected clients, where
    N_m is the selection multiplicity; every entry is nonpositive.
    """
    q = np.asarray(q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    grad = np.zeros_like(q)
    ksq = float(fb.K) ** 2
    for m, count in fb.multiplicities.items():
        a = fb.observed[m]
        if a == 0.0:
            continue
        if q[m] <= 0 or p[m] <= 0:
            raise ZeroProbabilityError(f"observed client {m} has zero probability")
        grad[m] = -a * count / (ksq * q[m] ** 2 * p[m])
    return grad
