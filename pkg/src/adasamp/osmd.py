"""Mirror-descent updater for the sampling distribution.

With the (unnormalized) negative-entropy mirror map, each step is a
multiplicative update driven by the estimated loss gradient followed by a KL
projection back onto the floored simplex.  Observed clients get their
probability multiplied up according to how large their importance weight was
relative to how likely they were to be seen; unobserved clients are left
untouched and only move through the projection's renormalization.
"""

from __future__ import annotations

import logging

import numpy as np

from .feedback import BanditFeedback, estimated_gradient
from .simplex import FloorConstraint, floor_kl_projection, uniform_distribution

logger = logging.getLogger(__name__)

# Cap on the multiplicative-update exponent before exponentiation.  With the
# probability floor in force the exponent is bounded anyway; the cap is a
# guard against misconfigured learning rates and is logged when it bites.
EXPONENT_CAP = 60.0


class RateSchedule:
    """Positive nonincreasing learning rates, constant or an explicit list."""

    def __init__(self, values):
        v = np.atleast_1d(np.asarray(values, dtype=np.float64))
        if v.size < 1:
            raise ValueError("rate schedule is empty")
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise ValueError("rates must be positive and finite")
        if np.any(np.diff(v) > 0):
            raise ValueError("rates must be nonincreasing")
        self._values = v

    @classmethod
    def constant(cls, eta: float) -> "RateSchedule":
        return cls([eta])

    @classmethod
    def from_list(cls, values) -> "RateSchedule":
        return cls(values)

    def __call__(self, t: int) -> float:
        """Rate for round t (1-indexed); holds the last value past the end."""
        if t < 1:
            raise ValueError(f"t must be >= 1, got {t}")
        return float(self._values[min(t, len(self._values)) - 1])


def multiplicative_update(
    p: np.ndarray,
    fb: BanditFeedback,
    eta: float,
    sampling: np.ndarray | None = None,
) -> np.ndarray:
    """One exponentiated-gradient step, before projection.

    Entry m becomes ``p_m * exp(eta * N_m * a_m / (K^2 p_m^2 s_m))`` where s
    is the distribution the selection was drawn from (``sampling``, defaulting
    to p itself).  Passing a separate ``sampling`` lets an expert update its
    own point with feedback collected under an aggregated distribution.
    """
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    p = np.asarray(p, dtype=np.float64)
    s = p if sampling is None else np.asarray(sampling, dtype=np.float64)
    exponent = -eta * estimated_gradient(p, s, fb)
    over = exponent > EXPONENT_CAP
    if np.any(over):
        logger.warning(
            "clamped %d multiplicative-update exponents at %.0f (max was %.3g)",
            int(over.sum()),
            EXPONENT_CAP,
            float(exponent.max()),
        )
        exponent = np.minimum(exponent, EXPONENT_CAP)
    return p * np.exp(exponent)


class OsmdSampler:
    """Online sampling-distribution updater on the floored simplex.

    Single-owner mutable state; rounds are inherently sequential.  Starts at
    the uniform distribution unless a warm-start point inside the constraint
    set is supplied.
    """

    def __init__(
        self,
        constraint: FloorConstraint,
        rates: RateSchedule,
        init: np.ndarray | None = None,
    ):
        self.constraint = constraint
        self.rates = rates
        if init is None:
            self.current = uniform_distribution(constraint.M)
        else:
            init = np.asarray(init, dtype=np.float64)
            if not constraint.contains(init, tol=1e-9):
                raise ValueError("init distribution violates the floor constraint")
            self.current = init.copy()
        self.t = 1

    def distribution(self) -> np.ndarray:
        return self.current

    def step(self, fb: BanditFeedback, sampling: np.ndarray | None = None) -> None:
        """Advance one round on the given feedback.

        The feedback must have been generated by sampling from this state's
        current distribution (or from ``sampling`` when aggregating experts);
        that is the caller's contract and is not verifiable here.
        """
        eta = self.rates(self.t)
        tilted = multiplicative_update(self.current, fb, eta, sampling)
        self.current = floor_kl_projection(tilted, self.constraint)
        self.t += 1


def eta_star(M: int, K: int, alpha: float, a_bar: float, tv: float, T: int) -> float:
    """Oracle-tuned constant learning rate.

    Needs the total variation of the optimal-distribution sequence and the
    horizon, neither of which is observable during a run, so this is only
    useful post hoc: compute the optimal sequence from logged full-information
    weights, measure its total variation, and replay with this rate as a
    tuned baseline.
    """
    if a_bar <= 0:
        raise ValueError("a_bar must be positive")
    if tv < 0:
        raise ValueError("tv must be nonnegative")
    return (
        K**2
        * alpha**3
        / (M**3 * a_bar)
        * np.sqrt((np.log(M) + 2.0 * np.log(M / alpha) * tv) / (2.0 * T))
    )
