"""Expert ensembles over learning rates, and the doubling-trick scheduler.

A single mirror-descent sampler needs a learning rate calibrated to unknown
quantities (how much the optimal distribution drifts, the horizon, the scale
of the importance weights).  The ensemble runs E copies on a geometric grid
of rates and mixes their distributions with exponential weights driven by the
estimated losses, so the mixture tracks whichever rate is currently best.
The doubling scheduler removes the horizon dependence by restarting the
ensemble on blocks of doubling length, re-estimating the weight scale at each
restart from the most recent feedback.
"""

from __future__ import annotations

import logging
import math
from typing import Mapping

import numpy as np

from .errors import DegenerateHorizonError, EmptyPretrainError
from .feedback import BanditFeedback, estimated_loss
from .osmd import OsmdSampler, RateSchedule
from .simplex import FloorConstraint, uniform_distribution

logger = logging.getLogger(__name__)

# Substituted for a zero weight-scale estimate so grid rates stay finite.
A_BAR_FLOOR = 1e-12


def floored_scale(a_bar: float) -> float:
    """Apply the positivity floor to a weight-scale estimate, logging if hit."""
    if a_bar < A_BAR_FLOOR:
        logger.warning("weight-scale estimate %.3g floored at %.0e", a_bar, A_BAR_FLOOR)
        return A_BAR_FLOOR
    return float(a_bar)


def pretrain_estimate(observed: Mapping[int, float]) -> float:
    """Max importance weight among clients that responded to the initial broadcast."""
    if not observed:
        raise EmptyPretrainError("no client responded during pre-training")
    return float(max(observed.values()))


def expert_count(M: int, alpha: float, T: int) -> int:
    """Number of grid rates needed to bracket every plausible tuned rate."""
    growth = 4.0 * math.log(M / alpha) / math.log(M) * (T - 1)
    return int(math.floor(0.5 * math.log2(1.0 + growth))) + 1


def _expert_rates(M: int, alpha: float, K: int, a_bar: float, horizon: int) -> np.ndarray:
    base = (
        K**2 * alpha**3 / (M**3 * a_bar) * math.sqrt(math.log(M) / (2.0 * horizon))
    )
    return base * np.power(2.0, np.arange(expert_count(M, alpha, horizon), dtype=np.float64))


def expert_grid(M: int, alpha: float, K: int, a_bar: float, T: int) -> np.ndarray:
    """Geometric grid of expert learning rates (ratio 2) for a known horizon.

    The smallest rate matches a zero-drift tuning and consecutive doublings
    cover drift up to the maximum possible, so some grid rate is always
    within a factor two of the unknown tuned rate.
    """
    if M < 2:
        raise ValueError(f"M must be >= 2, got {M}")
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if a_bar <= 0:
        raise ValueError(f"a_bar must be positive, got {a_bar}")
    if T < 2:
        raise DegenerateHorizonError(f"horizon must be >= 2, got {T}")
    return _expert_rates(M, alpha, K, a_bar, T)


def meta_rate(M: int, alpha: float, K: int, a_bar: float, horizon: int) -> float:
    """Exponential-weights learning rate tuned to the horizon and weight scale."""
    return alpha / M * math.sqrt(8.0 * K / (horizon * a_bar))


def meta_init(E: int) -> np.ndarray:
    """Initial expert weights (1 + 1/E) / (e (e + 1)), e = 1..E.

    Sums to one exactly and keeps every weight at least 1/E^2, so no expert
    starts with a vanishing say.
    """
    if E < 1:
        raise ValueError(f"E must be >= 1, got {E}")
    e = np.arange(1, E + 1, dtype=np.float64)
    return (1.0 + 1.0 / E) / (e * (e + 1.0))


class AdaptiveOsmdSampler:
    """Exponential-weights mixture of mirror-descent samplers.

    All experts share one selection per round, drawn from the aggregated
    distribution; each expert's gradient estimate is importance-weighted by
    that aggregated distribution, so a single round of bandit feedback
    advances every expert.
    """

    def __init__(
        self,
        constraint: FloorConstraint,
        rates,
        gamma: float,
        init: np.ndarray | None = None,
    ):
        rates = np.atleast_1d(np.asarray(rates, dtype=np.float64))
        if rates.size < 1:
            raise ValueError("need at least one expert rate")
        if gamma <= 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        self.constraint = constraint
        self.gamma = float(gamma)
        self.experts = [
            OsmdSampler(constraint, RateSchedule.constant(r), init=init) for r in rates
        ]
        # Meta weights are kept in log space so a badly losing expert can sink
        # arbitrarily low without underflow warnings or NaNs.
        self._log_theta = np.log(meta_init(len(self.experts)))
        self.t = 1
        self.aggregated = self._aggregate()

    @classmethod
    def from_horizon(
        cls,
        M: int,
        K: int,
        alpha: float,
        a_bar: float,
        T: int,
        init: np.ndarray | None = None,
    ) -> "AdaptiveOsmdSampler":
        """Build the grid and meta rate for a known horizon and weight scale."""
        a_bar = floored_scale(a_bar)
        horizon = max(T, 1)
        return cls(
            FloorConstraint(alpha, M),
            _expert_rates(M, alpha, K, a_bar, horizon),
            meta_rate(M, alpha, K, a_bar, horizon),
            init=init,
        )

    @property
    def num_experts(self) -> int:
        return len(self.experts)

    @property
    def theta(self) -> np.ndarray:
        w = np.exp(self._log_theta - self._log_theta.max())
        return w / w.sum()

    def distribution(self) -> np.ndarray:
        return self.aggregated

    def _aggregate(self) -> np.ndarray:
        first = self.experts[0].current
        if all(np.array_equal(e.current, first) for e in self.experts[1:]):
            # A convex combination of identical points is that point; taking
            # it directly keeps degenerate cases (single expert, alpha = 1)
            # exactly reproducible.
            return first.copy()
        stacked = np.stack([e.current for e in self.experts])
        agg = stacked.T @ self.theta
        return agg / agg.sum()

    def update(self, fb: BanditFeedback) -> None:
        """Advance every expert on the shared feedback, then reweight them.

        The feedback must have been drawn from the current aggregated
        distribution.
        """
        sampling = self.aggregated
        losses = np.array(
            [estimated_loss(e.current, sampling, fb) for e in self.experts]
        )
        for expert in self.experts:
            expert.step(fb, sampling=sampling)
        # Exponential weights; shifting by the max keeps the leader at
        # exp(0) so the normalization can never underflow.
        logw = self._log_theta - self.gamma * losses
        logw -= logw.max()
        self._log_theta = logw - np.log(np.exp(logw).sum())
        self.aggregated = self._aggregate()
        self.t += 1


class DoublingOsmdSampler:
    """Horizon-free wrapper: restart the ensemble on blocks of doubling length.

    Block b covers rounds 2^(b-1) .. 2^b - 1 and is tuned for its own length;
    at each restart the weight scale is re-estimated from the previous round's
    observed weights, and the experts start either from the uniform
    distribution or warm-started from the aggregated distribution reached at
    the end of the previous block.
    """

    def __init__(
        self,
        M: int,
        K: int,
        alpha: float,
        pretrain: Mapping[int, float] | float,
        warm_start: bool = True,
        single_block_horizon: int | None = None,
    ):
        self.M = M
        self.K = K
        self.alpha = alpha
        self.warm_start = warm_start
        self.constraint = FloorConstraint(alpha, M)
        if isinstance(pretrain, Mapping):
            a_hat = pretrain_estimate(pretrain)
        else:
            a_hat = float(pretrain)
        self.a_hat = floored_scale(a_hat)
        self.t = 1
        self.block = 1
        self._single = single_block_horizon
        self._last_observed_max = None
        self.inner = self._start_block(self._horizon(1), init=None)

    def _horizon(self, block: int) -> int:
        if self._single is not None:
            return self._single
        return 2 ** (block - 1)

    def _start_block(self, horizon: int, init) -> AdaptiveOsmdSampler:
        return AdaptiveOsmdSampler.from_horizon(
            self.M, self.K, self.alpha, self.a_hat, horizon, init=init
        )

    def distribution(self) -> np.ndarray:
        return self.inner.distribution()

    def update(self, fb: BanditFeedback) -> None:
        self.inner.update(fb)
        self._last_observed_max = fb.max_observed
        self.t += 1
        if self._single is None and self.t == 2**self.block:
            self.block += 1
            self.a_hat = floored_scale(self._last_observed_max)
            init = self.inner.distribution().copy() if self.warm_start else None
            self.inner = self._start_block(self._horizon(self.block), init=init)
