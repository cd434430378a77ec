"""Federated-SGD simulation with full-information regret accounting.

The simulator plays the five-step federated round: pick clients from the
sampler's current distribution, collect their minibatch gradients, aggregate
with importance weights, and take an SGD step.  As the environment it also
computes every client's importance weight each round, which lets it log the
per-round optimal distribution and both losses for the regret ledger, while
the sampler itself only ever receives the selected clients' weights (bandit
feedback).  Samplers that want full information must declare it via the
``needs_full_information`` attribute; only the oracle baseline does.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import AdaptiveOsmdSampler, DoublingOsmdSampler, pretrain_estimate
from .errors import TrainingDivergedError, ZeroProbabilityError
from .feedback import BanditFeedback, sample_with_replacement, variance_loss
from .osmd import OsmdSampler, RateSchedule
from .problems import FederatedProblem, batch_gradient, global_loss
from .rng import make_rng
from .simplex import (
    FloorConstraint,
    optimal_distribution,
    uniform_distribution,
)
from .wor import combine_gradients, sample_without_replacement

SAMPLER_KINDS = (
    "uniform",
    "oracle-optimal",
    "osmd",
    "adaptive-osmd",
    "adaptive-doubling-osmd",
)
REPLACEMENT_MODES = ("with", "without")

# Stream tags so data, selection, and pre-training randomness never collide.
_DATA_TAG = 0
_SELECT_TAG = 1


@dataclass(frozen=True)
class TrainConfig:
    """One training run's knobs."""

    K: int = 5
    batch: int = 10
    mu_sgd: float = 0.1
    T: int = 2000
    sampler_kind: str = "adaptive-osmd"
    replacement: str = "with"
    alpha: float = 0.4
    seed: int = 0
    warm_start: bool = True
    osmd_eta: float | None = None

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")
        if self.mu_sgd <= 0:
            raise ValueError(f"mu_sgd must be positive, got {self.mu_sgd}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if self.sampler_kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler_kind: {self.sampler_kind}")
        if self.replacement not in REPLACEMENT_MODES:
            raise ValueError(f"replacement must be 'with' or 'without', got {self.replacement}")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.sampler_kind == "osmd" and self.osmd_eta is None:
            raise ValueError("sampler_kind 'osmd' requires osmd_eta")


@dataclass(frozen=True)
class RoundRecord:
    """Everything logged about one round.

    ``chosen`` is the selection summary as sorted (client, multiplicity)
    pairs.  The oracle loss can never exceed the sampler loss beyond
    floating-point noise, since the logged optimal distribution minimizes the
    round's loss exactly.
    """

    t: int
    train_loss: float
    sampler_loss: float
    oracle_loss: float
    p_star: np.ndarray
    chosen: tuple[tuple[int, int], ...]


@dataclass
class RegretLedger:
    """Running regret and drift accounting over a run.

    ``cum_regret[t-1]`` is the summed gap between the sampler's loss and the
    per-round optimum through round t; ``tv_pstar[t-1]`` is the accumulated L1
    drift of the optimal distribution, which is nondecreasing.
    """

    cum_regret: list[float] = field(default_factory=list)
    tv_pstar: list[float] = field(default_factory=list)
    _last_p_star: np.ndarray | None = None

    def append(self, sampler_loss: float, oracle_loss: float, p_star: np.ndarray):
        prev = self.cum_regret[-1] if self.cum_regret else 0.0
        self.cum_regret.append(prev + (sampler_loss - oracle_loss))
        prev_tv = self.tv_pstar[-1] if self.tv_pstar else 0.0
        step = (
            float(np.abs(p_star - self._last_p_star).sum())
            if self._last_p_star is not None
            else 0.0
        )
        self.tv_pstar.append(prev_tv + step)
        self._last_p_star = p_star

    @property
    def final_regret(self) -> float:
        return self.cum_regret[-1] if self.cum_regret else 0.0


class UniformSampler:
    """Fixed uniform selection; ignores all feedback."""

    def __init__(self, m: int):
        self._dist = uniform_distribution(m)

    def distribution(self) -> np.ndarray:
        return self._dist

    def update(self, fb: BanditFeedback) -> None:
        pass


class OracleOptimalSampler:
    """Full-information baseline: samples from the per-round optimum.

    The simulator hands it every client's weight each round; it is the only
    sampler allowed across that boundary.
    """

    needs_full_information = True

    def __init__(self, m: int):
        self._dist = uniform_distribution(m)

    def receive_full_information(self, a: np.ndarray) -> None:
        if np.any(a > 0):
            self._dist = optimal_distribution(a)

    def distribution(self) -> np.ndarray:
        return self._dist

    def update(self, fb: BanditFeedback) -> None:
        pass


def pretrain_weights(problem: FederatedProblem, cfg: TrainConfig, w: np.ndarray) -> dict[int, float]:
    """Importance weights from the pre-training broadcast of the initial model.

    The broadcast is a one-off full-information phase: every client computes
    its exact local gradient at the initial model (no minibatch subsampling),
    so the returned scale estimate is deterministic and free of batch noise.
    """
    out = {}
    for m in range(problem.M):
        g = batch_gradient(problem, problem.features[m], problem.targets[m], w)
        out[m] = float(problem.lambdas[m] ** 2 * (g @ g))
    return out


def make_sampler(kind: str, problem: FederatedProblem, cfg: TrainConfig, a_bar: float | None = None):
    """Instantiate a sampler by kind; adaptive kinds need the pre-training scale."""
    m = problem.M
    if kind == "uniform":
        return UniformSampler(m)
    if kind == "oracle-optimal":
        return OracleOptimalSampler(m)
    constraint = FloorConstraint(cfg.alpha, m)
    if kind == "osmd":
        return OsmdSampler(constraint, RateSchedule.constant(cfg.osmd_eta))
    if a_bar is None:
        raise ValueError(f"sampler kind {kind} requires a pre-training weight scale")
    if kind == "adaptive-osmd":
        return AdaptiveOsmdSampler.from_horizon(m, cfg.K, cfg.alpha, a_bar, cfg.T)
    if kind == "adaptive-doubling-osmd":
        return DoublingOsmdSampler(
            m, cfg.K, cfg.alpha, a_bar, warm_start=cfg.warm_start
        )
    raise ValueError(f"unknown sampler kind: {kind}")


def round_gradients(
    problem: FederatedProblem, w: np.ndarray, batch: int, rng: np.random.Generator
) -> np.ndarray:
    """Every client's minibatch gradient for one round, stacked (M, dim).

    Client m's batch indices come from the m-th row of a single block of
    uniforms, so each client's randomness is a pure function of the round
    stream and the per-client computations can run in any order; the fast
    vectorized path below is used when client datasets are rectangular.
    """
    stacked = problem.stacked
    sizes = problem.client_sizes
    m_clients = problem.M
    if stacked is not None and problem.loss_family == "squared":
        x, y = stacked
        n = x.shape[1]
        if batch >= n:
            r = y - x @ w
            return -np.einsum("mn,mnd->md", r, x) / n
        u = rng.random((m_clients, batch))
        idx = np.minimum((u * n).astype(np.int64), n - 1)
        rows = np.arange(m_clients)[:, None]
        xb = x[rows, idx]
        yb = y[rows, idx]
        r = yb - xb @ w
        return -np.einsum("mb,mbd->md", r, xb) / batch
    # Generic (ragged or logistic) path: same uniform block, per-client math.
    u = rng.random((m_clients, batch))
    grads = np.empty((m_clients, problem.dim))
    for m in range(m_clients):
        n = sizes[m]
        x, y = problem.features[m], problem.targets[m]
        if batch >= n:
            grads[m] = batch_gradient(problem, x, y, w)
        else:
            idx = np.minimum((u[m] * n).astype(np.int64), n - 1)
            grads[m] = batch_gradient(problem, x[idx], y[idx], w)
    return grads


def aggregate_gradient(
    counts: dict[int, int],
    grads: np.ndarray,
    p: np.ndarray,
    lambdas: np.ndarray,
    k: int,
) -> np.ndarray:
    """Importance-weighted mean of the selected clients' gradients.

    A client selected c times contributes c times; the 1/p weight makes the
    estimate unbiased for the full weighted gradient.
    """
    total = np.zeros(grads.shape[1])
    for m, c in counts.items():
        if p[m] <= 0:
            raise ZeroProbabilityError(f"selected client {m} has zero probability")
        total += c * lambdas[m] / p[m] * grads[m]
    return total / k


def run_experiment(
    problem: FederatedProblem, cfg: TrainConfig, sampler=None
) -> tuple[list[RoundRecord], RegretLedger]:
    """Train for T rounds and log regret against the per-round optimum.

    Each round the simulator computes all clients' importance weights (it is
    the environment), evaluates both the sampler's distribution and the
    optimal one on the true loss, then reveals only the selected clients'
    weights to the sampler.  Raises TrainingDivergedError with partial
    records attached if the training loss leaves the reals.
    """
    if cfg.K > problem.M:
        raise ValueError(f"K={cfg.K} exceeds M={problem.M}")
    w = np.zeros(problem.dim)
    if sampler is None:
        a_bar = None
        if cfg.sampler_kind in ("adaptive-osmd", "adaptive-doubling-osmd"):
            a_bar = pretrain_estimate(pretrain_weights(problem, cfg, w))
        sampler = make_sampler(cfg.sampler_kind, problem, cfg, a_bar)

    lambdas = problem.lambdas
    records: list[RoundRecord] = []
    ledger = RegretLedger()
    uniform = uniform_distribution(problem.M)

    for t in range(1, cfg.T + 1):
        grads = round_gradients(problem, w, cfg.batch, make_rng(cfg.seed, _DATA_TAG, t))
        a = lambdas**2 * np.einsum("md,md->m", grads, grads)
        any_mass = bool(np.any(a > 0))
        p_star = optimal_distribution(a) if any_mass else uniform

        if getattr(sampler, "needs_full_information", False):
            sampler.receive_full_information(a)
        p_hat = sampler.distribution()

        train_loss = global_loss(problem, w)
        if not np.isfinite(train_loss):
            raise TrainingDivergedError(
                f"training loss diverged at round {t}", records=records, ledger=ledger
            )
        sampler_loss = variance_loss(p_hat, a, cfg.K)
        oracle_loss = variance_loss(p_star, a, cfg.K)

        sel_rng = make_rng(cfg.seed, _SELECT_TAG, t)
        if cfg.replacement == "with":
            counts = sample_with_replacement(p_hat, cfg.K, sel_rng)
            step = aggregate_gradient(counts, grads, p_hat, lambdas, cfg.K)
        else:
            sel = sample_without_replacement(p_hat, cfg.K, sel_rng)
            step = combine_gradients(
                sel, {m: (float(lambdas[m]), grads[m]) for m in sel.order}
            )
            counts = {m: 1 for m in sel.order}

        fb = BanditFeedback(
            K=cfg.K,
            multiplicities=counts,
            observed={m: float(a[m]) for m in counts},
        )
        sampler.update(fb)

        w = w - cfg.mu_sgd * step
        records.append(
            RoundRecord(
                t=t,
                train_loss=float(train_loss),
                sampler_loss=float(sampler_loss),
                oracle_loss=float(oracle_loss),
                p_star=p_star,
                chosen=tuple(sorted(counts.items())),
            )
        )
        ledger.append(sampler_loss, oracle_loss, p_star)

    return records, ledger
