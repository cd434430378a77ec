"""Adaptive client sampling for federated and stochastic optimization.

Builds sampling distributions online from bandit feedback with mirror
descent on a floored probability simplex, optionally wrapped in an
exponential-weights ensemble over learning rates and a doubling-trick
restart schedule, and ships a federated-SGD simulator that measures dynamic
regret against the per-round optimal distribution.
"""

from .ensemble import (
    AdaptiveOsmdSampler,
    DoublingOsmdSampler,
    expert_count,
    expert_grid,
    meta_init,
    meta_rate,
    pretrain_estimate,
)
from .feedback import (
    BanditFeedback,
    estimated_gradient,
    estimated_loss,
    sample_with_replacement,
    variance_loss,
)
from .osmd import OsmdSampler, RateSchedule, eta_star, multiplicative_update
from .problems import (
    FederatedProblem,
    SyntheticConfig,
    generate_synthetic,
    global_loss,
    ingest_csv,
    local_update,
    write_problem_csv,
)
from .simplex import (
    FloorConstraint,
    floor_kl_projection,
    kl_divergence,
    make_distribution,
    optimal_distribution,
    projection_gap,
    total_variation,
    uniform_distribution,
)
from .simulator import (
    OracleOptimalSampler,
    RegretLedger,
    RoundRecord,
    TrainConfig,
    UniformSampler,
    aggregate_gradient,
    make_sampler,
    round_gradients,
    run_experiment,
)
from .wor import (
    OrderedSelection,
    combine_gradients,
    renormalized_distribution,
    sample_without_replacement,
)

__all__ = [
    "AdaptiveOsmdSampler",
    "BanditFeedback",
    "DoublingOsmdSampler",
    "FederatedProblem",
    "FloorConstraint",
    "OracleOptimalSampler",
    "OrderedSelection",
    "OsmdSampler",
    "RateSchedule",
    "RegretLedger",
    "RoundRecord",
    "SyntheticConfig",
    "TrainConfig",
    "UniformSampler",
    "aggregate_gradient",
    "combine_gradients",
    "estimated_gradient",
    "estimated_loss",
    "eta_star",
    "expert_count",
    "expert_grid",
    "floor_kl_projection",
    "generate_synthetic",
    "global_loss",
    "ingest_csv",
    "kl_divergence",
    "local_update",
    "make_distribution",
    "make_sampler",
    "meta_init",
    "meta_rate",
    "multiplicative_update",
    "optimal_distribution",
    "pretrain_estimate",
    "projection_gap",
    "renormalized_distribution",
    "round_gradients",
    "run_experiment",
    "sample_with_replacement",
    "sample_without_replacement",
    "total_variation",
    "uniform_distribution",
    "variance_loss",
    "write_problem_csv",
]
