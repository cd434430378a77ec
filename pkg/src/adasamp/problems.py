"""Federated problems: synthetic generation, CSV ingestion, losses, gradients.

A problem is M client datasets with weights proportional to sample counts and
one of two loss families: squared error for real-valued targets, multinomial
logistic (softmax cross-entropy) for class labels.  The synthetic generator
builds heterogeneous linear-regression clients whose feature scales are
log-normal draws rescaled to a fixed maximum, so one knob controls how
unequal the clients are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import EmptyClientError, MalformedCsvError
from .rng import make_rng, minibatch_indices, standard_normals

SQUARED = "squared"
LOGISTIC = "multinomial-logistic"
LOSS_FAMILIES = (SQUARED, LOGISTIC)

# Observation-noise and coefficient scales for the synthetic generator.  The
# nominal values 0.1 and 3 are interpreted as variances, hence the square
# roots; noise_sd is configurable, the coefficient law is fixed.
DEFAULT_NOISE_SD = math.sqrt(0.1)
COEF_MEAN = 10.0
COEF_SD = math.sqrt(3.0)
MAX_FEATURE_SCALE = 10.0


@dataclass(frozen=True)
class SyntheticConfig:
    """Generator knobs for heterogeneous linear-regression clients.

    ``kappa`` is the condition number of the shared feature covariance
    (difficulty of each local problem); ``sigma`` is the log-scale spread of
    the per-client feature magnitudes (heterogeneity across clients).
    ``noise_sd`` is the observation-noise standard deviation.
    """

    M: int = 100
    n_m: int = 100
    d: int = 10
    kappa: float = 25.0
    sigma: float = 10.0
    noise_sd: float = DEFAULT_NOISE_SD
    seed: int = 0

    def __post_init__(self):
        if self.M < 1 or self.n_m < 1 or self.d < 1:
            raise ValueError("M, n_m, d must all be >= 1")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.noise_sd < 0:
            raise ValueError(f"noise_sd must be nonnegative, got {self.noise_sd}")


@dataclass
class FederatedProblem:
    """M client datasets plus weights and a loss family.

    ``features[m]`` is (n_m, d); ``targets[m]`` is (n_m,) reals for squared
    loss or integer class labels for the logistic loss.  Weights are the
    sample-count proportions and must sum to one.
    """

    features: list[np.ndarray]
    targets: list[np.ndarray]
    lambdas: np.ndarray
    loss_family: str = SQUARED
    w_star: np.ndarray | None = None
    n_classes: int | None = None

    def __post_init__(self):
        if self.loss_family not in LOSS_FAMILIES:
            raise ValueError(f"unknown loss family: {self.loss_family}")
        if len(self.features) != len(self.targets) or len(self.features) < 1:
            raise ValueError("features and targets must list the same M >= 1 clients")
        d = self.features[0].shape[1]
        for x, y in zip(self.features, self.targets):
            if x.ndim != 2 or x.shape[1] != d or y.shape != (x.shape[0],):
                raise ValueError("client datasets have inconsistent shapes")
        self.lambdas = np.asarray(self.lambdas, dtype=np.float64)
        if abs(float(self.lambdas.sum()) - 1.0) > 1e-9:
            raise ValueError("client weights must sum to 1")
        if self.loss_family == LOGISTIC and self.n_classes is None:
            labels = np.concatenate(self.targets)
            self.n_classes = int(labels.max()) + 1

    @property
    def M(self) -> int:
        return len(self.features)

    @property
    def num_features(self) -> int:
        return self.features[0].shape[1]

    @property
    def dim(self) -> int:
        """Model dimension: d for squared loss, C*d for the logistic loss."""
        if self.loss_family == SQUARED:
            return self.num_features
        return self.n_classes * self.num_features

    @property
    def client_sizes(self) -> np.ndarray:
        return np.array([x.shape[0] for x in self.features])

    @cached_property
    def stacked(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(M, n, d) features and (M, n) targets when all clients have equal n."""
        sizes = self.client_sizes
        if not np.all(sizes == sizes[0]):
            return None
        return np.stack(self.features), np.stack(self.targets)


def generate_synthetic(cfg: SyntheticConfig) -> FederatedProblem:
    """Generate heterogeneous linear-regression clients.

    Coefficients are drawn once; client m's features are centered Gaussians
    with diagonal covariance ``s_m * diag(kappa^((j-1)/(d-1) - 1))`` whose
    first entry is 1/kappa and last is 1, and the per-client scales s_m are
    exp-normal draws rescaled so the largest is exactly MAX_FEATURE_SCALE.
    Targets are the linear responses plus observation noise.
    """
    rng = make_rng(cfg.seed)
    d = cfg.d
    w_star = COEF_MEAN + COEF_SD * standard_normals(rng, d)
    if d == 1:
        cov_diag = np.ones(1)
    else:
        exponents = (np.arange(d) / (d - 1)) - 1.0
        cov_diag = cfg.kappa**exponents
    scales = np.exp(cfg.sigma * standard_normals(rng, cfg.M))
    scales = scales / scales.max() * MAX_FEATURE_SCALE
    feature_sd = np.sqrt(cov_diag)

    features = []
    targets = []
    for m in range(cfg.M):
        x = standard_normals(rng, (cfg.n_m, d)) * (math.sqrt(scales[m]) * feature_sd)
        noise = cfg.noise_sd * standard_normals(rng, cfg.n_m)
        features.append(x)
        targets.append(x @ w_star + noise)
    lambdas = np.full(cfg.M, 1.0 / cfg.M)
    return FederatedProblem(
        features=features,
        targets=targets,
        lambdas=lambdas,
        loss_family=SQUARED,
        w_star=w_star,
    )


def _read_rows(path):
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise MalformedCsvError(
                    f"{path}:{lineno}: expected {width} columns, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise MalformedCsvError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise MalformedCsvError(f"{path}: no data rows")
    return rows


def ingest_csv(features_path, labels_path, partition_path) -> FederatedProblem:
    """Load a problem from three headerless CSV files.

    The features file holds one row of d comma-separated reals per sample;
    the labels file one value per sample (integer literals mean class labels,
    anything else means regression targets); the partition file one client id
    in 0..M-1 per sample.  Every client id must receive at least one row.
    """
    x = np.asarray(_read_rows(features_path), dtype=np.float64)

    with open(labels_path, "r", encoding="utf-8") as fh:
        raw_labels = [line.strip() for line in fh if line.strip()]
    if len(raw_labels) != x.shape[0]:
        raise MalformedCsvError(
            f"{labels_path}: {len(raw_labels)} labels for {x.shape[0]} feature rows"
        )
    integral = all(_is_int_literal(s) for s in raw_labels)
    try:
        y = np.array(
            [int(s) for s in raw_labels] if integral else [float(s) for s in raw_labels],
            dtype=np.int64 if integral else np.float64,
        )
    except ValueError as exc:
        raise MalformedCsvError(f"{labels_path}: {exc}") from None
    if integral and y.min() < 0:
        raise MalformedCsvError(f"{labels_path}: class labels must be nonnegative")

    with open(partition_path, "r", encoding="utf-8") as fh:
        raw_part = [line.strip() for line in fh if line.strip()]
    if len(raw_part) != x.shape[0]:
        raise MalformedCsvError(
            f"{partition_path}: {len(raw_part)} rows for {x.shape[0]} samples"
        )
    if not all(_is_int_literal(s) for s in raw_part):
        raise MalformedCsvError(f"{partition_path}: client ids must be integers")
    part = np.array([int(s) for s in raw_part])
    if part.min() < 0:
        raise MalformedCsvError(f"{partition_path}: client ids must be >= 0")

    m_clients = int(part.max()) + 1
    features, targets = [], []
    for m in range(m_clients):
        mask = part == m
        if not mask.any():
            raise EmptyClientError(f"client {m} has no rows")
        features.append(x[mask])
        targets.append(y[mask])
    sizes = np.array([f.shape[0] for f in features], dtype=np.float64)
    return FederatedProblem(
        features=features,
        targets=targets,
        lambdas=sizes / sizes.sum(),
        loss_family=LOGISTIC if integral else SQUARED,
    )


def _is_int_literal(s: str) -> bool:
    t = s[1:] if s[:1] in "+-" else s
    return t.isdigit()


def write_problem_csv(problem: FederatedProblem, features_path, labels_path, partition_path):
    """Write a problem back to the three-file CSV layout (full float precision)."""
    with open(features_path, "w", encoding="utf-8", newline="") as ff, open(
        labels_path, "w", encoding="utf-8", newline=""
    ) as lf, open(partition_path, "w", encoding="utf-8", newline="") as pf:
        for m in range(problem.M):
            for row, label in zip(problem.features[m], problem.targets[m]):
                ff.write(",".join(repr(float(v)) for v in row) + "\n")
                if problem.loss_family == LOGISTIC:
                    lf.write(f"{int(label)}\n")
                else:
                    lf.write(repr(float(label)) + "\n")
                pf.write(f"{m}\n")


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _batch_loss(problem, x, y, w) -> float:
    if problem.loss_family == SQUARED:
        r = y - x @ w
        return float(0.5 * np.mean(r * r))
    wmat = w.reshape(problem.n_classes, problem.num_features)
    logits = x @ wmat.T
    logits = logits - logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(logits).sum(axis=1))
    return float(np.mean(logz - logits[np.arange(x.shape[0]), y]))


def batch_gradient(problem, x, y, w) -> np.ndarray:
    """Mean loss gradient over the given sample batch at w."""
    n = x.shape[0]
    if problem.loss_family == SQUARED:
        r = y - x @ w
        return -(x.T @ r) / n
    wmat = w.reshape(problem.n_classes, problem.num_features)
    probs = _softmax(x @ wmat.T)
    probs[np.arange(n), y] -= 1.0
    return (probs.T @ x / n).ravel()


def client_loss(problem: FederatedProblem, m: int, w: np.ndarray) -> float:
    """Average per-sample loss of client m's full dataset at w."""
    return _batch_loss(problem, problem.features[m], problem.targets[m], w)


def global_loss(problem: FederatedProblem, w: np.ndarray) -> float:
    """Weighted training objective over all clients."""
    stacked = problem.stacked
    if stacked is not None and problem.loss_family == SQUARED:
        x, y = stacked
        r = y - x @ w
        per_client = 0.5 * np.mean(r * r, axis=1)
        return float(per_client @ problem.lambdas)
    return float(
        sum(
            lam * client_loss(problem, m, w)
            for m, lam in enumerate(problem.lambdas)
        )
    )


def local_update(
    problem: FederatedProblem,
    m: int,
    w: np.ndarray,
    batch_size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Client m's minibatch gradient at w.

    Batch indices are i.i.d. uniform draws from the client's data.  A batch
    size of at least n_m means the exact full-batch gradient: deterministic,
    consuming nothing from the generator.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    x, y = problem.features[m], problem.targets[m]
    n = x.shape[0]
    if batch_size >= n:
        return batch_gradient(problem, x, y, w)
    idx = minibatch_indices(rng, n, batch_size)
    return batch_gradient(problem, x[idx], y[idx], w)
