"""Sampling without replacement and its unbiased gradient combiner.

Clients are drawn one at a time; after each draw the base distribution is
renormalized over the clients not yet chosen.  The gradient combiner
importance-weights the k-th pick by the probability it had at its own draw
step and telescopes in the exactly-known contributions of earlier picks,
which makes the average over the K constructed terms unbiased for the full
weighted gradient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ExhaustedMassError, MissingLocalError, SelectionSizeError
from .rng import categorical

# Chosen-mass threshold below which renormalization is refused.  Unreachable
# when the base distribution respects a positive floor and K <= M.
MASS_EPS = 1e-12


@dataclass(frozen=True)
class OrderedSelection:
    """K distinct clients in draw order, plus the distribution used at each draw.

    The per-step distributions are retained at full precision so the gradient
    combiner weights with exactly the probabilities that generated the draws.
    """

    order: tuple[int, ...]
    step_probs: np.ndarray  # shape (K, M)

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise ValueError("selection contains repeated clients")
        if self.step_probs.shape[0] != len(self.order):
            raise ValueError("one step distribution required per draw")


def renormalized_distribution(p: np.ndarray, chosen) -> np.ndarray:
    """Zero out already-chosen clients and rescale the rest of ``p`` to sum 1."""
    p = np.asarray(p, dtype=np.float64)
    chosen = list(chosen)
    remaining = 1.0 - float(p[chosen].sum()) if chosen else 1.0
    if remaining <= MASS_EPS:
        raise ExhaustedMassError("chosen clients hold all probability mass")
    out = p / remaining
    out[chosen] = 0.0
    return out


def sample_without_replacement(
    p: np.ndarray, k: int, rng: np.random.Generator
) -> OrderedSelection:
    """Draw K distinct clients sequentially, renormalizing after each draw."""
    p = np.asarray(p, dtype=np.float64)
    m = p.shape[0]
    if k > m:
        raise SelectionSizeError(f"cannot draw {k} distinct clients from {m}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    order: list[int] = []
    steps = np.empty((k, m))
    for i in range(k):
        dist = renormalized_distribution(p, order) if order else p.copy()
        steps[i] = dist
        order.append(int(categorical(rng, dist, 1)[0]))
    return OrderedSelection(order=tuple(order), step_probs=steps)


def combine_gradients(
    sel: OrderedSelection,
    local_updates: Mapping[int, tuple[float, np.ndarray]],
) -> np.ndarray:
    """Unbiased combined gradient from the ordered selection's local updates.

    ``local_updates`` maps each selected client to its (weight, gradient)
    pair.  The k-th term divides that client's weighted gradient by its
    draw-step probability and adds the earlier clients' weighted gradients at
    face value; the result is the mean of the K terms.
    """
    for m in sel.order:
        if m not in local_updates:
            raise MissingLocalError(f"no local update for selected client {m}")
    first = np.asarray(local_updates[sel.order[0]][1], dtype=np.float64)
    total = np.zeros_like(first)
    prefix = np.zeros_like(first)  # sum of lambda_m g_m over earlier picks
    for i, m in enumerate(sel.order):
        lam, grad = local_updates[m]
        grad = np.asarray(grad, dtype=np.float64)
        total += lam * grad / sel.step_probs[i, m] + prefix
        prefix = prefix + lam * grad
    return total / len(sel.order)
