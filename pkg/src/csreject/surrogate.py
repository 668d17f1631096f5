"""Cost-sensitive one-vs-rest surrogate loss and the ensemble decision rule."""

from __future__ import annotations

import numpy as np

from .core import REASON_AMBIGUITY, REASON_DISTANCE, Dataset, Decision, RejectionCost
from .losses import MarginLossSpec


def cs_surrogate_loss(loss: MarginLossSpec, cost: RejectionCost, g: np.ndarray, y: int) -> float:
    """c * phi(g_y) + (1 - c) * sum_{y' != y} phi(-g_{y'})."""
    g = np.asarray(g, dtype=float)
    c = cost.c
    k = y - 1
    rest = np.delete(g, k)
    return float(c * loss.value(g[k]) + (1.0 - c) * loss.value(-rest).sum())


def cs_surrogate_grad(loss: MarginLossSpec, cost: RejectionCost, g: np.ndarray, y: int) -> np.ndarray:
    """Gradient of cs_surrogate_loss with respect to the score vector."""
    g = np.asarray(g, dtype=float)
    c = cost.c
    k = y - 1
    grad = -(1.0 - c) * loss.grad(-g)
    grad[k] = c * loss.grad(g[k])
    return grad


def cs_loss_batch(loss: MarginLossSpec, cost: RejectionCost, G: np.ndarray, y: np.ndarray):
    """Vectorized per-sample losses and score gradients for a batch.

    G is (n, K); y holds labels in 1..K. Returns (losses (n,), dG (n, K)).
    """
    G = np.asarray(G, dtype=float)
    y = np.asarray(y, dtype=int)
    c = cost.c
    rows = np.arange(len(G))
    k = y - 1
    gy = G[rows, k]
    neg = loss.value(-G)
    losses = c * loss.value(gy) + (1.0 - c) * (neg.sum(axis=1) - neg[rows, k])
    dG = -(1.0 - c) * loss.grad(-G)
    dG[rows, k] = c * loss.grad(gy)
    return losses, dG


def empirical_risk(loss: MarginLossSpec, cost: RejectionCost, score_fn, data: Dataset) -> float:
    """Mean cost-sensitive surrogate loss over a dataset."""
    if data.n == 0:
        raise ValueError("empirical risk of an empty dataset is undefined")
    G = np.asarray(score_fn(data.X), dtype=float)
    losses, _ = cs_loss_batch(loss, cost, G, data.y)
    return float(losses.mean())


def decide(g: np.ndarray) -> Decision:
    """Ensemble decision rule over K one-vs-rest scores.

    Reject (distance) when no score is positive; reject (ambiguity) when two
    or more conflict; otherwise predict the unique positive class.
    """
    g = np.asarray(g, dtype=float)
    n_pos = int((g > 0).sum())
    if n_pos == 0:
        return Decision.reject(REASON_DISTANCE)
    if n_pos >= 2:
        return Decision.reject(REASON_AMBIGUITY)
    return Decision.predict(int(np.argmax(g)) + 1)


def decide_batch(G: np.ndarray) -> list[Decision]:
    return [decide(g) for g in np.asarray(G, dtype=float)]


def pointwise_conditional_risk(loss: MarginLossSpec, cost: RejectionCost, g: np.ndarray, eta: np.ndarray) -> float:
    """Posterior-weighted expected surrogate loss at one input."""
    eta = np.asarray(eta, dtype=float)
    if abs(eta.sum() - 1.0) > 1e-9 or (eta < 0).any():
        raise ValueError("eta must be a probability simplex")
    g = np.asarray(g, dtype=float)
    return float(sum(eta[y - 1] * cs_surrogate_loss(loss, cost, g, y) for y in range(1, len(eta) + 1)))


def pointwise_conditional_risk_per_class(
    loss: MarginLossSpec, cost: RejectionCost, g: np.ndarray, eta: np.ndarray
) -> np.ndarray:
    """Per-class decomposition: eta_y*c*phi(g_y) + (1-eta_y)*(1-c)*phi(-g_y).

    Summing the entries reproduces pointwise_conditional_risk.
    """
    eta = np.asarray(eta, dtype=float)
    g = np.asarray(g, dtype=float)
    c = cost.c
    return eta * c * loss.value(g) + (1.0 - eta) * (1.0 - c) * loss.value(-g)
