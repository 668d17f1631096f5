"""Comparison methods: confidence-based softmax (SCE), the augmented
rejection-class loss (DEFER), and the angle-based bent-hinge method (ANGLE)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax, softmax as _softmax

from .core import REASON_DISTANCE, Dataset, Decision, RejectionCost, compute_metrics


def softmax(g: np.ndarray, T: float = 1.0) -> np.ndarray:
    """Temperature-scaled softmax, stabilized by max subtraction."""
    if T <= 0:
        raise ValueError("temperature must be positive")
    g = np.asarray(g, dtype=float)
    return _softmax(g / T, axis=-1)


def default_candidates() -> list[float]:
    """Tuning grid for the temperature / rejection threshold.

    Twenty log-spaced points ending at 1 plus the integers 2..10. A log
    scale cannot reach 0, so the low end is pinned at 1e-3.
    """
    return list(np.geomspace(1e-3, 1.0, 20)) + [float(k) for k in range(2, 11)]


# ---------------------------------------------------------------------------
# SCE: softmax cross-entropy with temperature-scaled Chow plug-in


def sce_loss_grad(g: np.ndarray, y: int):
    g = np.asarray(g, dtype=float)
    logp = log_softmax(g)
    grad = np.exp(logp)
    grad[y - 1] -= 1.0
    return float(-logp[y - 1]), grad


def sce_loss_batch(G: np.ndarray, y: np.ndarray):
    G = np.asarray(G, dtype=float)
    y = np.asarray(y, dtype=int)
    logp = log_softmax(G, axis=1)
    rows = np.arange(len(G))
    losses = -logp[rows, y - 1]
    dG = np.exp(logp)
    dG[rows, y - 1] -= 1.0
    return losses, dG


def sce_decide(g: np.ndarray, T: float, cost: RejectionCost) -> Decision:
    """Plug-in Chow rule on the temperature-scaled softmax confidence."""
    p = softmax(g, T)
    if p.max() <= 1.0 - cost.c:
        return Decision.reject(REASON_DISTANCE)
    return Decision.predict(int(np.argmax(p)) + 1)


def tune_temperature(model, val: Dataset, cost: RejectionCost, candidates=None) -> float:
    """Pick the candidate minimizing validation 0-1-c risk; ties go low."""
    if candidates is None:
        candidates = default_candidates()
    candidates = list(candidates)
    if not candidates:
        raise ValueError("empty candidate list")
    if val.n == 0:
        raise ValueError("empty validation set")
    G = model.scores(val.X)
    best_T, best_risk = None, np.inf
    for T in sorted(candidates):
        decisions = [sce_decide(g, T, cost) for g in G]
        risk = compute_metrics(decisions, val.y, cost).risk01c
        if risk < best_risk - 1e-15:
            best_T, best_risk = T, risk
    return float(best_T)


# ---------------------------------------------------------------------------
# DEFER: augmented rejection class K+1 on a cross-entropy objective


def defer_loss_grad(g: np.ndarray, y: int, cost: RejectionCost, raw_printed_form: bool = False):
    """-log p_y - (1-c) log p_{K+1} over a (K+1)-way softmax.

    The sign-negated form is the sensible minimization objective; the raw
    printed form (unnegated) is available behind the debug flag only.
    """
    g = np.asarray(g, dtype=float)
    logp = log_softmax(g)
    p = np.exp(logp)
    K1 = len(g)
    loss = -logp[y - 1] - (1.0 - cost.c) * logp[K1 - 1]
    total = 2.0 - cost.c  # combined one-hot mass of the two CE terms
    grad = total * p
    grad[y - 1] -= 1.0
    grad[K1 - 1] -= 1.0 - cost.c
    if raw_printed_form:
        return -loss, -grad
    return float(loss), grad


def defer_loss_batch(cost: RejectionCost):
    def batch(G: np.ndarray, y: np.ndarray):
        G = np.asarray(G, dtype=float)
        y = np.asarray(y, dtype=int)
        logp = log_softmax(G, axis=1)
        rows = np.arange(len(G))
        losses = -logp[rows, y - 1] - (1.0 - cost.c) * logp[:, -1]
        dG = (2.0 - cost.c) * np.exp(logp)
        dG[rows, y - 1] -= 1.0
        dG[:, -1] -= 1.0 - cost.c
        return losses, dG

    return batch


def defer_decide(g: np.ndarray) -> Decision:
    """Reject only on a strict argmax at the augmented index K+1."""
    g = np.asarray(g, dtype=float)
    # argmax prefers the earliest index, so a tie between a class and the
    # rejection slot already resolves to the class
    k = int(np.argmax(g))
    if k == len(g) - 1:
        return Decision.reject(REASON_DISTANCE)
    return Decision.predict(k + 1)


# ---------------------------------------------------------------------------
# ANGLE: simplex-vertex encoding with a bent hinge loss


def angle_vertices(K: int) -> np.ndarray:
    """K unit vertices of a regular simplex in R^{K-1}.

    Unit norms, pairwise inner products -1/(K-1), zero sum.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    V = np.zeros((K, K - 1))
    V[0] = (K - 1) ** -0.5
    base = -(1.0 + np.sqrt(K)) / (K - 1) ** 1.5
    scale = np.sqrt(K / (K - 1))
    for j in range(2, K + 1):
        V[j - 1] = base
        V[j - 1, j - 2] += scale
    return V


def bend_slopes(K: int, cost: RejectionCost) -> tuple[float, float]:
    """The two suggested bending slopes a1 = (K-1-c)/(Kc-c), a2 = (K-1)(1-c)/c."""
    c = cost.c
    a1 = (K - 1 - c) / (K * c - c)
    a2 = (K - 1) * (1.0 - c) / c
    return a1, a2


def bent_hinge(u, a: float):
    """Value of the bent hinge: 1-au for u<0, 1-u for 0<=u<=1, else 0."""
    if a <= 0:
        raise ValueError("bend slope must be positive")
    u = np.asarray(u, dtype=float)
    return np.where(u < 0, 1.0 - a * u, np.maximum(0.0, 1.0 - u))


def bent_hinge_grad(u, a: float):
    # right-hand pieces at the kinks u = 0 and u = 1
    u = np.asarray(u, dtype=float)
    return np.where(u < 0, -a, np.where(u < 1.0, -1.0, 0.0))


@dataclass(frozen=True)
class AngleConfig:
    K: int
    bend_slope: float
    delta: float = 0.0

    def __post_init__(self):
        if self.bend_slope <= 0 or self.delta < 0:
            raise ValueError("invalid angle configuration")

    @property
    def vertices(self) -> np.ndarray:
        return angle_vertices(self.K)


def angle_loss_grad(g: np.ndarray, y: int, config: AngleConfig):
    """Sum over wrong classes y' of bent_hinge(-v_{y'} . g), with its gradient."""
    g = np.asarray(g, dtype=float)
    V = config.vertices
    u = -V @ g  # (K,)
    mask = np.ones(config.K, dtype=bool)
    mask[y - 1] = False
    loss = float(bent_hinge(u[mask], config.bend_slope).sum())
    du = bent_hinge_grad(u, config.bend_slope)
    grad = -(du[mask, None] * V[mask]).sum(axis=0)
    return loss, grad


def angle_loss_batch(config: AngleConfig):
    V = config.vertices
    a = config.bend_slope

    def batch(G: np.ndarray, y: np.ndarray):
        G = np.asarray(G, dtype=float)
        y = np.asarray(y, dtype=int)
        U = -G @ V.T  # (n, K)
        vals = bent_hinge(U, a)
        rows = np.arange(len(G))
        losses = vals.sum(axis=1) - vals[rows, y - 1]
        dU = bent_hinge_grad(U, a)
        dU[rows, y - 1] = 0.0
        dG = -dU @ V
        return losses, dG

    return batch


def soft_threshold(v, delta: float):
    """sign(v) * max(|v| - delta, 0)."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - delta, 0.0)


def angle_decide(g: np.ndarray, config: AngleConfig) -> Decision:
    """Reject when every soft-thresholded vertex projection is zero."""
    proj = config.vertices @ np.asarray(g, dtype=float)
    if (soft_threshold(proj, config.delta) == 0).all():
        return Decision.reject(REASON_DISTANCE)
    return Decision.predict(int(np.argmax(proj)) + 1)


def tune_delta(model, val: Dataset, cost: RejectionCost, config: AngleConfig, candidates=None) -> float:
    """Pick the threshold minimizing validation 0-1-c risk; ties go low."""
    if candidates is None:
        candidates = default_candidates()
    candidates = list(candidates)
    if not candidates:
        raise ValueError("empty candidate list")
    if val.n == 0:
        raise ValueError("empty validation set")
    G = model.scores(val.X)
    best_d, best_risk = None, np.inf
    for delta in sorted(candidates):
        cfg = AngleConfig(config.K, config.bend_slope, delta)
        decisions = [angle_decide(g, cfg) for g in G]
        risk = compute_metrics(decisions, val.y, cost).risk01c
        if risk < best_risk - 1e-15:
            best_d, best_risk = delta, risk
    return float(best_d)
