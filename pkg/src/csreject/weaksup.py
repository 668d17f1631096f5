"""Weak-supervision protocols: uniform label noise and PU learning.

Binary problems use the K=2 convention: class 1 is the positive class (+1),
class 2 the negative class (-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, RejectionCost
from .losses import MarginLossSpec
from .models import AdamState, TrainConfig, adam_step
from .surrogate import cs_loss_batch


def inject_uniform_noise(data: Dataset, rate: float, rng: np.random.Generator) -> Dataset:
    """Flip exactly floor(rate * n) uniformly chosen labels to other classes."""
    if not (0.0 <= rate < 1.0):
        raise ValueError("noise rate must lie in [0, 1)")
    n_flip = int(rate * data.n)
    if n_flip == 0:
        return data
    y = data.y.copy()
    idx = rng.choice(data.n, size=n_flip, replace=False)
    # uniform draw over the K-1 other classes
    shift = rng.integers(1, data.K, size=n_flip)
    y[idx] = (y[idx] - 1 + shift) % data.K + 1
    return Dataset(data.X, y, data.K)


@dataclass(frozen=True)
class PUConfig:
    prior: float = 0.7
    n_unlabeled: int = 0
    n_positive: int = 0

    def __post_init__(self):
        if not (0.0 < self.prior <= 1.0):
            raise ValueError("class prior must lie in (0, 1]")
        if self.n_unlabeled < 1 or self.n_positive < 1:
            raise ValueError("set sizes must be positive")

    @classmethod
    def from_train_size(cls, n_train: int, prior: float = 0.7) -> "PUConfig":
        # unlabeled size ~ training size, truncated to a multiple of 200;
        # positive size is a fifth of that
        n_u = (n_train // 200) * 200
        if n_u == 0:
            raise ValueError("training pool too small for the PU protocol")
        return cls(prior=prior, n_unlabeled=n_u, n_positive=n_u // 5)


def make_pu_dataset(data: Dataset, config: PUConfig, rng: np.random.Generator):
    """Draw (positives, unlabeled) feature sets from a K=2 dataset.

    Positives come from class 1 without replacement; the unlabeled pool mixes
    floor(prior * n_u) leftover positives with negatives, shuffled. Every
    source sample is used at most once.
    """
    if data.K != 2:
        raise ValueError("PU construction requires a binary dataset")
    pos_idx = np.flatnonzero(data.y == 1)
    neg_idx = np.flatnonzero(data.y == 2)
    n_u_pos = int(config.prior * config.n_unlabeled)
    n_u_neg = config.n_unlabeled - n_u_pos
    if len(pos_idx) < config.n_positive + n_u_pos or len(neg_idx) < n_u_neg:
        raise ValueError(
            f"insufficient source data: need {config.n_positive + n_u_pos} positives "
            f"and {n_u_neg} negatives, have {len(pos_idx)} and {len(neg_idx)}"
        )
    pos_perm = rng.permutation(pos_idx)
    neg_perm = rng.permutation(neg_idx)
    positives = data.X[pos_perm[: config.n_positive]]
    unlabeled = np.concatenate(
        [data.X[pos_perm[config.n_positive : config.n_positive + n_u_pos]], data.X[neg_perm[:n_u_neg]]]
    )
    unlabeled = unlabeled[rng.permutation(len(unlabeled))]
    return positives, unlabeled


def pu_risk_unbiased(loss_term, prior: float, positives, unlabeled, score_fn) -> float:
    """Unbiased PU risk: pi*mean_p L(+1) - pi*mean_p L(-1) + mean_u L(-1)."""
    if len(positives) == 0 or len(unlabeled) == 0:
        raise ValueError("both sample sets must be non-empty")
    Gp = score_fn(positives)
    Gu = score_fn(unlabeled)
    return float(
        prior * loss_term(Gp, +1).mean() - prior * loss_term(Gp, -1).mean() + loss_term(Gu, -1).mean()
    )


def pu_risk_nn(loss_term, prior: float, positives, unlabeled, score_fn) -> float:
    """Non-negative PU risk: positive term + clamped implied-negative term."""
    if len(positives) == 0 or len(unlabeled) == 0:
        raise ValueError("both sample sets must be non-empty")
    Gp = score_fn(positives)
    Gu = score_fn(unlabeled)
    pos_term = prior * loss_term(Gp, +1).mean()
    neg_term = loss_term(Gu, -1).mean() - prior * loss_term(Gp, -1).mean()
    return float(pos_term + max(0.0, neg_term))


def cs_pu_loss_term(loss: MarginLossSpec, cost: RejectionCost):
    """Per-label cost-sensitive surrogate pieces for K=2 scores.

    loss_term(G, sign) returns per-sample L_CS(g; sign) for sign in {+1, -1};
    loss_term.grad(G, sign) returns the score gradients.
    """

    def label_of(sign: int) -> np.ndarray:
        return np.int64(1 if sign == +1 else 2)

    def term(G, sign):
        G = np.atleast_2d(np.asarray(G, dtype=float))
        y = np.full(len(G), label_of(sign))
        losses, _ = cs_loss_batch(loss, cost, G, y)
        return losses

    def grad(G, sign):
        G = np.atleast_2d(np.asarray(G, dtype=float))
        y = np.full(len(G), label_of(sign))
        _, dG = cs_loss_batch(loss, cost, G, y)
        return dG

    term.grad = grad
    return term


def train_pu(
    model,
    loss_term,
    positives: np.ndarray,
    unlabeled: np.ndarray,
    prior: float,
    config: TrainConfig,
):
    """Mini-batch minimization of the non-negative PU risk.

    Each batch draws positives and unlabeled proportionally so both empirical
    means stay defined. When the implied-negative bracket of a batch goes
    negative, its gradient is zeroed for that step (the clamp is active).
    Returns (risk trace per epoch, clamp activation count).
    """
    rng = np.random.default_rng(config.seed)
    state = AdamState()
    n_p, n_u = len(positives), len(unlabeled)
    if n_p == 0 or n_u == 0:
        raise ValueError("both sample sets must be non-empty")
    b_p = max(1, int(np.ceil(config.batch_size * n_p / (n_p + n_u))))
    b_u = max(1, config.batch_size - b_p)
    steps = max(1, int(np.ceil(n_u / b_u)))
    trace = []
    clamp_count = 0
    for _ in range(config.epochs):
        p_order = rng.permutation(n_p)
        u_order = rng.permutation(n_u)
        epoch_risk = 0.0
        for step in range(steps):
            ip = p_order[(step * b_p) % n_p : (step * b_p) % n_p + b_p]
            if len(ip) < b_p:
                ip = np.concatenate([ip, p_order[: b_p - len(ip)]])
            iu = u_order[step * b_u : (step + 1) * b_u]
            if len(iu) == 0:
                continue
            Xp, Xu = positives[ip], unlabeled[iu]
            Gp, cache_p = model.forward(Xp)
            Gu, cache_u = model.forward(Xu)
            pos_term = prior * loss_term(Gp, +1).mean()
            neg_term = float(loss_term(Gu, -1).mean()) - prior * float(loss_term(Gp, -1).mean())
            epoch_risk += pos_term + max(0.0, neg_term)

            dGp = prior * loss_term.grad(Gp, +1) / len(ip)
            if neg_term >= 0.0:
                dGp = dGp - prior * loss_term.grad(Gp, -1) / len(ip)
                dGu = loss_term.grad(Gu, -1) / len(iu)
            else:
                clamp_count += 1
                dGu = np.zeros_like(Gu)
            grads_p = model.backward(cache_p, dGp)
            grads_u = model.backward(cache_u, dGu)
            grads = {k: grads_p[k] + grads_u[k] for k in grads_p}
            adam_step(state, model.params, grads, config.learning_rate)
        trace.append(epoch_risk / steps)
    return trace, clamp_count
