"""Trainable score functions, analytic backprop, Adam, and the training loop."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset

MODEL_MAGIC = "csreject-model-v1"


class LinearModel:
    """Scores Wx + b with W of shape (n_out, d)."""

    kind = "linear"

    def __init__(self, d: int, n_out: int, rng: np.random.Generator | None = None, init_scale: float = 0.01):
        self.d = d
        self.n_out = n_out
        if rng is None:
            self.params = {"W": np.zeros((n_out, d)), "b": np.zeros(n_out)}
        else:
            self.params = {"W": init_scale * rng.standard_normal((n_out, d)), "b": np.zeros(n_out)}

    def forward(self, X: np.ndarray):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X @ self.params["W"].T + self.params["b"], X

    def backward(self, cache, dG: np.ndarray):
        X = cache
        return {"W": dG.T @ X, "b": dG.sum(axis=0)}

    def scores(self, X: np.ndarray) -> np.ndarray:
        return self.forward(X)[0]


class MlpModel:
    """One hidden rectified layer of width 64 (by default), linear output."""

    kind = "mlp"

    def __init__(self, d: int, n_out: int, rng: np.random.Generator | None = None, hidden: int = 64):
        self.d = d
        self.n_out = n_out
        self.hidden = hidden
        if rng is None:
            w1 = np.zeros((hidden, d))
            w2 = np.zeros((n_out, hidden))
        else:
            # He-style scaling for the rectified layer
            w1 = rng.standard_normal((hidden, d)) * np.sqrt(2.0 / d)
            w2 = rng.standard_normal((n_out, hidden)) * np.sqrt(1.0 / hidden)
        self.params = {"W1": w1, "b1": np.zeros(hidden), "W2": w2, "b2": np.zeros(n_out)}

    def forward(self, X: np.ndarray):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        pre = X @ self.params["W1"].T + self.params["b1"]
        h = np.maximum(pre, 0.0)
        out = h @ self.params["W2"].T + self.params["b2"]
        return out, (X, pre, h)

    def backward(self, cache, dG: np.ndarray):
        X, pre, h = cache
        dh = dG @ self.params["W2"]
        dpre = dh * (pre > 0)  # subgradient 0 at exactly 0
        return {
            "W2": dG.T @ h,
            "b2": dG.sum(axis=0),
            "W1": dpre.T @ X,
            "b1": dpre.sum(axis=0),
        }

    def scores(self, X: np.ndarray) -> np.ndarray:
        return self.forward(X)[0]


def make_model(kind: str, d: int, n_out: int, rng: np.random.Generator | None = None):
    if kind == "linear":
        return LinearModel(d, n_out, rng)
    if kind == "mlp":
        return MlpModel(d, n_out, rng)
    raise ValueError(f"unknown model kind {kind!r}")


@dataclass
class AdamState:
    """Per-parameter first/second moments plus the shared step counter."""

    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(state: AdamState, params: dict, grads: dict, lr: float) -> None:
    """Standard bias-corrected Adam update, in place."""
    state.step += 1
    t = state.step
    for key, g in grads.items():
        if key not in state.m:
            state.m[key] = np.zeros_like(params[key])
            state.v[key] = np.zeros_like(params[key])
        state.m[key] = state.beta1 * state.m[key] + (1.0 - state.beta1) * g
        state.v[key] = state.beta2 * state.v[key] + (1.0 - state.beta2) * g**2
        m_hat = state.m[key] / (1.0 - state.beta1**t)
        v_hat = state.v[key] / (1.0 - state.beta2**t)
        params[key] -= lr * m_hat / (np.sqrt(v_hat) + state.eps)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 256
    epochs: int = 100
    seed: int = 0
    weight_decay: float = 0.0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 0:
            raise ValueError("invalid training configuration")


def train(model, data: Dataset, loss_batch, config: TrainConfig):
    """Mini-batch Adam minimization of the mean of a per-sample loss.

    loss_batch(G, y) must return (per-sample losses (n,), dG (n, n_out)).
    The shuffle order depends only on config.seed. Returns the per-epoch
    empirical risk trace (mean loss over the epoch's batches).
    """
    rng = np.random.default_rng(config.seed)
    state = AdamState()
    trace = []
    n = data.n
    for _ in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            G, cache = model.forward(data.X[idx])
            losses, dG = loss_batch(G, data.y[idx])
            grads = model.backward(cache, dG / len(idx))
            if config.weight_decay > 0:
                for key in grads:
                    grads[key] = grads[key] + config.weight_decay * model.params[key]
            adam_step(state, model.params, grads, config.learning_rate)
            epoch_loss += float(losses.sum())
        trace.append(epoch_loss / n)
    return trace


def save_model(model, path) -> None:
    """Flat reproducibility snapshot: magic, kind, dims, row-major parameters."""
    meta = {"magic": MODEL_MAGIC, "kind": model.kind, "d": model.d, "n_out": model.n_out}
    if model.kind == "mlp":
        meta["hidden"] = model.hidden
    np.savez(path, meta=np.array([json.dumps(meta)]), **model.params)


def load_model(path):
    with np.load(path, allow_pickle=False) as blob:
        meta = json.loads(str(blob["meta"][0]))
        if meta.get("magic") != MODEL_MAGIC:
            raise ValueError("not a model snapshot")
        if meta["kind"] == "linear":
            model = LinearModel(meta["d"], meta["n_out"])
        else:
            model = MlpModel(meta["d"], meta["n_out"], hidden=meta["hidden"])
        model.params = {k: blob[k] for k in model.params}
    return model
