"""Finite-difference gradient checks shared by the test suite and the CLI."""

from __future__ import annotations

import numpy as np

from . import baselines
from .core import RejectionCost
from .losses import MARGIN_LOSSES
from .models import make_model
from .surrogate import cs_loss_batch

# kink locations per margin loss; points within KINK_EPS are skipped
KINKS = {
    "hinge": (1.0,),
    "squared_hinge": (1.0,),
    "ramp": (-1.0, 1.0),
}
KINK_EPS = 1e-3


def central_diff(f, x: float, h: float = 1e-6) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def rel_err(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1.0, abs(analytic))


def check_margin_losses(grid=None, h: float = 1e-6, tol: float = 1e-5):
    """Max relative error of each margin-loss derivative on a grid."""
    if grid is None:
        grid = np.linspace(-5.0, 5.0, 201)
    results = {}
    for name, loss in MARGIN_LOSSES.items():
        kinks = KINKS.get(name, ())
        worst = 0.0
        for z in grid:
            if any(abs(z - k) < KINK_EPS for k in kinks):
                continue
            num = central_diff(lambda v: float(loss.value(np.float64(v))), float(z), h)
            worst = max(worst, rel_err(float(loss.grad(np.float64(z))), num))
        results[name] = (worst, worst < tol)
    return results


def _numeric_param_grad(model, objective, h: float = 1e-5):
    grads = {}
    for key, arr in model.params.items():
        g = np.zeros_like(arr)
        flat = arr.ravel()
        gflat = g.ravel()
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            hi = objective()
            flat[i] = old - h
            lo = objective()
            flat[i] = old
            gflat[i] = (hi - lo) / (2.0 * h)
        grads[key] = g
    return grads


def check_model_gradients(loss_batch, n_out: int, kind: str, seed: int = 0, d: int = 5, n: int = 8, tol: float = 1e-4):
    """End-to-end analytic vs numeric gradient through a model; returns max rel error."""
    rng = np.random.default_rng(seed)
    model = make_model(kind, d, n_out, rng)
    X = rng.normal(size=(n, d))
    y = rng.integers(1, n_out + 1, size=n) if n_out > 1 else np.ones(n, dtype=int)

    def objective():
        G, _ = model.forward(X)
        losses, _ = loss_batch(G, y)
        return float(losses.mean())

    G, cache = model.forward(X)
    _, dG = loss_batch(G, y)
    analytic = model.backward(cache, dG / n)
    numeric = _numeric_param_grad(model, objective)
    worst = 0.0
    for key in analytic:
        denom = np.maximum(1.0, np.abs(analytic[key]))
        worst = max(worst, float((np.abs(analytic[key] - numeric[key]) / denom).max()))
    return worst, worst < tol


def run_gradcheck(seed: int = 0):
    """Full gradient suite: margin losses, L_CS through both model kinds,
    SCE, DEFER, and ANGLE. Returns {name: (max_rel_err, ok)}."""
    results = dict(check_margin_losses())

    cost = RejectionCost(0.25)
    K = 3
    for name in ("sigmoid", "hinge", "squared", "logistic", "savage", "tangent", "ramp", "exponential", "squared_hinge"):
        loss = MARGIN_LOSSES[name]
        batch = lambda G, y, _l=loss: cs_loss_batch(_l, cost, G, y)
        for kind in ("linear", "mlp"):
            err, ok = check_model_gradients(batch, K, kind, seed=seed)
            results[f"cs-{name}/{kind}"] = (err, ok)

    results["sce/linear"] = check_model_gradients(baselines.sce_loss_batch, K, "linear", seed=seed)
    results["sce/mlp"] = check_model_gradients(baselines.sce_loss_batch, K, "mlp", seed=seed)
    results["defer/linear"] = check_model_gradients(baselines.defer_loss_batch(cost), K + 1, "linear", seed=seed)
    results["defer/mlp"] = check_model_gradients(baselines.defer_loss_batch(cost), K + 1, "mlp", seed=seed)

    a1, _ = baselines.bend_slopes(K, cost)
    angle_batch = baselines.angle_loss_batch(baselines.AngleConfig(K, a1))

    def angle_batch_labels(G, y):
        return angle_batch(G, y)

    # labels for angle must be in 1..K while scores live in R^{K-1}
    def angle_check(kind):
        rng = np.random.default_rng(seed + 7)
        model = make_model(kind, 5, K - 1, rng)
        X = rng.normal(size=(8, 5))
        y = rng.integers(1, K + 1, size=8)

        def objective():
            G, _ = model.forward(X)
            return float(angle_batch(G, y)[0].mean())

        G, cache = model.forward(X)
        _, dG = angle_batch(G, y)
        analytic = model.backward(cache, dG / len(X))
        numeric = _numeric_param_grad(model, objective)
        worst = 0.0
        for key in analytic:
            denom = np.maximum(1.0, np.abs(analytic[key]))
            worst = max(worst, float((np.abs(analytic[key] - numeric[key]) / denom).max()))
        return worst, worst < 1e-4

    results["angle/linear"] = angle_check("linear")
    results["angle/mlp"] = angle_check("mlp")
    return results
