"""Shared primitives: labels, decisions, rejection cost, datasets, 0-1-c metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REASON_DISTANCE = "distance"
REASON_AMBIGUITY = "ambiguity"
REASON_ORACLE = "oracle"

_REASONS = (REASON_DISTANCE, REASON_AMBIGUITY, REASON_ORACLE)


@dataclass(frozen=True)
class Decision:
    """Either predict a class label (1..K) or reject with a reason tag."""

    label: int | None = None
    reject_reason: str | None = None

    def __post_init__(self):
        if (self.label is None) == (self.reject_reason is None):
            raise ValueError("decision must carry exactly one of label / reject_reason")
        if self.label is not None and self.label < 1:
            raise ValueError(f"label must be >= 1, got {self.label}")
        if self.reject_reason is not None and self.reject_reason not in _REASONS:
            raise ValueError(f"unknown rejection reason {self.reject_reason!r}")

    @classmethod
    def predict(cls, label: int) -> "Decision":
        return cls(label=int(label))

    @classmethod
    def reject(cls, reason: str) -> "Decision":
        return cls(reject_reason=reason)

    @property
    def is_reject(self) -> bool:
        return self.reject_reason is not None


@dataclass(frozen=True)
class RejectionCost:
    """Cost c of abstaining; the whole framework requires 0 < c < 0.5."""

    c: float

    def __post_init__(self):
        if not (0.0 < self.c < 0.5):
            raise ValueError(f"rejection cost must lie in (0, 0.5), got {self.c}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix (n, d) with integer labels in 1..K."""

    X: np.ndarray
    y: np.ndarray
    K: int

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=int)
        if X.ndim != 2 or len(X) == 0:
            raise ValueError("X must be a non-empty (n, d) array")
        if y.shape != (len(X),):
            raise ValueError("y must be a length-n label vector")
        if not np.isfinite(X).all():
            raise ValueError("features must be finite")
        if y.min() < 1 or y.max() > self.K:
            raise ValueError(f"labels must lie in 1..{self.K}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.X)

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.K)


@dataclass(frozen=True)
class MetricsRecord:
    n: int
    risk01c: float
    rejection_ratio: float
    accepted_error: float
    n_reject_distance: int
    n_reject_ambiguity: int
    n_wrong_accepted: int
    nothing_accepted: bool = False


def zero_one_c_loss(decision: Decision, label: int, cost: RejectionCost) -> float:
    """0 on a correct prediction, 1 on a wrong one, c on rejection."""
    if decision.is_reject:
        return cost.c
    return 0.0 if decision.label == label else 1.0


def compute_metrics(decisions, labels, cost: RejectionCost) -> MetricsRecord:
    """Aggregate the 0-1-c risk and its rejection/error decomposition."""
    decisions = list(decisions)
    labels = list(labels)
    if len(decisions) != len(labels):
        raise ValueError("decisions and labels must have equal length")
    n = len(decisions)
    if n == 0:
        raise ValueError("cannot compute metrics on empty input")

    n_dist = n_amb = n_oracle = n_wrong = 0
    for dec, y in zip(decisions, labels):
        if dec.is_reject:
            if dec.reject_reason == REASON_DISTANCE:
                n_dist += 1
            elif dec.reject_reason == REASON_AMBIGUITY:
                n_amb += 1
            else:
                n_oracle += 1
        elif dec.label != y:
            n_wrong += 1

    n_reject = n_dist + n_amb + n_oracle
    n_accepted = n - n_reject
    accepted_error = n_wrong / n_accepted if n_accepted > 0 else 0.0
    rejection_ratio = n_reject / n
    risk01c = (cost.c * n_reject + n_wrong) / n
    return MetricsRecord(
        n=n,
        risk01c=risk01c,
        rejection_ratio=rejection_ratio,
        accepted_error=accepted_error,
        n_reject_distance=n_dist,
        n_reject_ambiguity=n_amb,
        n_wrong_accepted=n_wrong,
        nothing_accepted=(n_accepted == 0),
    )
