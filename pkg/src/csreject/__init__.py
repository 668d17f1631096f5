"""Cost-sensitive classification with a reject option.

One-vs-rest score ensembles trained with a cost-weighted surrogate, a
three-way decision rule (predict / reject-by-distance / reject-by-ambiguity),
oracle and calibration audits, baselines, weak supervision, and an
experiment harness.
"""

from .core import (
    Dataset,
    Decision,
    MetricsRecord,
    RejectionCost,
    compute_metrics,
    zero_one_c_loss,
)
from .losses import MARGIN_LOSSES, MarginLossSpec, get_loss
from .surrogate import (
    cs_loss_batch,
    cs_surrogate_grad,
    cs_surrogate_loss,
    decide,
    decide_batch,
    empirical_risk,
    pointwise_conditional_risk,
)
from .theory import (
    FiniteDistribution,
    audit_calibration,
    audit_excess_chain,
    audit_excess_random,
    audit_oracle_equivalence,
    bayes_cs_binary,
    binary_three_way,
    chow_rule,
    ensemble_chow,
    psi_inverse,
    psi_transform,
)
from .models import AdamState, LinearModel, MlpModel, TrainConfig, adam_step, load_model, make_model, save_model, train
from .data import (
    GaussianMixtureSpec,
    PosteriorOracle,
    Standardizer,
    gen_gauss_mixture,
    gen_twonorm,
    load_csv,
    split,
    standardize,
    twonorm_spec,
)
from .weaksup import (
    PUConfig,
    cs_pu_loss_term,
    inject_uniform_noise,
    make_pu_dataset,
    pu_risk_nn,
    pu_risk_unbiased,
    train_pu,
)
from .harness import GridSpec, ResultRow, SummaryRow, aggregate, run_cell, run_grid

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Decision",
    "MetricsRecord",
    "RejectionCost",
    "compute_metrics",
    "zero_one_c_loss",
    "MARGIN_LOSSES",
    "MarginLossSpec",
    "get_loss",
    "cs_loss_batch",
    "cs_surrogate_grad",
    "cs_surrogate_loss",
    "decide",
    "decide_batch",
    "empirical_risk",
    "pointwise_conditional_risk",
    "FiniteDistribution",
    "audit_calibration",
    "audit_excess_chain",
    "audit_excess_random",
    "audit_oracle_equivalence",
    "bayes_cs_binary",
    "binary_three_way",
    "chow_rule",
    "ensemble_chow",
    "psi_inverse",
    "psi_transform",
    "AdamState",
    "LinearModel",
    "MlpModel",
    "TrainConfig",
    "adam_step",
    "load_model",
    "make_model",
    "save_model",
    "train",
    "GaussianMixtureSpec",
    "PosteriorOracle",
    "Standardizer",
    "gen_gauss_mixture",
    "gen_twonorm",
    "load_csv",
    "split",
    "standardize",
    "twonorm_spec",
    "PUConfig",
    "cs_pu_loss_term",
    "inject_uniform_noise",
    "make_pu_dataset",
    "pu_risk_nn",
    "pu_risk_unbiased",
    "train_pu",
    "GridSpec",
    "ResultRow",
    "SummaryRow",
    "aggregate",
    "run_cell",
    "run_grid",
]
