"""Training data simplification for cross-project defect prediction."""

import json

from ._core import (
    CpdpError,
    Model,
    Release,
    Repository,
    RhoRule,
    SimplifiedTDS,
    auc,
    candidate_pool,
    characterize,
    dpr,
    evaluate_rule,
    log_transform,
    measures,
    metric_names,
    read_csv,
    read_repository,
    simplify,
    sweep_rho,
    train,
    train_release,
    wilcoxon,
)
from ._core import run_experiment as _run_experiment


def run_experiment(repo, methods=("ritds2",), classifiers=("nb",), r_values=(1, 2, 3), k=10, jobs=1):
    """Run the leave-one-release-out grid and return the records as dicts."""
    lines = _run_experiment(repo, list(methods), list(classifiers), list(r_values), k, jobs)
    return [json.loads(line) for line in lines]


__all__ = [
    "CpdpError",
    "Model",
    "Release",
    "Repository",
    "RhoRule",
    "SimplifiedTDS",
    "auc",
    "candidate_pool",
    "characterize",
    "dpr",
    "evaluate_rule",
    "log_transform",
    "measures",
    "metric_names",
    "read_csv",
    "read_repository",
    "run_experiment",
    "simplify",
    "sweep_rho",
    "train",
    "train_release",
    "wilcoxon",
]
