"""Partitioned ADMM adversarial attacks on graph convolutional networks."""

from ._sag import (
    Dataset,
    InputError,
    NumericalError,
    OutOfMemoryError,
    attack,
    evaluate_evasive,
    evaluate_poisoning,
    load_dataset,
    project_box_budget,
    project_l2_ball,
    run_cli,
    train_surrogate,
)

__all__ = [
    "Dataset",
    "InputError",
    "NumericalError",
    "OutOfMemoryError",
    "attack",
    "evaluate_evasive",
    "evaluate_poisoning",
    "load_dataset",
    "project_box_budget",
    "project_l2_ball",
    "run_cli",
    "train_surrogate",
]
