"""Supernet splitting via gradient-matching scores and balanced min-cut."""

from ._gmsplit import (
    ConfigError,
    ShapeError,
    StatsError,
    balanced_min_cut,
    check_config,
    run_split,
    sh_total_epochs,
    spearman,
    spiral_dataset_summary,
    toy_space_children,
)

__all__ = [
    "ConfigError",
    "ShapeError",
    "StatsError",
    "balanced_min_cut",
    "check_config",
    "run_split",
    "sh_total_epochs",
    "spearman",
    "spiral_dataset_summary",
    "toy_space_children",
]
