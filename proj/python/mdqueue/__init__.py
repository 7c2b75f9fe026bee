"""Moderate-deviation laboratory for many-server queues (C++ core)."""

from ._core import (
    ClassParams,
    ConfigError,
    Game,
    InfeasibleAllocation,
    InvalidArgument,
    NumericalError,
    action_arrivals,
    action_services,
    cmu_priority,
    drift_reflect,
    estimate_cost,
    log_mean_exp,
    min_split_rate,
    minimizing_strategy,
    reflect,
    single_class_rate,
    solve_value,
)

__all__ = [
    "ClassParams",
    "ConfigError",
    "Game",
    "InfeasibleAllocation",
    "InvalidArgument",
    "NumericalError",
    "action_arrivals",
    "action_services",
    "cmu_priority",
    "drift_reflect",
    "estimate_cost",
    "log_mean_exp",
    "min_split_rate",
    "minimizing_strategy",
    "reflect",
    "single_class_rate",
    "solve_value",
]
