"""Tier-aware OFDMA macro / small-cell resource allocation."""

from ._core import (
    ChannelGains,
    ExperimentResult,
    InfeasibleError,
    MacroAllocation,
    Scenario,
    SizeLimitError,
    SmallCellAllocation,
    bisect_ith,
    check_feasible,
    metric_admitted,
    metric_channel_usage,
    objective_value,
    realize,
    run_algorithm2,
    run_experiment,
    solve_convex_relaxation,
    solve_minlp_exact,
    solve_proposed,
    solve_traditional,
    tolerable_interference,
)

__all__ = [
    "ChannelGains",
    "ExperimentResult",
    "InfeasibleError",
    "MacroAllocation",
    "Scenario",
    "SizeLimitError",
    "SmallCellAllocation",
    "bisect_ith",
    "check_feasible",
    "metric_admitted",
    "metric_channel_usage",
    "objective_value",
    "realize",
    "run_algorithm2",
    "run_experiment",
    "solve_convex_relaxation",
    "solve_minlp_exact",
    "solve_proposed",
    "solve_traditional",
    "tolerable_interference",
]
