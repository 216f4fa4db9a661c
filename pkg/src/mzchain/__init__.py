"""Exact simulation and resource analysis of double-chained Mach-Zehnder
counterfactual communication with multiphoton sources."""

from .engine import (
    InvalidParameters,
    OccupancyPoint,
    ProtocolParams,
    RunOutcome,
    Scheme,
    channel_occupancy_profile,
    run,
    run_inner_chain,
    run_modified,
    run_slaz,
)
from .optimizer import (
    OptimizationResult,
    baseline_min_T,
    baseline_min_T_exact,
    minimize_T_approx,
    minimize_T_at_k_bar,
    minimize_T_exact,
)
from .oracle import ClickTally, FockSpaceState, fock_simulate, monte_carlo_clicks
from .states import (
    ModeAmplitudes,
    PhotonStatistics,
    StatisticsKind,
    TruncatedStatistics,
    beam_splitter_apply,
    collapse_vacuum,
    truncate_statistics,
)

__version__ = "0.1.0"

__all__ = [
    "ClickTally", "FockSpaceState", "InvalidParameters", "ModeAmplitudes", "OccupancyPoint",
    "OptimizationResult", "PhotonStatistics", "ProtocolParams", "RunOutcome", "Scheme",
    "StatisticsKind", "TruncatedStatistics", "baseline_min_T", "baseline_min_T_exact",
    "beam_splitter_apply", "channel_occupancy_profile", "collapse_vacuum", "fock_simulate",
    "minimize_T_approx", "minimize_T_at_k_bar", "minimize_T_exact", "monte_carlo_clicks", "run",
    "run_inner_chain", "run_modified", "run_slaz", "truncate_statistics",
]
