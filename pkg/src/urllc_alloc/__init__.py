"""Finite-blocklength power allocation for FDMA URLLC downlinks.

Library layout:

* ``fbl``     — finite-length achievable rate and minimum enabling power
* ``channel`` — Rayleigh fading, estimation error, gain-tail machinery
* ``alloc``   — the power-sorting allocator and the three baselines
* ``sim``     — seeded Monte Carlo campaigns and metric aggregation
* ``cli``     — command-line front end (``urllc-alloc``)
"""

from .alloc import (
    AllocationResult,
    allocate_equal_isnr,
    allocate_equal_power,
    allocate_sorting,
    allocate_waterfilling,
    count_enabled,
)
from .channel import (
    CsitModel,
    NoSolutionError,
    SubChannelState,
    chernoff_bound,
    chernoff_gain,
    chernoff_t,
    corrupt_csit,
    exact_gain_cdf,
    exact_gain_threshold,
    marcum_q1,
    sample_rayleigh,
)
from .fbl import (
    UNREACHABLE,
    FblParams,
    achievable_rate,
    dispersion,
    min_power_imperfect,
    min_power_perfect,
    q_inv,
    snr_threshold,
)
from .sim import (
    ALLOCATOR_NAMES,
    CampaignMetrics,
    ScenarioConfig,
    run_campaign,
    run_trial,
    sweep_power,
    trial_rng,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationResult",
    "ALLOCATOR_NAMES",
    "CampaignMetrics",
    "CsitModel",
    "FblParams",
    "NoSolutionError",
    "ScenarioConfig",
    "SubChannelState",
    "UNREACHABLE",
    "achievable_rate",
    "allocate_equal_isnr",
    "allocate_equal_power",
    "allocate_sorting",
    "allocate_waterfilling",
    "chernoff_bound",
    "chernoff_gain",
    "chernoff_t",
    "corrupt_csit",
    "count_enabled",
    "dispersion",
    "exact_gain_cdf",
    "exact_gain_threshold",
    "marcum_q1",
    "min_power_imperfect",
    "min_power_perfect",
    "q_inv",
    "run_campaign",
    "run_trial",
    "sample_rayleigh",
    "snr_threshold",
    "sweep_power",
    "trial_rng",
]
