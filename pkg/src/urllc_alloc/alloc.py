"""Power allocation strategies over one set of sub-channel realizations.

All allocators work against the same vector of minimum enabling powers
("costs"): entry m is the smallest power that makes sub-channel m deliver
the ultra-reliable service, or inf when the channel cannot be enabled at
all.  A channel counts as enabled when its allocated power reaches its cost
(to within a 1e-12 relative slack, inclusive at equality), and the figure
of merit is the fraction of enabled channels.

The sorting allocator enables the cheapest channels first and is optimal:
no other split of the same budget enables more channels.  Equal power,
waterfilling, and equal instant-SNR are the reference baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ENABLE_TOL",
    "BUDGET_TOL_REL",
    "AllocationResult",
    "count_enabled",
    "allocate_sorting",
    "allocate_equal_power",
    "allocate_waterfilling",
    "allocate_equal_isnr",
]

#: Relative slack in the enabled test: power >= cost * (1 - ENABLE_TOL).
ENABLE_TOL = 1e-12

#: Budget feasibility slack, relative to the budget itself.
BUDGET_TOL_REL = 1e-9


@dataclass(frozen=True)
class AllocationResult:
    """Outcome of one allocator on one realization.

    powers: allocated power per sub-channel, original order
    enabled: per-channel service indicator (power covers the cost)
    k: number of enabled channels
    capacity: k / M, the user-capacity fraction
    total_power: exact sum of the allocated powers
    """

    powers: np.ndarray
    enabled: np.ndarray
    k: int
    capacity: float
    total_power: float


def _enabled_mask(powers: np.ndarray, costs: np.ndarray) -> np.ndarray:
    return np.isfinite(costs) & (powers >= costs * (1.0 - ENABLE_TOL))


def count_enabled(powers, costs) -> tuple[int, float]:
    """Count served channels: cost finite and power >= cost (inclusive).

    Returns (k, capacity) with capacity = k / M.
    """
    powers = np.asarray(powers, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if powers.shape != costs.shape:
        raise ValueError(f"length mismatch: {powers.shape} vs {costs.shape}")
    k = int(_enabled_mask(powers, costs).sum())
    return k, k / len(costs)


def _result(powers: np.ndarray, costs: np.ndarray) -> AllocationResult:
    enabled = _enabled_mask(powers, costs)
    k = int(enabled.sum())
    # fsum: exact and independent of summation order
    return AllocationResult(
        powers=powers,
        enabled=enabled,
        k=k,
        capacity=k / len(costs),
        total_power=math.fsum(powers),
    )


def allocate_sorting(costs, budget: float) -> AllocationResult:
    """Enable the cheapest channels first, spending exactly their costs.

    Sorts the cost vector ascending (ties broken by original index), enables
    the longest prefix whose cost sum stays within the budget, and allocates
    exactly the cost to each enabled channel and zero elsewhere.  Optimal in
    the number of enabled channels, and spends the least power any optimal
    allocation can spend.
    """
    costs = np.asarray(costs, dtype=float)
    if budget < 0.0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    order = np.argsort(costs, kind="stable")
    prefix = np.cumsum(costs[order])
    k_star = int((prefix <= budget).sum())
    powers = np.zeros_like(costs)
    take = order[:k_star]
    powers[take] = costs[take]
    return _result(powers, costs)


def allocate_equal_power(costs, m: int, power: float) -> AllocationResult:
    """The no-knowledge baseline: every sub-channel gets the same power."""
    costs = np.asarray(costs, dtype=float)
    if len(costs) != m:
        raise ValueError(f"costs has length {len(costs)}, expected {m}")
    powers = np.full(m, float(power))
    return _result(powers, costs)


def allocate_waterfilling(gains, noise_power: float, budget: float, costs) -> AllocationResult:
    """Throughput-oriented baseline: P_m = max(0, level - N0/a_m).

    The water level is found by bisection so the powers sum to the budget;
    channels whose noise floor sits above the level get nothing.  Enabled
    flags still come from the shared cost vector.
    """
    gains = np.asarray(gains, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if not np.any(gains > 0.0):
        raise ValueError("waterfilling needs at least one positive gain")
    with np.errstate(divide="ignore"):
        floors = noise_power / gains
    lo = 0.0
    hi = budget + floors[np.isfinite(floors)].max()
    tol = BUDGET_TOL_REL * budget
    for _ in range(200):
        level = 0.5 * (lo + hi)
        total = np.maximum(0.0, level - floors).sum()
        if abs(total - budget) <= tol:
            lo = hi = level
            break
        if total > budget:
            hi = level
        else:
            lo = level
    powers = np.maximum(0.0, lo - floors)
    return _result(powers, costs)


def allocate_equal_isnr(gains, budget: float, costs) -> AllocationResult:
    """Brute-force baseline: split the budget so every channel sees one iSNR.

    P_m proportional to 1/a_m makes a_m * P_m a common constant and uses the
    whole budget.  A (numerically) zero gain makes that impossible; the trial
    is then declared failed outright, matching this baseline's all-or-nothing
    behavior.
    """
    gains = np.asarray(gains, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if np.any(gains < 1e-300):
        powers = np.zeros_like(gains)
        return _result(powers, costs)
    inv = 1.0 / gains
    powers = budget * inv / inv.sum()
    return _result(powers, costs)
