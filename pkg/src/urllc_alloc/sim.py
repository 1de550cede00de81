"""Seeded Monte Carlo campaigns: capacity CCDFs and power-per-user metrics.

A trial draws one Rayleigh realization of all M sub-channels, derives the
minimum enabling powers (through the pessimistic Chernoff threshold when the
transmitter's channel knowledge is imperfect), and runs every requested
allocator on that same realization.  A campaign aggregates trials into the
CCDF of the user-capacity fraction and the average power spent per served
user.

Reproducibility contract: the random stream of trial t is derived from
(seed, t) alone, so results do not depend on execution order and trials may
be evaluated concurrently if desired.  Aggregation uses order-independent
reductions (integer counts and exact float sums).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import alloc, channel, fbl

__all__ = [
    "ALLOCATOR_NAMES",
    "ScenarioConfig",
    "AllocatorMetrics",
    "CampaignMetrics",
    "trial_rng",
    "run_trial",
    "run_campaign",
    "sweep_power",
]

ALLOCATOR_NAMES = ("sorting", "equal", "waterfilling", "isnr")

#: Baselines that take no account of estimation error; excluded from
#: imperfect-knowledge campaigns (their overestimation outage is ~0.5).
_PERFECT_ONLY = frozenset({"waterfilling", "isnr"})


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one experiment.

    power is linear (normalized to the noise power); the command-line layer
    converts from dB.  The decoding-error / outage-budget split must honor
    decoding_error + outage_budget = per_target (with outage_budget = 0 and
    decoding_error = per_target in the perfect-knowledge case sigma_e2 = 0).
    """

    m: int
    power: float
    trials: int
    seed: int
    noise_power: float = 1.0
    packet_bits: int = 256
    latency_s: float = 0.5e-3
    subcarrier_hz: float = 240e3
    per_target: float = 1e-5
    decoding_error: float = 1e-5
    outage_budget: float = 0.0
    sigma_e2: float = 0.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m: must be >= 1, got {self.m}")
        if self.power <= 0.0:
            raise ValueError(f"power: must be > 0, got {self.power}")
        if self.trials < 1:
            raise ValueError(f"trials: must be >= 1, got {self.trials}")
        if self.noise_power <= 0.0:
            raise ValueError(f"noise_power: must be > 0, got {self.noise_power}")
        if self.packet_bits < 1:
            raise ValueError(f"packet_bits: must be >= 1, got {self.packet_bits}")
        raw_l = self.latency_s * self.subcarrier_hz
        if abs(raw_l - round(raw_l)) > 1e-9 or round(raw_l) < 1:
            raise ValueError(
                f"latency_s*subcarrier_hz: blocklength must be a positive integer, got {raw_l}"
            )
        if not 0.0 < self.per_target < 1.0:
            raise ValueError(f"per_target: must be in (0, 1), got {self.per_target}")
        if self.sigma_e2 < 0.0:
            raise ValueError(f"sigma_e2: must be >= 0, got {self.sigma_e2}")
        if self.sigma_e2 == 0.0:
            if self.outage_budget != 0.0:
                raise ValueError(
                    "outage_budget: must be 0 when sigma_e2 = 0 (outage is deterministic)"
                )
            if self.decoding_error != self.per_target:
                raise ValueError(
                    f"decoding_error: must equal per_target ({self.per_target}) "
                    f"when sigma_e2 = 0, got {self.decoding_error}"
                )
        else:
            if not self.decoding_error < self.per_target:
                raise ValueError(
                    f"decoding_error: must be < per_target in imperfect mode, "
                    f"got {self.decoding_error} >= {self.per_target}"
                )
            split = self.decoding_error + self.outage_budget
            if abs(split - self.per_target) > 1e-9 * self.per_target:
                raise ValueError(
                    f"outage_budget: decoding_error + outage_budget must equal "
                    f"per_target ({self.per_target}), got {split}"
                )

    @property
    def blocklength(self) -> int:
        return int(round(self.latency_s * self.subcarrier_hz))

    @property
    def rate_target(self) -> float:
        return self.packet_bits / self.blocklength

    @property
    def budget(self) -> float:
        return self.m * self.power

    @property
    def power_db(self) -> float:
        return 10.0 * math.log10(self.power)

    @property
    def imperfect(self) -> bool:
        return self.sigma_e2 > 0.0

    @property
    def fbl_params(self) -> fbl.FblParams:
        return fbl.FblParams(
            blocklength=self.blocklength,
            decoding_error=self.decoding_error,
            noise_power=self.noise_power,
            rate_target=self.rate_target,
        )


@dataclass(frozen=True)
class AllocatorMetrics:
    """Aggregated results of one allocator over a campaign.

    ccdf holds (gamma, P(capacity >= gamma)) on the grid {k/M}; the average
    power per served user is the ratio of campaign-wide sums, converted to dB
    (NaN when no user was ever served).
    """

    ccdf: list[tuple[float, float]]
    mean_capacity: float
    avg_power_per_user_db: float


@dataclass(frozen=True)
class CampaignMetrics:
    m: int
    power_db: float
    trials_run: int
    per_allocator: dict[str, AllocatorMetrics]
    diagnostics: list[str] = field(default_factory=list)


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Random stream of one trial, a pure function of (seed, trial_index)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial_index,))
    return np.random.default_rng(ss)


def _min_power_vector(cfg: ScenarioConfig, states) -> np.ndarray:
    params = cfg.fbl_params
    if cfg.imperfect:
        est = np.array([s.a_est for s in states])
        return fbl.min_power_imperfect(est, cfg.sigma_e2, cfg.outage_budget, params)
    true = np.array([s.a_true for s in states])
    return fbl.min_power_perfect(true, params)


def run_trial(
    cfg: ScenarioConfig,
    trial_index: int,
    allocators=ALLOCATOR_NAMES,
    states=None,
) -> dict[str, alloc.AllocationResult]:
    """One realization, all requested allocators on it.

    states may be injected (bypassing the RNG) to evaluate fixed gains; by
    default they are sampled from the trial's own stream, with estimation
    noise applied when the scenario says knowledge is imperfect.
    """
    unknown = set(allocators) - set(ALLOCATOR_NAMES)
    if unknown:
        raise ValueError(f"unknown allocators: {sorted(unknown)}")
    if states is None:
        rng = trial_rng(cfg.seed, trial_index)
        states = channel.sample_rayleigh(cfg.m, rng)
        if cfg.imperfect:
            model = channel.CsitModel(cfg.sigma_e2)
            states = [channel.corrupt_csit(s, model, rng) for s in states]
    elif len(states) != cfg.m:
        raise ValueError(f"got {len(states)} states for m={cfg.m}")

    costs = _min_power_vector(cfg, states)
    gains = np.array([s.a_true for s in states])
    results: dict[str, alloc.AllocationResult] = {}
    for name in allocators:
        if name == "sorting":
            res = alloc.allocate_sorting(costs, cfg.budget)
        elif name == "equal":
            res = alloc.allocate_equal_power(costs, cfg.m, cfg.power)
        elif name == "waterfilling":
            res = alloc.allocate_waterfilling(gains, cfg.noise_power, cfg.budget, costs)
        else:
            res = alloc.allocate_equal_isnr(gains, cfg.budget, costs)
        assert res.total_power <= cfg.budget * (1.0 + alloc.BUDGET_TOL_REL), (
            f"{name} overspent: {res.total_power} > {cfg.budget}"
        )
        results[name] = res
    return results


def run_campaign(cfg: ScenarioConfig, allocators=ALLOCATOR_NAMES) -> CampaignMetrics:
    """Aggregate cfg.trials independent trials into campaign metrics.

    The average power per served user is formed in the linear domain as
    (sum over trials of power spent on enabled channels) / (sum of enabled
    counts), then converted to dB; trials serving nobody contribute zero to
    both sums.
    """
    allocators = tuple(allocators)
    if cfg.imperfect:
        banned = sorted(set(allocators) & _PERFECT_ONLY)
        if banned:
            raise ValueError(
                f"{banned} do not manage estimation error; valid with sigma_e2 > 0: "
                f"sorting, equal"
            )
    ks = {name: np.zeros(cfg.trials, dtype=np.int64) for name in allocators}
    spend = {name: np.zeros(cfg.trials) for name in allocators}
    for t in range(cfg.trials):
        for name, res in run_trial(cfg, t, allocators).items():
            ks[name][t] = res.k
            spend[name][t] = math.fsum(res.powers[res.enabled])

    grid = [k / cfg.m for k in range(cfg.m + 1)]
    per_alloc = {}
    diagnostics = []
    for name in allocators:
        counts = np.bincount(ks[name], minlength=cfg.m + 1)
        tail = counts[::-1].cumsum()[::-1]  # tail[k] = #{trials with K >= k}
        ccdf = [(grid[k], tail[k] / cfg.trials) for k in range(cfg.m + 1)]
        users = int(ks[name].sum())
        if users == 0:
            avg_db = math.nan
            diagnostics.append(f"{name}: no user served in any trial")
        else:
            avg_db = 10.0 * math.log10(math.fsum(spend[name]) / users)
        per_alloc[name] = AllocatorMetrics(
            ccdf=ccdf,
            mean_capacity=users / (cfg.trials * cfg.m),
            avg_power_per_user_db=avg_db,
        )
    return CampaignMetrics(
        m=cfg.m,
        power_db=cfg.power_db,
        trials_run=cfg.trials,
        per_allocator=per_alloc,
        diagnostics=diagnostics,
    )


def sweep_power(cfg: ScenarioConfig, p_db_list, allocators=ALLOCATOR_NAMES) -> list[CampaignMetrics]:
    """One campaign per power point, sharing the base seed.

    Reusing the seed couples the points through common channel realizations:
    the same trial sees the same gains at every power, so per-trial capacity
    is nondecreasing in the budget for the sorting allocator and sweep curves
    are smooth in the Monte Carlo noise.
    """
    if len(p_db_list) == 0:
        raise ValueError("p_db_list must be non-empty")
    out = []
    for p_db in p_db_list:
        point = ScenarioConfig(
            m=cfg.m,
            power=10.0 ** (p_db / 10.0),
            trials=cfg.trials,
            seed=cfg.seed,
            noise_power=cfg.noise_power,
            packet_bits=cfg.packet_bits,
            latency_s=cfg.latency_s,
            subcarrier_hz=cfg.subcarrier_hz,
            per_target=cfg.per_target,
            decoding_error=cfg.decoding_error,
            outage_budget=cfg.outage_budget,
            sigma_e2=cfg.sigma_e2,
        )
        out.append(run_campaign(point, allocators))
    return out
