"""Shared fixtures and independent oracle helpers.

The oracles here deliberately avoid the library's own code paths: the
Gaussian tail uses math.erfc, roots come from plain interval halving on
formulas written out locally.  Tests compare the package against these.
"""

import math

import numpy as np
import pytest

from urllc_alloc import FblParams
from urllc_alloc.channel import SubChannelState


def oracle_q(x: float) -> float:
    """Gaussian upper tail via erfc, independent of scipy.ndtri."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def oracle_q_inv(p: float) -> float:
    """Invert oracle_q by bisection on [-40, 40]."""
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if oracle_q(mid) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def oracle_rate(gain: float, power: float, params: FblParams) -> float:
    """Finite-length rate written out locally (math module only)."""
    s = gain * power / params.noise_power
    v = 1.0 - (1.0 + s) ** -2
    qe = oracle_q_inv(params.decoding_error)
    return math.log2(1.0 + s) - math.sqrt(v / params.blocklength) * qe / math.log(2.0)


def oracle_min_power(gain: float, params: FblParams, hi: float = 1e9) -> float:
    """Independent bisection for the minimum enabling power."""
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if oracle_rate(gain, mid, params) < params.rate_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def states_from_gains(gains) -> list[SubChannelState]:
    """Deterministic states with real coefficients sqrt(a)."""
    return [SubChannelState.from_true(complex(math.sqrt(a), 0.0)) for a in gains]


@pytest.fixture(scope="session")
def params() -> FblParams:
    """Baseline constants: L=120, eps=1e-5, unit noise, 256 bits / 120 uses."""
    return FblParams(blocklength=120, decoding_error=1e-5, noise_power=1.0,
                     rate_target=256.0 / 120.0)


@pytest.fixture(scope="session")
def params_split() -> FblParams:
    """Halved decoding error, as used when an outage budget is carved out."""
    return FblParams(blocklength=120, decoding_error=0.5e-5, noise_power=1.0,
                     rate_target=256.0 / 120.0)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(987123)
