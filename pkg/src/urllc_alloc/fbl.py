"""Finite-blocklength rate arithmetic and minimum enabling power.

The normal-approximation achievable rate for an AWGN sub-channel with
instant SNR ``s = a*P/N0`` over ``L`` channel uses at decoding error ``eps``:

    R(s) = log2(1 + s) - sqrt(V(s)/L) * Qinv(eps) / ln(2)
    V(s) = 1 - (1 + s)^-2

A sub-channel with gain ``a`` is "enabled" for the ultra-reliable service
once its rate reaches the target ``rate_target``; the smallest power doing
so is the minimum enabling power, found here by bracketed bisection.

Powers that would exceed the search ceiling are reported as ``UNREACHABLE``
(``math.inf``), which sorts after every finite cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

__all__ = [
    "UNREACHABLE",
    "DEFAULT_CEILING_FACTOR",
    "RATE_TOL",
    "FblParams",
    "q_inv",
    "dispersion",
    "achievable_rate",
    "snr_threshold",
    "min_power_perfect",
    "min_power_imperfect",
]

#: Sentinel cost of a sub-channel that cannot be enabled within the ceiling.
UNREACHABLE = math.inf

#: Default power ceiling, as a multiple of the noise power (60 dB above noise).
DEFAULT_CEILING_FACTOR = 1e6

#: Absolute tolerance on the rate residual at the returned minimum power.
RATE_TOL = 1e-9

_LN2 = math.log(2.0)
_BISECT_REL_TOL = 1e-12


@dataclass(frozen=True)
class FblParams:
    """Constants of the finite-length rate expression.

    blocklength: channel uses per packet (dimensionless count, >= 1)
    decoding_error: target decoding error probability, in (0, 0.5]
    noise_power: linear noise power (> 0)
    rate_target: required rate in bits per channel use (> 0)
    """

    blocklength: int
    decoding_error: float
    noise_power: float = 1.0
    rate_target: float = 256.0 / 120.0

    def __post_init__(self):
        if self.blocklength < 1:
            raise ValueError(f"blocklength must be >= 1, got {self.blocklength}")
        if not 0.0 < self.decoding_error <= 0.5:
            raise ValueError(
                f"decoding_error must be in (0, 0.5], got {self.decoding_error}"
            )
        if not self.noise_power > 0.0:
            raise ValueError(f"noise_power must be > 0, got {self.noise_power}")
        if not self.rate_target > 0.0:
            raise ValueError(f"rate_target must be > 0, got {self.rate_target}")


def q_inv(p):
    """Upper-tail quantile of the standard normal: Q(q_inv(p)) = p.

    Accepts scalars or arrays with entries in the open interval (0, 1).
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
        raise ValueError("q_inv requires 0 < p < 1")
    out = -ndtri(p_arr)
    return float(out) if np.isscalar(p) or p_arr.ndim == 0 else out


_V_MAX = float(np.nextafter(1.0, 0.0))  # largest double below 1


def _dispersion_of_snr(s):
    # 1 - (1+s)^-2 written cancellation-free: s*(2+s)/(1+s)^2; the ratio can
    # round to 1.0 above SNR ~1e8, so pin it below 1 to keep the open bound
    return np.minimum(s * (2.0 + s) / ((1.0 + s) * (1.0 + s)), _V_MAX)


def _rate_of_snr(s, blocklength, qinv_eps):
    v = _dispersion_of_snr(s)
    return np.log1p(s) / _LN2 - np.sqrt(v / blocklength) * qinv_eps / _LN2


def dispersion(gain, power, params: FblParams):
    """Channel dispersion V at instant SNR gain*power/noise_power; in [0, 1)."""
    gain = np.asarray(gain, dtype=float)
    power = np.asarray(power, dtype=float)
    if np.any(gain < 0.0) or np.any(power < 0.0):
        raise ValueError("gain and power must be non-negative")
    s = gain * power / params.noise_power
    out = _dispersion_of_snr(s)
    return float(out) if out.ndim == 0 else out


def achievable_rate(gain, power, params: FblParams):
    """Finite-length achievable rate in bits per channel use.

    Strictly increasing in power throughout the operating region where the
    rate is non-negative; may go negative at very low SNR (returned as-is,
    callers clamp if they need to).
    """
    gain = np.asarray(gain, dtype=float)
    power = np.asarray(power, dtype=float)
    if np.any(gain < 0.0) or np.any(power < 0.0):
        raise ValueError("gain and power must be non-negative")
    s = gain * power / params.noise_power
    out = _rate_of_snr(s, params.blocklength, q_inv(params.decoding_error))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=64)
def _snr_threshold_cached(blocklength: int, decoding_error: float, rate_target: float) -> float:
    """Root s* of R(s) = rate_target, by bracketed bisection on the SNR axis.

    The rate depends on gain and power only through s = a*P/N0, so one root
    in s serves every gain; the minimum power is then N0*s*/a.  Bisection is
    valid because the rate crosses any positive target exactly once.
    """
    qe = q_inv(decoding_error)

    def resid(s):
        return _rate_of_snr(s, blocklength, qe) - rate_target

    hi = 1.0
    while resid(hi) < 0.0:
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("rate target not reachable at any finite SNR")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = resid(mid)
        if abs(r) <= RATE_TOL * 1e-4 or (hi - lo) <= _BISECT_REL_TOL * mid:
            break
        if r < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def snr_threshold(params: FblParams) -> float:
    """Instant SNR at which the achievable rate equals the rate target."""
    return _snr_threshold_cached(
        params.blocklength, params.decoding_error, params.rate_target
    )


def min_power_perfect(gain, params: FblParams, p_ceiling: float | None = None):
    """Minimum power enabling a sub-channel of known gain, or UNREACHABLE.

    Returns the power P with achievable_rate(gain, P) = rate_target to within
    RATE_TOL.  Gains of zero, or powers beyond the ceiling (default
    DEFAULT_CEILING_FACTOR * noise_power), yield UNREACHABLE.  Accepts a
    scalar gain or an array of gains.
    """
    if p_ceiling is None:
        p_ceiling = DEFAULT_CEILING_FACTOR * params.noise_power
    s_star = snr_threshold(params)
    gain_arr = np.asarray(gain, dtype=float)
    if np.any(gain_arr < 0.0):
        raise ValueError("gain must be non-negative")
    with np.errstate(divide="ignore", invalid="ignore"):
        power = params.noise_power * s_star / gain_arr
    power = np.where((gain_arr <= 0.0) | (power > p_ceiling), UNREACHABLE, power)
    return float(power) if power.ndim == 0 else power


def min_power_imperfect(
    est_gain2,
    sigma_e2: float,
    outage_budget: float,
    params: FblParams,
    p_ceiling: float | None = None,
):
    """Minimum power under imperfect transmitter channel knowledge.

    Replaces the true gain by the pessimistic Chernoff threshold derived from
    the estimated gain ``est_gain2 = |h_est|^2`` and the estimation error
    variance, so the realized rate falls short of the target with probability
    at most ``outage_budget``.  Thresholds with no numeric solution map to
    UNREACHABLE.  Vectorized over ``est_gain2``.
    """
    from . import channel  # late import; channel has no dependency on fbl

    if sigma_e2 <= 0.0:
        raise ValueError(
            "sigma_e2 must be > 0; use min_power_perfect for perfect knowledge"
        )
    if not 0.0 < outage_budget < 1.0:
        raise ValueError("outage_budget must be in (0, 1)")
    est_arr = np.atleast_1d(np.asarray(est_gain2, dtype=float))
    if np.any(est_arr < 0.0):
        raise ValueError("est_gain2 must be non-negative")
    a_cher = channel._chernoff_gain_core(est_arr, sigma_e2, outage_budget)
    a_cher = np.where(np.isnan(a_cher), 0.0, a_cher)  # no solution -> zero gain -> inf
    power = min_power_perfect(a_cher, params, p_ceiling=p_ceiling)
    power = np.atleast_1d(power)
    return float(power[0]) if np.isscalar(est_gain2) or np.ndim(est_gain2) == 0 else power
