"""Rayleigh fading, transmitter-side channel knowledge, and gain-tail bounds.

Per sub-channel the true coefficient is h ~ CN(0, 1) (unit-mean-power
Rayleigh).  The transmitter sees h_est = h + e with e ~ CN(0, sigma_e2);
conditioned on the estimate, the true gain |h|^2 follows a non-central
chi-square law with 2 degrees of freedom, non-centrality |h_est|^2 and
per-dimension variance sigma_e2/2.  CN(0, v) throughout means total
variance v, i.e. v/2 per real dimension.

Two routes into that distribution's lower tail live here:

* ``exact_gain_cdf`` — the exact CDF, equal to 1 - Q1(.,.) for the
  first-order Marcum Q function, evaluated by a Poisson-mixture series
  (a window of terms around the Poisson bulk, weights normalized in
  place, incomplete-gamma factors from scipy).  It stays relatively
  accurate deep into the lower tail, where generic non-central
  chi-square CDF routines underflow to zero.
* ``chernoff_gain`` — the pessimistic threshold a_cher solving
  ``chernoff_bound(a) = outage``, by bisection.  The bound dominates the
  exact lower-tail probability, so the gain threshold it produces is
  always below the exact one: acting on a_cher keeps the realized outage
  at or under the budget.

The bound uses the multiplier convention in which t > 0 parametrizes the
lower tail (the textbook Chernoff multiplier is the negative of this t);
the sign convention is pinned by requiring chernoff_bound >= exact_gain_cdf,
which the test suite checks against the exact CDF directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln

__all__ = [
    "NoSolutionError",
    "SubChannelState",
    "CsitModel",
    "sample_rayleigh",
    "corrupt_csit",
    "marcum_q1",
    "exact_gain_cdf",
    "exact_gain_threshold",
    "chernoff_t",
    "chernoff_bound",
    "chernoff_gain",
]

#: Lower end of the threshold search interval.
EPS_A = 1e-30

_GAIN_REL_TOL = 1e-12


class NoSolutionError(ValueError):
    """The bound equation has no root in the search interval.

    Happens for outage budgets below what the numeric range can express at
    the interval's lower end; callers treat the sub-channel as unreachable.
    """


@dataclass(frozen=True)
class SubChannelState:
    """True and estimated coefficient of one sub-channel.

    The gains are derived, never stored, so they can not drift out of sync
    with the coefficients.
    """

    h_true: complex
    h_est: complex

    @property
    def a_true(self) -> float:
        return abs(self.h_true) ** 2

    @property
    def a_est(self) -> float:
        return abs(self.h_est) ** 2

    @classmethod
    def from_true(cls, h_true: complex) -> "SubChannelState":
        """State under perfect transmitter knowledge: estimate == truth."""
        return cls(h_true=h_true, h_est=h_true)


@dataclass(frozen=True)
class CsitModel:
    """Gaussian estimation-error model; sigma_e2 = 0 means perfect knowledge."""

    sigma_e2: float

    def __post_init__(self):
        if self.sigma_e2 < 0.0:
            raise ValueError(f"sigma_e2 must be >= 0, got {self.sigma_e2}")

    @property
    def perfect(self) -> bool:
        return self.sigma_e2 == 0.0


def sample_rayleigh(count: int, rng: np.random.Generator) -> list[SubChannelState]:
    """Draw `count` independent unit-power Rayleigh sub-channels.

    h ~ CN(0, 1), so the gain |h|^2 is exponential with mean 1.  The estimate
    starts equal to the truth; apply corrupt_csit for imperfect knowledge.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    z = rng.standard_normal((count, 2)) * math.sqrt(0.5)
    return [SubChannelState.from_true(complex(re, im)) for re, im in z]


def corrupt_csit(
    state: SubChannelState, model: CsitModel, rng: np.random.Generator
) -> SubChannelState:
    """Additive Gaussian corruption of the estimate: h_est = h_true + e."""
    if model.perfect:
        return SubChannelState(h_true=state.h_true, h_est=state.h_true)
    re, im = rng.standard_normal(2) * math.sqrt(model.sigma_e2 / 2.0)
    return SubChannelState(h_true=state.h_true, h_est=state.h_true + complex(re, im))


def _poisson_window(p: float):
    """Window of Poisson(p) terms covering all non-negligible mass.

    Returns integer orders ks and weights normalized over the window; the
    weights come from the pmf recurrence around the mode (in log space), so
    no large-argument cancellation enters.  Mass beyond 25 sigma of the
    bulk is below 1e-130 and is dropped — adaptive truncation far finer
    than the 1e-15 relative term floor being targeted.
    """
    if p == 0.0:
        return np.zeros(1), np.ones(1)
    k0 = int(p)
    half = int(max(40.0, 25.0 * math.sqrt(p + 1.0)))
    ks = np.arange(max(0, k0 - half), k0 + half + 1, dtype=np.float64)
    log_u = (ks - k0) * math.log(p)
    log_u -= gammaln(ks + 1.0) - math.lgamma(k0 + 1.0)
    u = np.exp(log_u - log_u.max())
    return ks, u / u.sum()


def marcum_q1(alpha: float, beta: float) -> float:
    """First-order Marcum Q function Q1(alpha, beta).

    Poisson mixture of upper incomplete-gamma tails: equals the survival
    function of the non-central chi-square with 2 degrees of freedom at
    beta^2, non-centrality alpha^2.
    """
    if alpha < 0.0 or beta < 0.0:
        raise ValueError("marcum_q1 requires alpha >= 0 and beta >= 0")
    if beta == 0.0:
        return 1.0
    p = 0.5 * alpha * alpha
    q = 0.5 * beta * beta
    ks, w = _poisson_window(p)
    return float(np.dot(w, gammaincc(ks + 1.0, q)))


def exact_gain_cdf(est_gain2: float, sigma_e2: float, threshold: float) -> float:
    """P(true gain <= threshold) given the estimated gain est_gain2 = |h_est|^2.

    Identical to 1 - marcum_q1(sqrt(2*est_gain2/sigma_e2), sqrt(2*a/sigma_e2))
    but summed on the lower-tail side, so tiny probabilities keep relative
    accuracy.  Monotone nondecreasing in the threshold.
    """
    if sigma_e2 <= 0.0:
        raise ValueError(f"sigma_e2 must be > 0, got {sigma_e2}")
    if est_gain2 < 0.0:
        raise ValueError(f"est_gain2 must be >= 0, got {est_gain2}")
    if threshold < 0.0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    if threshold == 0.0:
        return 0.0
    p = est_gain2 / sigma_e2
    q = threshold / sigma_e2
    ks, w = _poisson_window(p)
    return float(np.dot(w, gammainc(ks + 1.0, q)))


def exact_gain_threshold(est_gain2: float, sigma_e2: float, outage: float) -> float:
    """Invert the exact CDF: the threshold a with exact_gain_cdf(a) = outage.

    This is the ideal (non-pessimistic) counterpart of chernoff_gain; the
    Chernoff threshold always sits below it.
    """
    if sigma_e2 <= 0.0:
        raise ValueError(f"sigma_e2 must be > 0, got {sigma_e2}")
    if not 0.0 < outage < 1.0:
        raise ValueError(f"outage must be in (0, 1), got {outage}")
    p = est_gain2 / sigma_e2
    ks, w = _poisson_window(p)
    kp1 = ks + 1.0

    def cdf_at(a):
        return float(np.dot(w, gammainc(kp1, a / sigma_e2)))

    lo, hi = EPS_A, est_gain2 + sigma_e2
    if cdf_at(lo) > outage:
        raise NoSolutionError(
            f"exact threshold below {EPS_A} for outage {outage}"
        )
    while hi - lo > _GAIN_REL_TOL * hi:
        mid = 0.5 * (lo + hi)
        if cdf_at(mid) > outage:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def chernoff_t(threshold, est_gain2, sigma_e2):
    """Optimizing multiplier of the lower-tail bound at the given threshold.

    Positive for thresholds below the conditional mean est_gain2 + sigma_e2
    (equivalently, the textbook Chernoff multiplier -t is negative there,
    as a lower tail requires).  Vectorized over the threshold.
    """
    a = np.asarray(threshold, dtype=float)
    if np.any(a <= 0.0):
        raise ValueError("threshold must be > 0")
    if sigma_e2 <= 0.0:
        raise ValueError(f"sigma_e2 must be > 0, got {sigma_e2}")
    s2 = sigma_e2
    out = (s2 + np.sqrt(s2 * s2 + 4.0 * a * est_gain2)) / (2.0 * s2 * a) - 1.0 / s2
    return float(out) if out.ndim == 0 else out


def _chernoff_log_bound(a, est_gain2, sigma_e2):
    """log of the optimized Chernoff upper bound on P(gain <= a)."""
    s2 = sigma_e2
    t = (s2 + np.sqrt(s2 * s2 + 4.0 * a * est_gain2)) / (2.0 * s2 * a) - 1.0 / s2
    return a * t - est_gain2 * t / (1.0 + s2 * t) - np.log1p(s2 * t)


def chernoff_bound(threshold, est_gain2, sigma_e2):
    """Optimized Chernoff upper bound on P(true gain <= threshold).

    Dominates exact_gain_cdf for thresholds up to the conditional mean;
    underflows to 0.0 only beyond the double-precision exponent range.
    """
    a = np.asarray(threshold, dtype=float)
    if np.any(a <= 0.0):
        raise ValueError("threshold must be > 0")
    if sigma_e2 <= 0.0:
        raise ValueError(f"sigma_e2 must be > 0, got {sigma_e2}")
    out = np.exp(_chernoff_log_bound(a, est_gain2, sigma_e2))
    return float(out) if out.ndim == 0 else out


def _chernoff_gain_core(est_gain2: np.ndarray, sigma_e2: float, outage: float):
    """Vectorized bisection for the Chernoff threshold; NaN where unsolvable."""
    target = math.log(outage)
    hi = (est_gain2 + sigma_e2) * (1.0 - 1e-15)
    lo = np.full_like(hi, EPS_A)
    no_root = _chernoff_log_bound(lo, est_gain2, sigma_e2) > target
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        above = _chernoff_log_bound(mid, est_gain2, sigma_e2) > target
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
        if np.all(hi - lo <= _GAIN_REL_TOL * hi):
            break
    out = 0.5 * (lo + hi)
    return np.where(no_root, np.nan, out)


def chernoff_gain(est_gain2: float, sigma_e2: float, outage: float) -> float:
    """Pessimistic gain threshold: solve chernoff_bound(a) = outage for a.

    The root is searched in (0, est_gain2 + sigma_e2).  Because the bound
    dominates the exact lower tail, exact_gain_cdf at the returned threshold
    never exceeds the outage budget.

    Raises NoSolutionError when the bound at the interval's lower end still
    exceeds the budget (vanishing estimated gain with a large error variance
    and an extreme budget); callers map that to an unreachable sub-channel.
    """
    if sigma_e2 <= 0.0:
        raise ValueError(f"sigma_e2 must be > 0, got {sigma_e2}")
    if not 0.0 < outage < 1.0:
        raise ValueError(f"outage must be in (0, 1), got {outage}")
    if est_gain2 < 0.0:
        raise ValueError(f"est_gain2 must be >= 0, got {est_gain2}")
    out = _chernoff_gain_core(np.asarray([est_gain2], dtype=float), sigma_e2, outage)
    if math.isnan(out[0]):
        raise NoSolutionError(
            f"no threshold in (0, {est_gain2 + sigma_e2:g}) reaches outage {outage:g}"
        )
    return float(out[0])
