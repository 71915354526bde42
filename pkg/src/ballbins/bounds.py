"""Two-sided bounds, phase thresholds, and concentration solvers.

The central result is the probability sandwich for the maximum load M after
m throws with distribution p:

    Pr[Binomial(m, ||p||_k) >= k]  <=  Pr[M >= k]  <=  C(m, k) * ||p||_k**k

The upper side is Markov's inequality applied to the expected number of
k-way collisions; the lower side compares against a single aggregate bin of
mass ||p||_k.  Both sides, and everything derived from them here, depend on
(m, k, p) only through the load ratio rho = m * ||p||_k / k, which is where
the phase transition near rho = 1 comes from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    Distribution,
    ProblemInstance,
    binom_upper_tail,
    k_norm,
    log_binomial_coeff,
    log_power_sum,
    vector_k_norm,
)
from .errors import BracketError, DomainError, EmptySubsetError

__all__ = [
    "BoundPair",
    "WaitBounds",
    "PhaseThresholds",
    "RegimeBound",
    "max_load_upper",
    "max_load_lower",
    "sandwich",
    "rho_tail_upper",
    "rho_tail_lower",
    "phase_thresholds",
    "critical_load",
    "critical_balls",
    "load_interval",
    "wait_interval",
    "expected_wait_bounds",
    "sharp_wait_constant",
    "restricted_sandwich",
    "integer_bracket",
]

LOWER_SOURCE = "binomial_tail"
UPPER_SOURCE = "collision_markov"

_E_SQUARED = math.e**2
_INV_E = 1.0 / math.e


@dataclass(frozen=True)
class BoundPair:
    """Lower and upper probability bounds with provenance labels."""

    lower: float
    upper: float
    lower_source: str = LOWER_SOURCE
    upper_source: str = UPPER_SOURCE

    def __post_init__(self):
        if not (0.0 <= self.lower and self.upper <= 1.0):
            raise DomainError("bounds must lie in [0, 1]")
        if self.lower > self.upper + 1e-12:
            raise DomainError(
                f"lower bound {self.lower!r} exceeds upper bound {self.upper!r}"
            )
        # Absorb 1-ulp inversions so the pair invariant holds exactly.
        if self.lower > self.upper:
            object.__setattr__(self, "lower", self.upper)


@dataclass(frozen=True)
class WaitBounds:
    """Bounds on the expected waiting time until some bin holds k balls.

    ``sharp_constant`` is the best possible constant c with
    ||p||_k * E[wait] >= c, attained in the uniform large-n limit; it always
    exceeds k/e, so ``sharp_constant / ||p||_k`` improves on ``lower_expected``.
    """

    lower_expected: float
    upper_expected: float
    sharp_constant: float


@dataclass(frozen=True)
class PhaseThresholds:
    """rho values at which Pr[M >= k] is provably <= delta or >= 1 - delta."""

    rho_upper: float
    rho_lower: float


class RegimeBound(NamedTuple):
    """A ratio-based bound value plus a flag marking the vacuous regime."""

    value: float
    vacuous: bool


def max_load_upper(inst: ProblemInstance) -> float:
    """Upper bound min(1, C(m, k) * ||p||_k**k) on Pr[max load >= k].

    The expected number of k-subsets of balls that land in one common bin
    is exactly C(m, k) * sum_i p_i**k; Markov's inequality bounds the
    probability that at least one such collision exists.  Integer k only.
    """
    k = inst.integer_load
    m = inst.balls
    if m < k:
        return 0.0
    log_value = log_binomial_coeff(m, k) + log_power_sum(inst.dist.weights, k)
    return min(1.0, math.exp(min(0.0, log_value)))


def max_load_lower(inst: ProblemInstance) -> float:
    """Lower bound Pr[Binomial(m, ||p||_k) >= k] on Pr[max load >= k]."""
    k = inst.integer_load
    return binom_upper_tail(inst.balls, k_norm(inst.dist, k), k)


def sandwich(inst: ProblemInstance) -> BoundPair:
    """Both sides of the max-load probability sandwich."""
    return BoundPair(lower=max_load_lower(inst), upper=max_load_upper(inst))


def _rho_value(value) -> float:
    return float(value)


def rho_tail_upper(rho, k: float) -> RegimeBound:
    """(e * rho)**k bound on Pr[max load >= k]; vacuous (=1) for rho >= 1/e.

    Valid for any real k >= 1; follows from the collision bound via
    C(m, k) <= (e*m/k)**k.
    """
    if not (k >= 1):
        raise DomainError(f"k must be >= 1, got {k!r}")
    r = _rho_value(rho)
    if r >= _INV_E:
        return RegimeBound(1.0, True)
    if r <= 0.0:
        return RegimeBound(0.0, False)
    value = math.exp(k * (1.0 + math.log(r)))
    return RegimeBound(min(1.0, max(0.0, value)), False)


def rho_tail_lower(rho, k: float) -> RegimeBound:
    """1 - exp(-k*(rho - 1 - log rho)) bound on Pr[max load >= k].

    Vacuous (=0) for rho <= 1.  Valid for any real k >= 1; follows from the
    binomial-tail bound via the KL (Chernoff-Hoeffding) lower-tail estimate.
    """
    if not (k >= 1):
        raise DomainError(f"k must be >= 1, got {k!r}")
    r = _rho_value(rho)
    if r <= 1.0:
        return RegimeBound(0.0, True)
    value = -math.expm1(-k * (r - 1.0 - math.log(r)))
    return RegimeBound(min(1.0, max(0.0, value)), False)


def phase_thresholds(k: float, delta: float) -> PhaseThresholds:
    """rho thresholds certifying Pr[M >= k] <= delta resp. >= 1 - delta.

    rho_upper = delta**(1/k) / e and rho_lower = max(e**2, (2/k) log(1/delta)).
    """
    if not (k >= 1):
        raise DomainError(f"k must be >= 1, got {k!r}")
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must be in (0, 1), got {delta!r}")
    rho_upper = math.exp(math.log(delta) / k) / math.e
    rho_lower = max(_E_SQUARED, 2.0 * math.log(1.0 / delta) / k)
    return PhaseThresholds(rho_upper=rho_upper, rho_lower=rho_lower)


def critical_load(m: int, dist: Distribution) -> float:
    """The load k* at which rho(m, k*) = 1, i.e. k*/||p||_{k*} = m.

    g(k) = k / ||p||_k is continuous and nondecreasing with g(1) = 1, so for
    m >= 1 a root exists in [1, m]; it is located by bisection (k tolerance
    1e-12, ties toward smaller k).  Monotonicity of g is asserted on the
    shrinking bracket and a violation raises BracketError rather than
    returning a clamped value.
    """
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise DomainError("m must be a positive integer")
    if dist.bin_count == 1:
        return float(m)

    def g(k: float) -> float:
        return k / k_norm(dist, k)

    lo, hi = 1.0, float(m)
    g_lo, g_hi = g(lo), g(hi)
    if g_lo > m + 1e-9 or g_hi < m - 1e-9:
        raise BracketError(
            f"failed to bracket k/||p||_k = {m} on [1, {m}]: "
            f"g(1)={g_lo!r}, g({m})={g_hi!r}"
        )
    if m == 1:
        return 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = g(mid)
        if not (g_lo <= g_mid + 1e-9 and g_mid <= g_hi + 1e-9):
            raise BracketError(
                f"k/||p||_k lost monotonicity near k={mid!r}: "
                f"{g_lo!r}, {g_mid!r}, {g_hi!r}"
            )
        if g_mid < m:
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
        if hi - lo <= 1e-12:
            break
    return 0.5 * (lo + hi)


def critical_balls(k: float, dist: Distribution) -> float:
    """The ball count m* = k / ||p||_k at which rho(m*, k) = 1."""
    if not (k >= 1):
        raise DomainError(f"k must be >= 1, got {k!r}")
    return k / k_norm(dist, k)


def load_interval(m: int, dist: Distribution, delta: float) -> tuple[float, float]:
    """(k_low, k_high) bracketing the max load around k* with confidence.

    Pr[M >= k_high] <= delta and Pr[M >= k_low] >= 1 - delta, where
    k_high = (e/delta) * k* and k_low = k* / max(e**2, 2 log(1/delta)),
    clamped up to 1 (where the event M >= 1 is certain for m >= 1).
    """
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must be in (0, 1), got {delta!r}")
    k_star = critical_load(m, dist)
    k_high = (math.e / delta) * k_star
    k_low = max(1.0, k_star / max(_E_SQUARED, 2.0 * math.log(1.0 / delta)))
    return k_low, k_high


def wait_interval(k: int, dist: Distribution, delta: float) -> tuple[float, float]:
    """(m_low, m_high) bracketing the waiting time around m* with confidence.

    Pr[wait <= m_low] <= delta and Pr[wait <= m_high] >= 1 - delta, where
    m_low = (delta/e) * m* and m_high = max(e**2, 2 log(1/delta)) * m*.
    """
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must be in (0, 1), got {delta!r}")
    m_star = critical_balls(k, dist)
    return (delta / math.e) * m_star, max(
        _E_SQUARED, 2.0 * math.log(1.0 / delta)
    ) * m_star


def sharp_wait_constant(k: int) -> float:
    """The best possible constant c_k in ||p||_k * E[wait] >= c_k.

    c_k = (k!)**(1/k) * Gamma(1 + 1/k), the uniform-distribution limit of
    ||p||_k * E[wait] as the number of bins grows.  Always exceeds k/e.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError("k must be a positive integer")
    value = math.exp(math.lgamma(k + 1) / k) * math.gamma(1.0 + 1.0 / k)
    assert value > k / math.e
    return value


def expected_wait_bounds(k: int, dist: Distribution) -> WaitBounds:
    """Closed-form bounds on the expected waiting time for a k-loaded bin.

    (1/e) * (k/(k+1)) * k/||p||_k  <=  E[wait]  <=  k/||p||_k.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError("k must be a positive integer")
    upper = critical_balls(k, dist)
    lower = upper * k / ((k + 1) * math.e)
    return WaitBounds(
        lower_expected=lower,
        upper_expected=upper,
        sharp_constant=sharp_wait_constant(k),
    )


def _subset_indices(subset, n: int) -> np.ndarray:
    idx = np.unique(np.asarray(list(subset), dtype=np.int64))
    if idx.size == 0:
        raise EmptySubsetError("bin subset must be nonempty")
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise IndexError(f"bin index out of range [0, {n})")
    return idx


def restricted_sandwich(inst: ProblemInstance, subset) -> BoundPair:
    """Probability sandwich for the max load within a subset of bins.

    The same two bounds apply with ||p||_k replaced by the k-norm of the
    sub-vector (not renormalized; the subset may carry mass < 1).  Bin
    indices are 0-based.
    """
    k = inst.integer_load
    idx = _subset_indices(subset, inst.dist.bin_count)
    sub = inst.dist.weights[idx]
    m = inst.balls
    lower = binom_upper_tail(m, vector_k_norm(sub, k), k)
    if m < k:
        upper = 0.0
    else:
        log_value = log_binomial_coeff(m, k) + log_power_sum(sub, k)
        upper = min(1.0, math.exp(min(0.0, log_value)))
    return BoundPair(lower=lower, upper=upper)


def integer_bracket(k: float) -> tuple[int, int]:
    """Integer loads (floor, ceil) bracketing a real solver output, both >= 1."""
    if not math.isfinite(k) or k < 1:
        raise DomainError(f"expected a real k >= 1, got {k!r}")
    return max(1, math.floor(k)), max(1, math.ceil(k))
