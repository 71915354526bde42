"""Scalar primitives for balls-into-bins analysis.

Everything here is a pure function of its inputs: validated probability
vectors, k-norms, log binomial coefficients, binomial tails in two forms,
Bernoulli KL divergence, and the load ratio

    rho = m * ||p||_k / k

which controls both sides of the max-load probability sandwich.  Quantities
at risk of underflow (``||p||_k**k`` for modest k already underflows double
precision) are computed in log space; public results are returned in linear
space clamped to their mathematical range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DomainError,
    NegativeWeightError,
    NonFiniteError,
    ZeroMassError,
)

__all__ = [
    "Distribution",
    "ProblemInstance",
    "Rho",
    "validate_distribution",
    "k_norm",
    "vector_k_norm",
    "rho",
    "log_binomial_coeff",
    "binom_upper_tail",
    "binom_cdf_negative_form",
    "kl_bernoulli",
]

# Direct construction tolerates only float-noise deviation from sum 1;
# arbitrary histograms go through validate_distribution() instead.
_SUM_TOLERANCE = 1e-9

# Below this value of k*log(min positive weight) the direct power sum
# would underflow, so the k-norm switches to log space.
_UNDERFLOW_LOG = -700.0


@dataclass(frozen=True, eq=False)
class Distribution:
    """A validated, normalized probability vector over bins.

    ``weights`` is a read-only float64 array summing to 1 (renormalized at
    construction; the pre-normalization deviation ``|1 - sum|`` is recorded).
    Direct construction requires the input to already be within 1e-9 of a
    probability vector; use :func:`validate_distribution` for raw histograms.
    """

    weights: np.ndarray
    bin_count: int
    normalization_deviation: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise DomainError("weights must be a nonempty 1-d vector")
        if not np.all(np.isfinite(w)):
            raise NonFiniteError("weights contain NaN or infinity")
        if np.any(w < 0):
            raise NegativeWeightError("weights contain a negative entry")
        total = math.fsum(w.tolist())
        if total <= 0:
            raise ZeroMassError("weights sum to zero")
        deviation = abs(1.0 - total)
        if deviation > _SUM_TOLERANCE:
            raise DomainError(
                f"weights sum to {total!r}, more than {_SUM_TOLERANCE} away from 1; "
                "use validate_distribution() to normalize a histogram"
            )
        if deviation != 0.0:
            w = w / total
        w = np.ascontiguousarray(w)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bin_count", int(w.size))
        object.__setattr__(
            self,
            "normalization_deviation",
            max(float(self.normalization_deviation), deviation),
        )

    @property
    def max_weight(self) -> float:
        return float(self.weights.max())

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        if n < 1:
            raise DomainError("need at least one bin")
        return validate_distribution(np.ones(n))

    @classmethod
    def linear(cls, n: int) -> "Distribution":
        """Weights proportional to (1, 2, ..., n)."""
        if n < 1:
            raise DomainError("need at least one bin")
        return validate_distribution(np.arange(1, n + 1, dtype=np.float64))

    @classmethod
    def zipf(cls, n: int, s: float) -> "Distribution":
        """Weights proportional to i**-s for i = 1..n."""
        if n < 1:
            raise DomainError("need at least one bin")
        if not math.isfinite(s):
            raise DomainError("zipf exponent must be finite")
        return validate_distribution(np.arange(1, n + 1, dtype=np.float64) ** -s)


def validate_distribution(raw_weights) -> Distribution:
    """Validate and normalize a raw nonnegative weight vector.

    Accepts arbitrary histograms (any positive total mass); records the
    pre-normalization deviation ``|1 - sum(raw)|`` on the result.

    Raises
    ------
    NegativeWeightError, ZeroMassError, NonFiniteError, DomainError
    """
    w = np.asarray(raw_weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise DomainError("weights must be a nonempty 1-d vector")
    if not np.all(np.isfinite(w)):
        raise NonFiniteError("weights contain NaN or infinity")
    if np.any(w < 0):
        raise NegativeWeightError("weights contain a negative entry")
    total = math.fsum(w.tolist())
    if total <= 0:
        raise ZeroMassError("weights sum to zero")
    deviation = abs(1.0 - total)
    return Distribution(
        weights=w / total, bin_count=w.size, normalization_deviation=deviation
    )


@dataclass(frozen=True)
class ProblemInstance:
    """(m balls, load threshold k, bin distribution).

    ``load`` may be any real >= 1; operations derived from the exact
    probability sandwich demand an integer load and raise DomainError
    otherwise, while the ratio-based operations accept real loads.
    """

    balls: int
    load: float
    dist: Distribution

    def __post_init__(self):
        if not isinstance(self.balls, (int, np.integer)) or self.balls < 0:
            raise DomainError("balls must be a nonnegative integer")
        load = float(self.load)
        if not math.isfinite(load) or load < 1:
            raise DomainError("load must be a real number >= 1")

    @property
    def integer_load(self) -> int:
        """The load as an int; DomainError if it is not integral."""
        load = float(self.load)
        if not load.is_integer():
            raise DomainError(f"operation requires an integer load, got {load!r}")
        return int(load)


@dataclass(frozen=True)
class Rho:
    """The load ratio m * ||p||_k / k, with its defining inputs."""

    value: float
    balls: int
    load: float

    def __float__(self) -> float:
        return self.value


def _positive_weights(weights: np.ndarray) -> np.ndarray:
    return weights[weights > 0]


def vector_k_norm(weights, k: float) -> float:
    """k-norm (sum w_i**k)**(1/k) of an arbitrary nonnegative vector.

    Uses a direct compensated power sum when no entry can underflow, and
    exp((1/k) * logsumexp(k * log w_i)) over the positive entries otherwise.
    The result is clamped to the mathematical range [max w, sum w].
    """
    if not (k >= 1):
        raise DomainError(f"k-norm requires k >= 1, got {k!r}")
    w = np.asarray(weights, dtype=np.float64)
    pos = _positive_weights(w)
    if pos.size == 0:
        return 0.0
    total = math.fsum(pos.tolist())
    if k == 1:
        return total
    w_max = float(pos.max())
    w_min = float(pos.min())
    if k * math.log(w_min) > _UNDERFLOW_LOG:
        s = math.fsum(float(x) ** k for x in pos)
        result = math.sqrt(s) if k == 2 else s ** (1.0 / k)
    else:
        result = math.exp(logsumexp(k * np.log(pos)) / k)
    return min(total, max(w_max, result))


def k_norm(dist: Distribution, k: float) -> float:
    """||p||_k of a probability vector; exactly 1 for k = 1."""
    if not (k >= 1):
        raise DomainError(f"k-norm requires k >= 1, got {k!r}")
    if k == 1:
        return 1.0
    return min(1.0, vector_k_norm(dist.weights, k))


def log_power_sum(weights, k: float) -> float:
    """log(sum_i w_i**k) over the positive entries; -inf for the zero vector."""
    pos = _positive_weights(np.asarray(weights, dtype=np.float64))
    if pos.size == 0:
        return -math.inf
    return float(logsumexp(k * np.log(pos)))


def rho(inst: ProblemInstance) -> Rho:
    """Load ratio m * ||p||_k / k for the instance (real load allowed)."""
    k = float(inst.load)
    value = inst.balls * k_norm(inst.dist, k) / k
    return Rho(value=value, balls=inst.balls, load=k)


def log_binomial_coeff(m: int, k: int) -> float:
    """log C(m, k) via log-gamma; -inf when k < 0 or k > m."""
    if k < 0 or k > m:
        return -math.inf
    if k == 0 or k == m:
        return 0.0
    return (
        math.lgamma(m + 1) - math.lgamma(k + 1) - math.lgamma(m - k + 1)
    )


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"success probability must be in [0, 1], got {alpha!r}")
    return alpha


def binom_upper_tail(m: int, alpha: float, k: int) -> float:
    """Pr[Binomial(m, alpha) >= k].

    Sums the tail with fewer probability mass directly (log-space terms,
    compensated summation) and derives the other side by complementation,
    so both tiny and near-one results keep full absolute accuracy.
    """
    alpha = _check_alpha(alpha)
    if m < 0:
        raise DomainError("m must be a nonnegative integer")
    if k <= 0:
        return 1.0
    if k > m:
        return 0.0
    if alpha == 0.0:
        return 0.0
    if alpha == 1.0:
        return 1.0
    log_a = math.log(alpha)
    log_b = math.log1p(-alpha)

    def log_pmf(j: int) -> float:
        return log_binomial_coeff(m, j) + j * log_a + (m - j) * log_b

    if k > m * alpha:
        tail = math.fsum(math.exp(log_pmf(j)) for j in range(k, m + 1))
    else:
        tail = 1.0 - math.fsum(math.exp(log_pmf(j)) for j in range(k))
    return min(1.0, max(0.0, tail))


def binom_cdf_negative_form(m: int, alpha: float, t: int) -> float:
    """Pr[Binomial(m, alpha) <= t] via the stopped-coin-flip identity.

    Evaluates (1-alpha)**(m-t) * sum_{j=0}^{t} C(m-t-1+j, j) * alpha**j,
    which counts the ways a sequence of flips halts once m - t tails have
    appeared.  Requires 0 <= t <= m - 1.
    """
    alpha = _check_alpha(alpha)
    if not (0 <= t <= m - 1):
        raise DomainError(f"t must be in [0, m-1], got t={t!r}, m={m!r}")
    if alpha == 0.0:
        return 1.0
    if alpha == 1.0:
        return 0.0
    log_a = math.log(alpha)
    log_b = math.log1p(-alpha)
    base = (m - t) * log_b
    total = math.fsum(
        math.exp(base + log_binomial_coeff(m - t - 1 + j, j) + j * log_a)
        for j in range(t + 1)
    )
    return min(1.0, max(0.0, total))


def kl_bernoulli(a: float, b: float) -> float:
    """KL divergence D(a || b) between Bernoulli(a) and Bernoulli(b).

    a may be 0 or 1 (the a*log(a) limits apply); b must be interior unless
    a == b, in which case the divergence is 0.
    """
    a = float(a)
    b = float(b)
    if not (0.0 <= a <= 1.0):
        raise DomainError(f"a must be in [0, 1], got {a!r}")
    if not (0.0 <= b <= 1.0):
        raise DomainError(f"b must be in [0, 1], got {b!r}")
    if b == 0.0 or b == 1.0:
        if a == b:
            return 0.0
        raise DomainError("divergence is infinite for b in {0, 1} with a != b")
    first = 0.0 if a == 0.0 else a * math.log(a / b)
    second = 0.0 if a == 1.0 else (1.0 - a) * math.log((1.0 - a) / (1.0 - b))
    return max(0.0, first + second)
