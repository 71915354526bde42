"""Exact ground truth at desk scale.

Pr[every bin load < k] after m throws equals

    m! * [x^m]  prod_i  q_k(p_i * x),      q_k(t) = sum_{i<k} t^i / i!

because the coefficient extraction enumerates all count vectors whose
entries stay below k, each weighted with its multinomial probability.  The
polynomial product is carried out in high-precision floating point (all
coefficients are nonnegative, so the assembly is subtraction-free) and is
cross-checkable against brute-force enumeration of all n**m placements.

The same machinery gives the exact law restricted to a subset of bins
(complement bins contribute their full exponential series) and, via the
classical integral representation

    E[wait] = integral_0^inf  prod_i q_k(p_i t) e^(-p_i t)  dt,

a certified quadrature for the expected waiting time until a k-loaded bin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, logsumexp

from .core import Distribution, ProblemInstance, k_norm, vector_k_norm
from .errors import (
    ConvergenceError,
    DomainError,
    EmptySubsetError,
    TooLargeError,
)

__all__ = [
    "LoadPolynomial",
    "ExactResult",
    "MAX_EXACT_BALLS",
    "MAX_EXACT_BINS",
    "MAX_ENUM_OUTCOMES",
    "load_polynomial",
    "exact_pr_max_geq",
    "exact_restricted",
    "enumerate_small",
    "enumerate_max_load_pmf",
    "collapse_step",
    "expected_wait_quadrature",
]

MAX_EXACT_BALLS = 200
MAX_EXACT_BINS = 10_000
MAX_ENUM_OUTCOMES = 10_000_000

# >= 50 decimal digits; doubled on a failed range check (which the
# subtraction-free assembly should never trigger).
DEFAULT_PRECISION_BITS = 192
_ENUM_CHUNK = 1_000_000


@dataclass(frozen=True)
class LoadPolynomial:
    """Truncated coefficients of prod_i q_k(p_i x), all nonnegative.

    ``coeffs[j]`` is the coefficient of x^j; ``m! * coeffs[m]`` is the
    probability that after m throws every bin load is below ``load``.
    """

    coeffs: tuple
    load: int
    precision_bits: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def pr_all_below(self, m: int):
        """Pr[all loads < load] after m throws, as an mpmath float."""
        if not 0 <= m <= self.degree:
            raise DomainError(f"m must be in [0, {self.degree}], got {m!r}")
        with mp.workprec(self.precision_bits):
            value = mp.factorial(m) * self.coeffs[m]
        return value

    def pr_max_geq(self, m: int):
        """Pr[some load >= load] after m throws, as an mpmath float."""
        with mp.workprec(self.precision_bits):
            return 1 - self.pr_all_below(m)


@dataclass(frozen=True)
class ExactResult:
    """An exact probability with the method and working precision used."""

    probability: mp.mpf
    method: str
    precision_bits: int

    def __float__(self) -> float:
        return float(self.probability)


def _truncated_mul(a: list, b: list, degree: int) -> list:
    out = [mp.mpf(0)] * (min(degree, len(a) + len(b) - 2) + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        top = min(len(b), len(out) - i)
        for j in range(top):
            out[i + j] += ai * b[j]
    return out


def _poly_pow(base: list, exponent: int, degree: int) -> list:
    result = [mp.mpf(1)]
    square = base
    e = exponent
    while e:
        if e & 1:
            result = _truncated_mul(result, square, degree)
        e >>= 1
        if e:
            square = _truncated_mul(square, square, degree)
    return result


def _factor_coeffs(p: mp.mpf, load: int, degree: int) -> list:
    coeffs = [mp.mpf(1)]
    for j in range(1, min(load - 1, degree) + 1):
        coeffs.append(coeffs[-1] * p / j)
    return coeffs


def _assemble(weights: np.ndarray, load: int, degree: int) -> list:
    """prod over bins of q_load(p_i x), truncated; identical weights are
    grouped and raised by binary powering (a fixed, deterministic order)."""
    values, counts = np.unique(weights, return_counts=True)
    acc = [mp.mpf(1)]
    for value, count in zip(values, counts):
        if value == 0.0:
            continue
        factor = _factor_coeffs(mp.mpf(float(value)), load, degree)
        acc = _truncated_mul(acc, _poly_pow(factor, int(count), degree), degree)
    if len(acc) < degree + 1:
        acc = acc + [mp.mpf(0)] * (degree + 1 - len(acc))
    return acc


def load_polynomial(
    dist: Distribution,
    load: int,
    degree: int,
    precision_bits: int = DEFAULT_PRECISION_BITS,
) -> LoadPolynomial:
    """Build the truncated generating polynomial for loads below ``load``."""
    if load < 1:
        raise DomainError("load must be >= 1")
    if degree < 0:
        raise DomainError("degree must be >= 0")
    with mp.workprec(precision_bits):
        coeffs = _assemble(dist.weights, load, degree)
    return LoadPolynomial(
        coeffs=tuple(coeffs), load=load, precision_bits=precision_bits
    )


def _check_limits(inst: ProblemInstance) -> int:
    k = inst.integer_load
    if inst.balls > MAX_EXACT_BALLS:
        raise TooLargeError(
            f"exact computation limited to m <= {MAX_EXACT_BALLS}, got {inst.balls}"
        )
    if inst.dist.bin_count > MAX_EXACT_BINS:
        raise TooLargeError(
            f"exact computation limited to n <= {MAX_EXACT_BINS}, "
            f"got {inst.dist.bin_count}"
        )
    return k


def exact_pr_max_geq(inst: ProblemInstance) -> ExactResult:
    """Exact Pr[max load >= k] by coefficient extraction."""
    k = _check_limits(inst)
    m = inst.balls
    precision = DEFAULT_PRECISION_BITS
    for _ in range(3):
        with mp.workprec(precision):
            coeffs = _assemble(inst.dist.weights, k, m)
            below = mp.factorial(m) * coeffs[m]
            if -mp.mpf(2) ** -40 <= below <= 1 + mp.mpf(2) ** -40:
                prob = min(mp.mpf(1), max(mp.mpf(0), 1 - below))
                return ExactResult(
                    probability=prob, method="egf", precision_bits=precision
                )
        precision *= 2
    raise ConvergenceError(
        f"coefficient extraction failed a range check at {precision // 2} bits"
    )


def exact_restricted(inst: ProblemInstance, subset) -> ExactResult:
    """Exact Pr[max load over a subset of bins >= k].

    Subset bins contribute truncated factors q_k(p_i x); every other bin
    contributes its full series, which multiply into exp(c*x) with c the
    complement mass.  Bin indices are 0-based.
    """
    k = _check_limits(inst)
    m = inst.balls
    n = inst.dist.bin_count
    idx = np.unique(np.asarray(list(subset), dtype=np.int64))
    if idx.size == 0:
        raise EmptySubsetError("bin subset must be nonempty")
    if idx[0] < 0 or idx[-1] >= n:
        raise IndexError(f"bin index out of range [0, {n})")
    mask = np.zeros(n, dtype=bool)
    mask[idx] = True
    sub_weights = inst.dist.weights[mask]
    complement = inst.dist.weights[~mask]
    precision = DEFAULT_PRECISION_BITS
    for _ in range(3):
        with mp.workprec(precision):
            poly = _assemble(sub_weights, k, m)
            c = mp.fsum(mp.mpf(float(w)) for w in complement)
            # [x^m] of poly(x) * exp(c x), times m!.
            exp_term = mp.mpf(1)  # c**j / j! at j = 0
            below = poly[m] * exp_term
            for j in range(1, m + 1):
                exp_term = exp_term * c / j
                below += poly[m - j] * exp_term
            below *= mp.factorial(m)
            if -mp.mpf(2) ** -40 <= below <= 1 + mp.mpf(2) ** -40:
                prob = min(mp.mpf(1), max(mp.mpf(0), 1 - below))
                return ExactResult(
                    probability=prob, method="egf", precision_bits=precision
                )
        precision *= 2
    raise ConvergenceError(
        f"restricted extraction failed a range check at {precision // 2} bits"
    )


def _enumeration_outcomes(n: int, m: int):
    """Yield (digits, chunk_size) blocks covering all n**m placements."""
    total = n**m
    powers = n ** np.arange(m, dtype=np.int64)
    for start in range(0, total, _ENUM_CHUNK):
        stop = min(start + _ENUM_CHUNK, total)
        block = np.arange(start, stop, dtype=np.int64)
        yield (block[:, None] // powers) % n


def _max_multiplicity(digits: np.ndarray) -> np.ndarray:
    """Per-row maximum multiplicity of any value (rows are ball sequences)."""
    m = digits.shape[1]
    s = np.sort(digits, axis=1)
    best = np.ones(digits.shape[0], dtype=np.int64)
    run = np.ones(digits.shape[0], dtype=np.int64)
    for c in range(m - 1):
        run = np.where(s[:, c + 1] == s[:, c], run + 1, 1)
        np.maximum(best, run, out=best)
    return best


def enumerate_small(inst: ProblemInstance, subset=None) -> ExactResult:
    """Pr[max load >= k] by summing all n**m placements (n**m <= 10**7).

    Entirely independent of the coefficient-extraction route: outcome
    probabilities are plain float64 products accumulated chunk-wise with
    compensated summation.  ``subset`` (0-based) restricts which bins the
    maximum ranges over.
    """
    k = inst.integer_load
    m = inst.balls
    n = inst.dist.bin_count
    if n**m > MAX_ENUM_OUTCOMES:
        raise TooLargeError(
            f"enumeration limited to n**m <= {MAX_ENUM_OUTCOMES}, got {n}**{m}"
        )
    if subset is not None:
        idx = np.unique(np.asarray(list(subset), dtype=np.int64))
        if idx.size == 0:
            raise EmptySubsetError("bin subset must be nonempty")
        if idx[0] < 0 or idx[-1] >= n:
            raise IndexError(f"bin index out of range [0, {n})")
    else:
        idx = None
    if m == 0 or m < k:
        return ExactResult(probability=mp.mpf(0), method="enumeration",
                           precision_bits=53)
    w = inst.dist.weights
    partial = []
    for digits in _enumeration_outcomes(n, m):
        probs = np.ones(digits.shape[0])
        for c in range(m):
            probs *= w[digits[:, c]]
        if idx is None:
            maxc = _max_multiplicity(digits)
        else:
            maxc = np.zeros(digits.shape[0], dtype=np.int64)
            for b in idx:
                counts = (digits == b).sum(axis=1)
                np.maximum(maxc, counts, out=maxc)
        partial.append(float(probs[maxc >= k].sum()))
    return ExactResult(
        probability=mp.mpf(math.fsum(partial)), method="enumeration",
        precision_bits=53,
    )


def enumerate_max_load_pmf(dist: Distribution, m: int) -> np.ndarray:
    """Exact pmf of the maximum load after m throws, by full enumeration.

    Returns an array of length m + 1 with Pr[max load = j] at index j.
    """
    n = dist.bin_count
    if n**m > MAX_ENUM_OUTCOMES:
        raise TooLargeError(
            f"enumeration limited to n**m <= {MAX_ENUM_OUTCOMES}, got {n}**{m}"
        )
    if m == 0:
        out = np.zeros(1)
        out[0] = 1.0
        return out
    w = dist.weights
    pmf = np.zeros(m + 1)
    for digits in _enumeration_outcomes(n, m):
        probs = np.ones(digits.shape[0])
        for c in range(m):
            probs *= w[digits[:, c]]
        maxc = _max_multiplicity(digits)
        pmf += np.bincount(maxc, weights=probs, minlength=m + 1)
    return pmf


def collapse_step(q: Distribution, j: int, load: int) -> Distribution:
    """Merge adjacent bins (j, j+1) into (residual, k-norm) masses.

    The pair's mass is redistributed so that bin j+1 carries the pair's
    k-norm and bin j the remainder; total mass and all other bins are
    unchanged, and the new bin j+1 dominates both originals.  Iterating
    j = 0..n-2 concentrates ||q||_k into the final bin.  0-based j.
    """
    if not isinstance(load, (int, np.integer)) or load < 1:
        raise DomainError("load must be a positive integer")
    n = q.bin_count
    if not 0 <= j <= n - 2:
        raise IndexError(f"pair index must be in [0, {n - 2}], got {j!r}")
    w = np.array(q.weights)
    pair_norm = vector_k_norm(w[j : j + 2], load)
    w[j], w[j + 1] = max(0.0, w[j] + w[j + 1] - pair_norm), pair_norm
    return Distribution(weights=w, bin_count=n)


def _log_qk(z: np.ndarray, load: int) -> np.ndarray:
    """log q_load(z) elementwise for z >= 0 (q is the truncated exp series)."""
    out = np.zeros_like(z)
    pos = z > 0
    if np.any(pos):
        i = np.arange(load, dtype=np.float64)
        terms = i * np.log(z[pos])[:, None] - gammaln(i + 1.0)
        out[pos] = logsumexp(terms, axis=1)
    return out


def expected_wait_quadrature(
    load: int, dist: Distribution, tol: float = 1e-6
) -> float:
    """E[wait] for a k-loaded bin by certified adaptive quadrature.

    Integrates exp(sum_i log q_k(p_i t) - p_i t) over geometric segments
    until the remaining tail is provably below 1e-9.  The tail certificate
    freezes every factor except the heaviest bin's at its value at the
    cutoff (each factor is a decreasing Poisson cdf), leaving a single
    factor whose integral has the closed form
    sum_{j<k} (k - j) e^(-x) x^j / j! with x = p_max * T.
    """
    if not isinstance(load, (int, np.integer)) or load < 2:
        raise DomainError("quadrature requires an integer load >= 2")
    k = int(load)
    positive = dist.weights[dist.weights > 0]
    values, counts = np.unique(positive, return_counts=True)
    counts = counts.astype(np.float64)
    p_max = float(values[-1])

    def log_integrand(t: float) -> float:
        if t <= 0.0:
            return 0.0
        z = values * t
        return float(np.dot(counts, _log_qk(z, k) - z))

    def integrand(t: float) -> float:
        return math.exp(log_integrand(t))

    def log_tail_bound(t_cut: float) -> float:
        x = p_max * t_cut
        # log of the single-factor value q_k(x) e^-x at the cutoff.
        log_f1 = float(_log_qk(np.array([x]), k)[0]) - x
        j = np.arange(k, dtype=np.float64)
        log_closed = float(
            logsumexp(np.log(k - j) - x + j * math.log(x) - gammaln(j + 1.0))
        )
        return log_integrand(t_cut) - log_f1 + log_closed - math.log(p_max)

    scale = k / k_norm(dist, k)
    total = 0.0
    total_err = 0.0
    lo, hi = 0.0, scale
    log_target = math.log(1e-9)
    for _ in range(200):
        value, err = quad(integrand, lo, hi, epsabs=1e-10, epsrel=1e-10, limit=200)
        total += value
        total_err += err
        if log_tail_bound(hi) <= log_target:
            if total_err + 1e-9 > tol:
                raise ConvergenceError(
                    f"quadrature error {total_err!r} exceeds tolerance {tol!r}"
                )
            return total
        lo, hi = hi, 2.0 * hi
    raise ConvergenceError(
        "tail bound did not certify 1e-9 within 200 geometric segments"
    )
