"""Seeded Monte Carlo engine for max-load frequencies and waiting times.

Reproducibility discipline: trial t draws from its own Philox substream
keyed by (seed, t), so results are a pure function of (instance, config)
regardless of chunking or thread count, and a run with more balls extends
each trial's ball sequence instead of reshuffling it (common random
numbers: per-trial max loads are coupled monotonically in m).

Thread count comes from the BALLBINS_THREADS environment variable when set
(a positive integer), otherwise the CPU count; trials are partitioned into
disjoint ranges whose results land in disjoint output slices, so
aggregation is order-independent.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import _kernels
from .core import Distribution, ProblemInstance, k_norm
from .errors import DomainError

__all__ = [
    "SimConfig",
    "SimEstimate",
    "WaitingTimes",
    "AliasSampler",
    "build_sampler",
    "sim_max_load",
    "sim_max_load_samples",
    "sim_waiting_time",
    "wilson_interval",
    "z_for_confidence",
    "thread_count",
]

# Two-sided 99.9% normal quantile; default width for reported intervals.
DEFAULT_Z = 3.2905267314919255

_CHUNK_DOUBLES = 4_000_000


@dataclass(frozen=True)
class SimConfig:
    """Trial count, 64-bit seed, and optional per-trial ball cap."""

    trials: int
    seed: int = 0
    cap: int | None = None

    def __post_init__(self):
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise DomainError("trials must be a positive integer")
        if not isinstance(self.seed, (int, np.integer)) or not (
            0 <= self.seed < 2**64
        ):
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.cap is not None and self.cap < 1:
            raise DomainError("cap must be a positive integer when given")


@dataclass(frozen=True)
class SimEstimate:
    """Empirical frequency with its Wilson score interval."""

    successes: int
    trials: int
    frequency: float
    wilson_low: float
    wilson_high: float
    z: float


@dataclass(frozen=True)
class WaitingTimes:
    """Waiting-time samples; trials that exceeded the cap are counted, not
    silently folded into the sample vector."""

    values: np.ndarray
    censored: int
    cap: int
    trials: int


class AliasSampler:
    """O(1)-per-draw sampler for a discrete distribution (Vose tables)."""

    def __init__(self, dist: Distribution):
        n = dist.bin_count
        scaled = dist.weights * n
        prob = np.ones(n, dtype=np.float64)
        alias = np.arange(n, dtype=np.int64)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        scaled = scaled.copy()
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)
        prob.setflags(write=False)
        alias.setflags(write=False)
        self.prob = prob
        self.alias = alias
        self.n = n

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` bins, consuming two uniforms per draw."""
        u = gen.random(2 * size)
        return _map_flat(u, self.prob, self.alias)


def _map_flat(u: np.ndarray, prob: np.ndarray, alias: np.ndarray) -> np.ndarray:
    n = prob.shape[0]
    idx = (u[0::2] * n).astype(np.int64)
    np.minimum(idx, n - 1, out=idx)
    return np.where(u[1::2] < prob[idx], idx, alias[idx])


def build_sampler(dist: Distribution) -> AliasSampler:
    """Build the alias tables for ``dist``."""
    return AliasSampler(dist)


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """The Philox substream for one trial: key = seed * 2**64 + trial."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) + trial))


def thread_count() -> int:
    env = os.environ.get("BALLBINS_THREADS")
    if env:
        value = int(env)
        if value < 1:
            raise DomainError("BALLBINS_THREADS must be a positive integer")
        return value
    return os.cpu_count() or 1


def _run_partitioned(trials: int, worker, max_chunk: int) -> None:
    """Run worker(start, stop) over a disjoint partition of range(trials)."""
    spans = [
        (start, min(start + max_chunk, trials))
        for start in range(0, trials, max_chunk)
    ]
    threads = min(thread_count(), len(spans))
    if threads <= 1:
        for start, stop in spans:
            worker(start, stop)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda span: worker(*span), spans))


def sim_max_load_samples(inst: ProblemInstance, cfg: SimConfig) -> np.ndarray:
    """Per-trial maximum load after ``inst.balls`` throws (int64, one per
    trial, in trial order)."""
    m = inst.balls
    sampler = build_sampler(inst.dist)
    out = np.zeros(cfg.trials, dtype=np.int64)
    if m == 0:
        return out

    def worker(start: int, stop: int) -> None:
        u = np.empty((stop - start, 2 * m), dtype=np.float64)
        for t in range(start, stop):
            u[t - start] = trial_generator(cfg.seed, t).random(2 * m)
        _kernels.max_loads(u, sampler.prob, sampler.alias, out[start:stop])

    _run_partitioned(cfg.trials, worker, max(1, _CHUNK_DOUBLES // (2 * m)))
    return out


def sim_max_load(
    inst: ProblemInstance, cfg: SimConfig, z: float = DEFAULT_Z
) -> SimEstimate:
    """Empirical frequency of a k-loaded bin after m throws."""
    k = inst.integer_load
    maxes = sim_max_load_samples(inst, cfg)
    successes = int((maxes >= k).sum())
    low, high = wilson_interval(successes, cfg.trials, z)
    return SimEstimate(
        successes=successes,
        trials=cfg.trials,
        frequency=successes / cfg.trials,
        wilson_low=low,
        wilson_high=high,
        z=z,
    )


def default_cap(k: int, dist: Distribution) -> int:
    """Default waiting-time cap: 100x the concentration point k/||p||_k,
    far enough out that Pr[wait > cap] <= 1e-9 for every k >= 1."""
    return int(math.ceil(100.0 * k / k_norm(dist, k)))


def sim_waiting_time(k: int, dist: Distribution, cfg: SimConfig) -> WaitingTimes:
    """Sample the index of the ball that first brings some bin to load k.

    Balls are drawn in blocks from each trial's substream until a bin
    reaches k or the cap is hit; capped trials are reported in ``censored``.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError("k must be a positive integer")
    cap = cfg.cap if cfg.cap is not None else default_cap(k, dist)
    sampler = build_sampler(dist)
    n = dist.bin_count
    block = min(cap, max(128, 2 * int(math.ceil(k / k_norm(dist, k)))))
    raw = np.empty(cfg.trials, dtype=np.int64)

    def worker(start: int, stop: int) -> None:
        for t in range(start, stop):
            gen = trial_generator(cfg.seed, t)
            loads = np.zeros(n, dtype=np.int64)
            thrown = 0
            result = -1
            while thrown < cap:
                b = min(block, cap - thrown)
                u = gen.random(2 * b)
                hit = _kernels.waiting_scan(
                    u, sampler.prob, sampler.alias, loads, k, thrown
                )
                if hit > 0:
                    result = hit
                    break
                thrown += b
            raw[t] = result

    _run_partitioned(cfg.trials, worker, max(1, cfg.trials // 64 + 1))
    censored = int((raw < 0).sum())
    return WaitingTimes(
        values=raw[raw > 0], censored=censored, cap=cap, trials=cfg.trials
    )


def wilson_interval(successes: int, trials: int, z: float) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Always contains successes/trials; endpoints are clamped to [0, 1].
    """
    if trials < 1:
        raise DomainError("trials must be a positive integer")
    if not 0 <= successes <= trials:
        raise DomainError("need 0 <= successes <= trials")
    if not (z > 0):
        raise DomainError("z must be positive")
    p_hat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p_hat + z2 / (2.0 * trials)) / denom
    half = (
        z
        * math.sqrt(p_hat * (1.0 - p_hat) / trials + z2 / (4.0 * trials * trials))
        / denom
    )
    # The score interval contains p_hat exactly; pin that against rounding.
    low = min(p_hat, max(0.0, center - half))
    high = max(p_hat, min(1.0, center + half))
    return low, high


def z_for_confidence(confidence: float) -> float:
    """Two-sided normal quantile for a confidence level in (0, 1)."""
    if not (0.0 < confidence < 1.0):
        raise DomainError("confidence must be in (0, 1)")
    return float(ndtri(0.5 + confidence / 2.0))
