"""Monte Carlo engine tests: sampler fidelity, reproducibility, coupling,
duality with waiting times, and Wilson intervals."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from ballbins import (
    Distribution,
    DomainError,
    ProblemInstance,
    SimConfig,
    build_sampler,
    sim_max_load,
    sim_max_load_samples,
    sim_waiting_time,
    validate_distribution,
    wilson_interval,
    z_for_confidence,
)
from ballbins.simulate import trial_generator


def inst(m, k, dist):
    return ProblemInstance(balls=m, load=k, dist=dist)


class TestSampler:
    def test_point_mass(self):
        sampler = build_sampler(validate_distribution([0.0, 1.0, 0.0]))
        bins = sampler.sample(trial_generator(0, 0), 1000)
        assert np.all(bins == 1)

    def test_uniform_frequencies(self):
        n, draws = 16, 1_000_000
        sampler = build_sampler(Distribution.uniform(n))
        bins = sampler.sample(trial_generator(1, 0), draws)
        counts = np.bincount(bins, minlength=n)
        sigma = math.sqrt(draws * (1 / n) * (1 - 1 / n))
        assert np.all(np.abs(counts - draws / n) < 4 * sigma)

    def test_linear_chi_square(self):
        draws = 1_000_000
        d = validate_distribution([1, 2, 3])
        sampler = build_sampler(d)
        bins = sampler.sample(trial_generator(2, 0), draws)
        counts = np.bincount(bins, minlength=3)
        _, p_value = chisquare(counts, draws * d.weights)
        assert p_value > 1e-6

    def test_tables_are_proper(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(1, 40))
            d = validate_distribution(rng.dirichlet(np.ones(n)))
            s = build_sampler(d)
            # table identity: p_i = (prob_i + sum_{j: alias_j = i} (1 - prob_j)) / n
            recovered = s.prob.copy()
            for j in range(n):
                if s.alias[j] != j:
                    recovered[s.alias[j]] += 1.0 - s.prob[j]
            np.testing.assert_allclose(recovered / n, d.weights, atol=1e-12)


class TestSimMaxLoad:
    def test_impossible_load(self):
        est = sim_max_load(inst(1, 2, Distribution.uniform(3)), SimConfig(500, 7))
        assert est.successes == 0 and est.frequency == 0.0

    def test_single_bin_certain(self):
        est = sim_max_load(inst(4, 3, Distribution.uniform(1)), SimConfig(500, 7))
        assert est.frequency == 1.0

    def test_zero_balls(self):
        est = sim_max_load(inst(0, 1, Distribution.uniform(3)), SimConfig(100, 7))
        assert est.frequency == 0.0

    def test_matches_exact_within_wilson(self):
        est = sim_max_load(
            inst(3, 2, Distribution.uniform(3)),
            SimConfig(trials=100_000, seed=11),
            z=z_for_confidence(0.999),
        )
        assert est.wilson_low <= 7 / 9 <= est.wilson_high

    def test_deterministic(self):
        cfg = SimConfig(trials=4000, seed=99)
        i = inst(6, 2, validate_distribution([1, 2, 3, 4]))
        a = sim_max_load(i, cfg)
        b = sim_max_load(i, cfg)
        assert a == b

    def test_thread_count_does_not_change_results(self, monkeypatch):
        i = inst(9, 3, Distribution.uniform(5))
        cfg = SimConfig(trials=3000, seed=5)
        monkeypatch.setenv("BALLBINS_THREADS", "1")
        serial = sim_max_load_samples(i, cfg)
        monkeypatch.setenv("BALLBINS_THREADS", "4")
        threaded = sim_max_load_samples(i, cfg)
        assert np.array_equal(serial, threaded)

    def test_monotone_coupling_in_m(self):
        # Same seed means trial t's balls for smaller m are a prefix.
        d = validate_distribution([0.5, 0.25, 0.25])
        samples = [
            sim_max_load_samples(inst(m, 1, d), SimConfig(trials=2000, seed=3))
            for m in (2, 5, 11, 20)
        ]
        for a, b in zip(samples, samples[1:]):
            assert np.all(a <= b)


class TestSimWaitingTime:
    def test_point_mass(self):
        wt = sim_waiting_time(3, Distribution.uniform(1), SimConfig(200, 1))
        assert wt.censored == 0
        assert np.all(wt.values == 3)

    def test_k_one_is_first_ball(self):
        wt = sim_waiting_time(1, Distribution.uniform(10), SimConfig(200, 1))
        assert np.all(wt.values == 1)

    def test_birthday_mean(self):
        wt = sim_waiting_time(2, Distribution.uniform(365), SimConfig(20_000, 17))
        assert wt.censored == 0
        mean = wt.values.mean()
        se = wt.values.std(ddof=1) / math.sqrt(wt.values.size)
        assert abs(mean - 24.616585894598854) < 4 * se

    def test_censoring_reported(self):
        wt = sim_waiting_time(
            2, Distribution.uniform(50), SimConfig(trials=300, seed=2, cap=1)
        )
        assert wt.censored == 300
        assert wt.values.size == 0
        assert wt.cap == 1

    def test_duality_with_max_load(self):
        # Shared substreams make Pr[W <= m] and Pr[M_m >= k] agree exactly,
        # trial by trial.
        d = validate_distribution([3, 1, 1, 1, 2])
        for m, k in [(4, 2), (9, 3)]:
            est = sim_max_load(inst(m, k, d), SimConfig(trials=4000, seed=23))
            wt = sim_waiting_time(k, d, SimConfig(trials=4000, seed=23))
            assert int((wt.values <= m).sum()) == est.successes

    def test_deterministic(self):
        wt1 = sim_waiting_time(2, Distribution.uniform(30), SimConfig(1000, 9))
        wt2 = sim_waiting_time(2, Distribution.uniform(30), SimConfig(1000, 9))
        assert np.array_equal(wt1.values, wt2.values)

    def test_multi_block_trials(self):
        # A cap above the block size exercises carried loads across blocks.
        wt = sim_waiting_time(
            40, Distribution.uniform(2), SimConfig(trials=50, seed=13)
        )
        assert wt.censored == 0
        assert np.all(wt.values >= 40)


class TestSimConfig:
    def test_validation(self):
        with pytest.raises(DomainError):
            SimConfig(trials=0, seed=1)
        with pytest.raises(DomainError):
            SimConfig(trials=10, seed=-1)
        with pytest.raises(DomainError):
            SimConfig(trials=10, seed=2**64)
        with pytest.raises(DomainError):
            SimConfig(trials=10, seed=1, cap=0)


class TestWilsonInterval:
    def test_zero_successes(self):
        low, high = wilson_interval(0, 100, 3.0)
        assert low == 0.0 and 0.0 < high < 1.0

    def test_all_successes(self):
        low, high = wilson_interval(100, 100, 3.0)
        assert high == 1.0 and 0.0 < low < 1.0

    def test_frozen_midpoint(self):
        low, high = wilson_interval(50, 100, 1.96)
        assert low == pytest.approx(0.40382982859014053, abs=1e-12)
        assert high == pytest.approx(0.5961701714098595, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            wilson_interval(5, 0, 1.0)
        with pytest.raises(DomainError):
            wilson_interval(6, 5, 1.0)
        with pytest.raises(DomainError):
            wilson_interval(1, 5, 0.0)

    @settings(max_examples=150, deadline=None)
    @given(
        st.integers(min_value=1, max_value=10_000),
        st.floats(min_value=0.01, max_value=10.0),
        st.data(),
    )
    def test_contains_the_point_estimate(self, trials, z, data):
        successes = data.draw(st.integers(min_value=0, max_value=trials))
        low, high = wilson_interval(successes, trials, z)
        assert 0.0 <= low <= successes / trials <= high <= 1.0


class TestZForConfidence:
    def test_standard_values(self):
        assert z_for_confidence(0.95) == pytest.approx(1.959963984540054, rel=1e-12)
        assert z_for_confidence(0.999) == pytest.approx(3.2905267314919255, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            z_for_confidence(1.0)
