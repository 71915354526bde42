"""Bounds, exact oracles, and seeded simulation for balls-into-bins loads.

Throw m balls independently into bins with distribution p.  This package
computes rigorous two-sided bounds on the probability of a k-loaded bin,
the phase-transition thresholds of the load ratio rho = m * ||p||_k / k,
expected-waiting-time brackets, exact small-instance answers, and seeded
Monte Carlo estimates with Wilson confidence intervals.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundPair,
    PhaseThresholds,
    RegimeBound,
    WaitBounds,
    critical_balls,
    critical_load,
    expected_wait_bounds,
    integer_bracket,
    load_interval,
    max_load_lower,
    max_load_upper,
    phase_thresholds,
    restricted_sandwich,
    rho_tail_lower,
    rho_tail_upper,
    sandwich,
    sharp_wait_constant,
    wait_interval,
)
from .core import (
    Distribution,
    ProblemInstance,
    Rho,
    binom_cdf_negative_form,
    binom_upper_tail,
    k_norm,
    kl_bernoulli,
    log_binomial_coeff,
    rho,
    validate_distribution,
    vector_k_norm,
)
from .errors import (
    BallBinsError,
    BracketError,
    ConvergenceError,
    DistSpecError,
    DomainError,
    EmptySubsetError,
    NegativeWeightError,
    NonFiniteError,
    TooLargeError,
    ZeroMassError,
)
from .oracle import (
    ExactResult,
    LoadPolynomial,
    collapse_step,
    enumerate_max_load_pmf,
    enumerate_small,
    exact_pr_max_geq,
    exact_restricted,
    expected_wait_quadrature,
    load_polynomial,
)
from .simulate import (
    AliasSampler,
    SimConfig,
    SimEstimate,
    WaitingTimes,
    build_sampler,
    sim_max_load,
    sim_max_load_samples,
    sim_waiting_time,
    wilson_interval,
    z_for_confidence,
)
from .sweep import SweepRow, build_sweep, write_csv

__all__ = [name for name in dir() if not name.startswith("_")]
