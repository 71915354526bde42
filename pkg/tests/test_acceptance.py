"""Acceptance suite.

Each test runs one verification criterion end to end at its stated
tolerance, asserts it passes within its runtime budget, and prints a
one-line pass/fail summary (visible with ``pytest -s`` or in captured
output).  The criterion logic lives in ballbins.selfcheck so the CLI
``check`` command runs exactly the same code.
"""

from ballbins import selfcheck

SEED = 0


def run(check, budget_seconds, *args):
    result = check(*args)
    status = "PASS" if result.passed else "FAIL"
    print(
        f"ACCEPTANCE {result.name}: {status} "
        f"({result.seconds:.1f}s / budget {budget_seconds}s) {result.detail}"
    )
    assert result.passed, result.detail
    assert result.seconds < budget_seconds, (
        f"{result.name} took {result.seconds:.1f}s, budget {budget_seconds}s"
    )
    return result


def test_01_sandwich_brackets_exact_on_grid():
    run(selfcheck.check_sandwich_grid, 30)


def test_02_negative_binomial_cdf_identity():
    run(selfcheck.check_tail_identity, 5)


def test_03_uniform_figure_reproduction():
    run(selfcheck.check_figure_uniform, 120, SEED)


def test_04_distribution_insensitivity():
    run(selfcheck.check_figure_insensitivity, 120, SEED)


def test_05_small_rho_tightness():
    run(selfcheck.check_small_rho_tightness, 60)


def test_06_solver_fixed_points():
    run(selfcheck.check_solver_fixed_points, 5)


def test_07_expected_waiting_time():
    run(selfcheck.check_expected_wait, 120, SEED)


def test_08_ratio_bound_consistency():
    run(selfcheck.check_ratio_bound_consistency, 10)


def test_09_restricted_bins():
    run(selfcheck.check_restricted_bins, 30)


def test_10_collapse_monotonicity():
    run(selfcheck.check_collapse_monotonicity, 30)


def test_11_sweep_determinism():
    run(selfcheck.check_sweep_determinism, 120, SEED)
