"""Figure-style data sweeps: bounds plus empirical frequency along a rho grid.

For a fixed load k the grid targets rho values evenly spaced in
(0, rho_max]; each target is converted to an integer ball count
m = round(rho * k / ||p||_k), duplicates dropped, and the reported rho is
recomputed from the actual m so the x-axis reflects the instance that ran.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .bounds import max_load_lower, max_load_upper
from .core import Distribution, ProblemInstance, k_norm
from .errors import DomainError
from .oracle import exact_pr_max_geq
from .simulate import SimConfig, sim_max_load, z_for_confidence

__all__ = ["SweepRow", "CSV_HEADER", "sweep_ball_counts", "build_sweep", "write_csv"]

CSV_HEADER = (
    "dist", "k", "m", "rho", "lower", "upper",
    "empirical", "wilson_low", "wilson_high", "exact",
)


@dataclass(frozen=True)
class SweepRow:
    """One grid point of a sweep."""

    dist: str
    k: int
    m: int
    rho: float
    lower: float
    upper: float
    empirical: float | None = None
    wilson_low: float | None = None
    wilson_high: float | None = None
    exact: float | None = None


def sweep_ball_counts(
    dist: Distribution, k: int, rho_max: float, points: int
) -> list[int]:
    """Deduplicated integer ball counts whose rho values cover (0, rho_max]."""
    if points < 2:
        raise DomainError("a sweep needs at least 2 points")
    if not (rho_max > 0):
        raise DomainError("rho-max must be positive")
    norm = k_norm(dist, k)
    ms: list[int] = []
    for i in range(1, points + 1):
        m = round(rho_max * i / points * k / norm)
        if m >= 1 and (not ms or m != ms[-1]):
            ms.append(m)
    return ms


def build_sweep(
    dist: Distribution,
    label: str,
    k: int,
    rho_max: float,
    points: int,
    trials: int,
    seed: int,
    exact: bool = False,
    confidence: float = 0.999,
) -> list[SweepRow]:
    """Build the sweep dataset for one load value."""
    norm = k_norm(dist, k)
    z = z_for_confidence(confidence)
    rows = []
    for m in sweep_ball_counts(dist, k, rho_max, points):
        inst = ProblemInstance(balls=m, load=k, dist=dist)
        est = sim_max_load(inst, SimConfig(trials=trials, seed=seed), z=z)
        exact_value = float(exact_pr_max_geq(inst).probability) if exact else None
        rows.append(
            SweepRow(
                dist=label,
                k=k,
                m=m,
                rho=m * norm / k,
                lower=max_load_lower(inst),
                upper=max_load_upper(inst),
                empirical=est.frequency,
                wilson_low=est.wilson_low,
                wilson_high=est.wilson_high,
                exact=exact_value,
            )
        )
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def write_csv(rows, stream) -> None:
    """Write sweep rows as CSV: '.' decimals, shortest round-trip floats,
    LF line endings, byte-identical for identical inputs."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [
                row.dist,
                str(row.k),
                str(row.m),
                _cell(row.rho),
                _cell(row.lower),
                _cell(row.upper),
                _cell(row.empirical),
                _cell(row.wilson_low),
                _cell(row.wilson_high),
                _cell(row.exact),
            ]
        )
