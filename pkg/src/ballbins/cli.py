"""Command-line front end.

Subcommands: bound, solve, sweep, wait, oracle, simulate, check.  Reports
go to stdout as JSON (CSV for sweep), diagnostics to stderr.  Exit codes:
0 success, 1 failed self-check, 2 argument/spec parse error, 3 domain or
size error from the computation itself.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__, bounds, oracle, selfcheck, simulate, sweep
from .core import (
    Distribution,
    ProblemInstance,
    k_norm,
    validate_distribution,
    vector_k_norm,
)
from .errors import BallBinsError, DistSpecError

__all__ = ["main", "parse_dist_spec"]


def parse_dist_spec(spec: str) -> tuple[str, Distribution]:
    """Parse a distribution spec into (label, Distribution).

    Forms: uniform:<n>, linear:<n>, zipf:<n>:<s>, file:<path> (JSON array
    of nonnegative numbers), inline:w1,w2,...
    """
    kind, _, rest = spec.partition(":")
    try:
        if kind == "uniform":
            return spec, Distribution.uniform(int(rest))
        if kind == "linear":
            return spec, Distribution.linear(int(rest))
        if kind == "zipf":
            n_text, _, s_text = rest.partition(":")
            return spec, Distribution.zipf(int(n_text), float(s_text))
        if kind == "file":
            with open(rest, "r", encoding="utf-8") as handle:
                data = json.load(handle)
            if not isinstance(data, list):
                raise DistSpecError(f"{rest}: expected a JSON array of numbers")
            return spec, validate_distribution(np.asarray(data, dtype=np.float64))
        if kind == "inline":
            weights = [float(tok) for tok in rest.split(",") if tok != ""]
            if not weights:
                raise DistSpecError(f"{spec!r}: no weights given")
            return spec, validate_distribution(weights)
    except DistSpecError:
        raise
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        raise DistSpecError(f"bad distribution spec {spec!r}: {exc}") from exc
    except BallBinsError as exc:
        raise DistSpecError(f"bad distribution spec {spec!r}: {exc}") from exc
    raise DistSpecError(
        f"unknown distribution spec {spec!r}; expected "
        "uniform:<n>, linear:<n>, zipf:<n>:<s>, file:<path>, or inline:w1,w2,..."
    )


def _parse_subset(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok != ""]
    except ValueError as exc:
        raise DistSpecError(f"bad subset {text!r}: {exc}") from exc


def _emit(report: dict) -> None:
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _cmd_bound(args) -> int:
    label, dist = parse_dist_spec(args.dist)
    inst = ProblemInstance(balls=args.m, load=args.k, dist=dist)
    subset = _parse_subset(args.subset) if args.subset else None
    if subset is None:
        pair = bounds.sandwich(inst)
        norm = k_norm(dist, args.k)
    else:
        subset = np.unique(np.asarray(subset, dtype=np.int64)).tolist()
        pair = bounds.restricted_sandwich(inst, subset)
        norm = vector_k_norm(dist.weights[np.asarray(subset)], args.k)
    r = args.m * norm / args.k
    upper_tail = bounds.rho_tail_upper(r, args.k)
    lower_tail = bounds.rho_tail_lower(r, args.k)
    report = {
        "dist": label,
        "n": dist.bin_count,
        "m": args.m,
        "k": args.k,
        "rho": r,
        "lower": pair.lower,
        "upper": pair.upper,
        "lower_source": pair.lower_source,
        "upper_source": pair.upper_source,
        "rho_tail_upper": upper_tail.value,
        "rho_tail_upper_vacuous": upper_tail.vacuous,
        "rho_tail_lower": lower_tail.value,
        "rho_tail_lower_vacuous": lower_tail.vacuous,
    }
    if subset is not None:
        report["subset"] = subset
        report["subset_mass"] = float(dist.weights[np.asarray(subset)].sum())
    _emit(report)
    return 0


def _cmd_solve(args) -> int:
    label, dist = parse_dist_spec(args.dist)
    if (args.k is None) == (args.m is None):
        raise DistSpecError("solve requires exactly one of --k or --m")
    if args.m is not None:
        k_star = bounds.critical_load(args.m, dist)
        k_low, k_high = bounds.load_interval(args.m, dist, args.delta)
        _emit(
            {
                "dist": label,
                "n": dist.bin_count,
                "m": args.m,
                "k_star": k_star,
                "k_bracket": list(bounds.integer_bracket(k_star)),
                "delta": args.delta,
                "k_low": k_low,
                "k_high": k_high,
            }
        )
    else:
        m_star = bounds.critical_balls(args.k, dist)
        m_low, m_high = bounds.wait_interval(args.k, dist, args.delta)
        _emit(
            {
                "dist": label,
                "n": dist.bin_count,
                "k": args.k,
                "m_star": m_star,
                "delta": args.delta,
                "m_low": m_low,
                "m_high": m_high,
            }
        )
    return 0


def _cmd_sweep(args) -> int:
    label, dist = parse_dist_spec(args.dist)
    ks = [int(tok) for tok in args.k.split(",") if tok != ""]
    if not ks:
        raise DistSpecError("sweep requires at least one k")
    rows = []
    for k in ks:
        rows.extend(
            sweep.build_sweep(
                dist,
                label,
                k,
                rho_max=args.rho_max,
                points=args.points,
                trials=args.trials,
                seed=args.seed,
                exact=args.exact,
                confidence=args.confidence,
            )
        )
    sweep.write_csv(rows, sys.stdout)
    return 0


def _cmd_wait(args) -> int:
    label, dist = parse_dist_spec(args.dist)
    wb = bounds.expected_wait_bounds(args.k, dist)
    report = {
        "dist": label,
        "n": dist.bin_count,
        "k": args.k,
        "m_star": bounds.critical_balls(args.k, dist),
        "expected_wait_lower": wb.lower_expected,
        "expected_wait_upper": wb.upper_expected,
        "sharp_constant": wb.sharp_constant,
    }
    if args.k == 1:
        # The first ball always creates a 1-loaded bin.
        report["quadrature"] = 1.0
    else:
        report["quadrature"] = oracle.expected_wait_quadrature(args.k, dist)
    if args.trials:
        wt = simulate.sim_waiting_time(
            args.k, dist, simulate.SimConfig(trials=args.trials, seed=args.seed)
        )
        samples = wt.values.astype(np.float64)
        mean = float(samples.mean()) if samples.size else math.nan
        se = (
            float(samples.std(ddof=1) / math.sqrt(samples.size))
            if samples.size > 1
            else math.nan
        )
        report.update(
            {
                "sim_trials": wt.trials,
                "sim_mean": mean,
                "sim_stderr": se,
                "sim_ci_low": mean - 3 * se,
                "sim_ci_high": mean + 3 * se,
                "censored": wt.censored,
                "cap": wt.cap,
            }
        )
    _emit(report)
    return 0


def _cmd_oracle(args) -> int:
    label, dist = parse_dist_spec(args.dist)
    inst = ProblemInstance(balls=args.m, load=args.k, dist=dist)
    subset = _parse_subset(args.subset) if args.subset else None
    if args.method == "enumeration":
        result = oracle.enumerate_small(inst, subset=subset)
    elif subset is None:
        result = oracle.exact_pr_max_geq(inst)
    else:
        result = oracle.exact_restricted(inst, subset)
    report = {
        "dist": label,
        "n": dist.bin_count,
        "m": args.m,
        "k": args.k,
        "probability": float(result.probability),
        "method": result.method,
        "precision_bits": result.precision_bits,
    }
    if subset is not None:
        report["subset"] = sorted(set(subset))
    _emit(report)
    return 0


def _cmd_simulate(args) -> int:
    label, dist = parse_dist_spec(args.dist)
    inst = ProblemInstance(balls=args.m, load=args.k, dist=dist)
    est = simulate.sim_max_load(
        inst,
        simulate.SimConfig(trials=args.trials, seed=args.seed),
        z=simulate.z_for_confidence(args.confidence),
    )
    _emit(
        {
            "dist": label,
            "n": dist.bin_count,
            "m": args.m,
            "k": args.k,
            "trials": est.trials,
            "seed": args.seed,
            "successes": est.successes,
            "frequency": est.frequency,
            "wilson_low": est.wilson_low,
            "wilson_high": est.wilson_high,
            "z": est.z,
        }
    )
    return 0


def _cmd_check(args) -> int:
    results = selfcheck.run_checks(args.level, seed=args.seed)
    passed = all(r.passed for r in results)
    _emit(
        {
            "level": args.level,
            "seed": args.seed,
            "passed": passed,
            "checks": [
                {
                    "name": r.name,
                    "passed": r.passed,
                    "detail": r.detail,
                    "seconds": round(r.seconds, 3),
                }
                for r in results
            ],
        }
    )
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{status} {r.name} ({r.seconds:.1f}s) {r.detail}", file=sys.stderr)
    return 0 if passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ballbins",
        description="Bounds, exact oracles, and simulation for the maximum "
        "load and waiting time when throwing balls into bins.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_dist(p):
        p.add_argument(
            "dist",
            help="distribution spec: uniform:<n>, linear:<n>, zipf:<n>:<s>, "
            "file:<path>, inline:w1,w2,...",
        )

    p = sub.add_parser("bound", help="two-sided bounds on Pr[max load >= k]")
    add_dist(p)
    p.add_argument("--m", type=int, required=True, help="number of balls")
    p.add_argument("--k", type=int, required=True, help="load threshold")
    p.add_argument("--subset", help="comma-separated 0-based bin indices")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("solve", help="concentration points and intervals")
    add_dist(p)
    p.add_argument("--k", type=int, help="load; reports m* and its interval")
    p.add_argument("--m", type=int, help="balls; reports k* and its interval")
    p.add_argument("--delta", type=float, default=0.1, help="tail mass per side")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="CSV dataset of bounds vs empirical "
                                     "frequency along a rho grid")
    add_dist(p)
    p.add_argument("--k", required=True, help="load(s), comma separated")
    p.add_argument("--rho-max", type=float, default=3.0, dest="rho_max")
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--trials", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true",
                   help="add the exact column (within oracle limits)")
    p.add_argument("--confidence", type=float, default=0.999)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("wait", help="expected waiting time for a k-loaded bin")
    add_dist(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=0,
                   help="also sample waiting times (0 = skip)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_wait)

    p = sub.add_parser("oracle", help="exact Pr[max load >= k] at desk scale")
    add_dist(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--subset", help="comma-separated 0-based bin indices")
    p.add_argument("--method", choices=["egf", "enumeration"], default="egf")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("simulate", help="empirical frequency of a k-loaded bin")
    add_dist(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--confidence", type=float, default=0.999)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("check", help="run the self-verification suite")
    p.add_argument("--level", choices=["fast", "full"], default="fast")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_check)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DistSpecError as exc:
        print(f"ballbins: {exc}", file=sys.stderr)
        return 2
    except (BallBinsError, IndexError) as exc:
        print(f"ballbins: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
