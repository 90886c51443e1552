"""Command-line front end: size, verify, scan, and bound subcommands.

Reports are JSON by default (text with --format text) and echo the parsed
inputs so a report is sufficient to reproduce itself.  All floats are
serialized with 17 significant digits, so parsing a report recovers every
value bit-exactly.

Exit codes: 0 success, 2 usage/parameter error, 3 internal numeric failure,
4 I/O failure.  PLAN_THREADS (positive integer) caps concurrency for the
scan and Monte Carlo paths; results do not depend on it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .bounds import TailBoundReport, chernoff_log_bound
from .budget import ErrorBudget
from .errors import ParameterError, ResourceLimitError
from .exact import exact_coverage, exact_tail
from .plan import (
    formula_sample_size,
    lambda_grid,
    min_sample_size_exact,
    normal_approx_sample_size,
    scan_coverage,
)
from .simulate import SimConfig, simulate_coverage

_FLAG_OF = {
    "epsilon_a": "--eps-a",
    "epsilon_r": "--eps-r",
    "delta": "--delta",
    "lam": "--lambda",
    "lambda_assumed": "--lambda",
    "lam_min": "--lambda-min",
    "lam_max": "--lambda-max",
    "points": "--grid-points",
    "n": "--n",
    "n_hint": "--n",
    "trials": "--mc-trials",
    "seed": "--seed",
    "theta": "--theta",
    "r": "--r",
    "side": "--side",
    "PLAN_THREADS": "PLAN_THREADS",
}


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ArithmeticError(f"non-finite value in report: {x!r}")
    s = format(x, ".17g")
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def _to_json(obj) -> str:
    """Compact JSON with floats at 17 significant digits (lossless)."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(str(obj))
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_to_json(v) for v in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ", ".join(
            json.dumps(str(k)) + ": " + _to_json(v) for k, v in obj.items()
        ) + "}"
    raise TypeError(f"unserializable value in report: {obj!r}")


def _render_text(obj, indent: str = "") -> str:
    """Human-oriented rendering; not schema-stable."""
    lines = []
    if isinstance(obj, dict):
        for key, value in obj.items():
            if isinstance(value, (dict, list, tuple)) and value:
                lines.append(f"{indent}{key}:")
                lines.append(_render_text(value, indent + "  "))
            else:
                lines.append(f"{indent}{key} = {_scalar_text(value)}")
    elif isinstance(obj, (list, tuple)):
        for value in obj:
            if isinstance(value, (dict, list, tuple)):
                lines.append(_render_text(value, indent + "  "))
            else:
                lines.append(f"{indent}- {_scalar_text(value)}")
    else:
        lines.append(f"{indent}{_scalar_text(obj)}")
    return "\n".join(line for line in lines if line)


def _scalar_text(value) -> str:
    if isinstance(value, float):
        return _format_float(value)
    return str(value)


def _envelope(command: str, inputs: dict, results: dict, warnings: list) -> dict:
    return {
        "tool_version": __version__,
        "command": command,
        "inputs": inputs,
        "results": results,
        "warnings": warnings,
    }


def _threads_from_env() -> int:
    raw = os.environ.get("PLAN_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ParameterError("PLAN_THREADS", f"PLAN_THREADS must be a positive integer, got {raw!r}")
    if value < 1:
        raise ParameterError("PLAN_THREADS", f"PLAN_THREADS must be a positive integer, got {raw!r}")
    return value


def _budget_from(args) -> ErrorBudget:
    return ErrorBudget(epsilon_a=args.eps_a, epsilon_r=args.eps_r, delta=args.delta)


def _check_pos_int(value: int, name: str) -> int:
    if value is None or value < 1:
        raise ParameterError(name, f"{name} must be a positive integer, got {value!r}")
    return int(value)


def _cmd_size(args, threads: int) -> dict:
    budget = _budget_from(args)
    inputs = {
        "eps_a": args.eps_a,
        "eps_r": args.eps_r,
        "delta": args.delta,
        "method": args.method,
        "lambda": args.lam,
    }
    if args.method == "normal":
        if args.lam is None:
            raise ParameterError("lam", "--lambda is required for --method normal")
        res = normal_approx_sample_size(args.lam, args.eps_a, args.delta)
    elif args.method == "exact":
        res = min_sample_size_exact(budget)
    else:
        res = formula_sample_size(budget)
    results = {
        "n": res.n,
        "rhs": res.rhs,
        "critical_exponent": res.critical_exponent,
        "method": res.method,
    }
    return _envelope("size", inputs, results, [])


def _cmd_verify(args, threads: int) -> dict:
    budget = _budget_from(args)
    n = _check_pos_int(args.n, "n")
    if args.lam is None or not args.lam > 0.0:
        raise ParameterError("lam", f"--lambda must be > 0, got {args.lam!r}")
    inputs = {
        "eps_a": args.eps_a,
        "eps_r": args.eps_r,
        "delta": args.delta,
        "n": n,
        "lambda": args.lam,
        "mc_trials": args.mc_trials,
        "seed": args.seed,
    }
    point = exact_coverage(n, args.lam, budget)
    threshold = 1.0 - budget.delta
    results = {
        "coverage": point.coverage,
        "k_min": point.k_min,
        "k_max": point.k_max,
        "case": point.case.value,
        "threshold": threshold,
        "margin": point.coverage - threshold,
        "pass": point.coverage >= threshold,
    }
    if args.mc_trials is not None:
        trials = _check_pos_int(args.mc_trials, "trials")
        sim = simulate_coverage(
            SimConfig(trials=trials, seed=args.seed, n=n, lam=args.lam, budget=budget),
            threads=threads,
        )
        results["mc"] = {
            "trials": sim.trials,
            "hits": sim.hits,
            "estimate": sim.estimate,
            "ci_half_width": sim.ci_half_width,
            "generator": sim.generator,
        }
    return _envelope("verify", inputs, results, [])


def _cmd_scan(args, threads: int) -> dict:
    budget = _budget_from(args)
    n = args.n if args.n is not None else formula_sample_size(budget).n
    n = _check_pos_int(n, "n")
    lam_min = args.lam_min if args.lam_min is not None else budget.epsilon_a / 100.0
    lam_max = args.lam_max if args.lam_max is not None else 100.0 * budget.rel_boundary
    points = _check_pos_int(args.grid_points, "points")
    grid = lambda_grid(budget, lam_min, lam_max, points)
    coverage_points = scan_coverage(n, budget, grid, threads=threads)
    threshold = 1.0 - budget.delta
    rows = [
        {
            "lambda": p.lam,
            "case": p.case.value,
            "k_min": p.k_min,
            "k_max": p.k_max,
            "coverage": p.coverage,
            "margin": p.coverage - threshold,
        }
        for p in coverage_points
    ]
    worst = min(rows, key=lambda row: row["margin"])
    inputs = {
        "eps_a": args.eps_a,
        "eps_r": args.eps_r,
        "delta": args.delta,
        "n": n,
        "lambda_min": lam_min,
        "lambda_max": lam_max,
        "grid_points": points,
        "out": args.out,
    }
    results = {
        "n": n,
        "rows": len(rows),
        "worst_lambda": worst["lambda"],
        "min_margin": worst["margin"],
        "all_pass": worst["margin"] >= 0.0,
    }
    if args.out is not None:
        _write_scan_csv(args.out, rows)
        results["csv"] = args.out
    else:
        results["points"] = rows
    return _envelope("scan", inputs, results, [])


def _write_scan_csv(path: str, rows: list) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("lambda,case,k_min,k_max,coverage,margin\n")
        for row in rows:
            handle.write(
                ",".join(
                    (
                        _format_float(row["lambda"]),
                        row["case"],
                        str(row["k_min"]),
                        str(row["k_max"]),
                        _format_float(row["coverage"]),
                        _format_float(row["margin"]),
                    )
                )
                + "\n"
            )


def _cmd_bound(args, threads: int) -> dict:
    theta, r, side = args.theta, args.r, args.side
    if not theta > 0.0:
        raise ParameterError("theta", f"--theta must be > 0, got {theta!r}")
    if not r >= 0.0:
        raise ParameterError("r", f"--r must be >= 0, got {r!r}")
    ok = r > theta if side == "upper" else r < theta
    warnings = []
    if not ok:
        if not args.force:
            need = "r > theta" if side == "upper" else "r < theta"
            raise ParameterError(
                "r",
                f"the {side}-tail bound requires {need} (got r={r!r}, theta={theta!r}); "
                "pass --force to evaluate the raw formula anyway",
            )
        warnings.append(
            f"precondition violated for side={side}: the value is the raw formula, "
            "not a guaranteed bound on the tail"
        )
    bound = math.exp(chernoff_log_bound(theta, r))
    exact = exact_tail(theta, r, "geq" if side == "upper" else "leq") if args.exact else None
    report = TailBoundReport(bound=bound, side=side, exact=exact)
    inputs = {
        "theta": theta,
        "r": r,
        "side": side,
        "exact": bool(args.exact),
        "force": bool(args.force),
    }
    results = {"bound": report.bound, "side": report.side, "exact": report.exact}
    return _envelope("bound", inputs, results, warnings)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poissonplan",
        description="Rigorous sample sizes for estimating a Poisson mean under a "
        "mixed absolute/relative error criterion, with exact and Monte Carlo "
        "verification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_budget(p):
        p.add_argument("--eps-a", dest="eps_a", type=float, required=True,
                       help="absolute tolerance (> 0)")
        p.add_argument("--eps-r", dest="eps_r", type=float, required=True,
                       help="relative tolerance in (0, 1)")
        p.add_argument("--delta", type=float, required=True,
                       help="allowed failure probability in (0, 1)")

    def add_format(p):
        p.add_argument("--format", choices=("json", "text"), default="json",
                       help="output format (JSON is schema-stable)")

    p_size = sub.add_parser("size", help="compute a sample size")
    add_budget(p_size)
    p_size.add_argument("--method", choices=("formula", "exact", "normal"),
                        default="formula",
                        help="closed form (default), exact grid search, or normal baseline")
    p_size.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="assumed mean (required for --method normal)")
    add_format(p_size)
    p_size.set_defaults(handler=_cmd_size)

    p_verify = sub.add_parser("verify", help="exact (and optionally Monte Carlo) coverage at one mean")
    add_budget(p_verify)
    p_verify.add_argument("--n", type=int, required=True, help="sample size to verify")
    p_verify.add_argument("--lambda", dest="lam", type=float, required=True,
                          help="true mean to verify at")
    p_verify.add_argument("--mc-trials", dest="mc_trials", type=int, default=None,
                          help="also run a Monte Carlo check with this many trials")
    p_verify.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    add_format(p_verify)
    p_verify.set_defaults(handler=_cmd_verify)

    p_scan = sub.add_parser("scan", help="exact coverage over a grid of means")
    add_budget(p_scan)
    p_scan.add_argument("--n", type=int, default=None,
                        help="sample size (default: the closed-form n)")
    p_scan.add_argument("--grid-points", dest="grid_points", type=int, default=200,
                        help="log-spaced grid size (boundary points are added)")
    p_scan.add_argument("--lambda-min", dest="lam_min", type=float, default=None,
                        help="grid lower end (default eps_a/100)")
    p_scan.add_argument("--lambda-max", dest="lam_max", type=float, default=None,
                        help="grid upper end (default 100*eps_a/eps_r)")
    p_scan.add_argument("--out", default=None, help="write per-mean rows to this CSV file")
    add_format(p_scan)
    p_scan.set_defaults(handler=_cmd_scan)

    p_bound = sub.add_parser("bound", help="Chernoff tail bound for one Poisson tail")
    p_bound.add_argument("--theta", type=float, required=True, help="Poisson mean (> 0)")
    p_bound.add_argument("--r", type=float, required=True, help="tail threshold (>= 0)")
    p_bound.add_argument("--side", choices=("upper", "lower"), required=True)
    p_bound.add_argument("--exact", action="store_true",
                         help="also compute the exact tail probability")
    p_bound.add_argument("--force", action="store_true",
                         help="evaluate the raw formula even when the side precondition fails")
    add_format(p_bound)
    p_bound.set_defaults(handler=_cmd_bound)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        threads = _threads_from_env()
        envelope = args.handler(args, threads)
    except ParameterError as exc:
        flag = _FLAG_OF.get(exc.param, exc.param)
        print(f"poissonplan {args.command}: error: {flag}: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"poissonplan {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"poissonplan {args.command}: i/o error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # numeric or internal failure
        print(f"poissonplan {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 3
    if args.format == "text":
        print(_render_text(envelope))
    else:
        print(_to_json(envelope))
    return 0


if __name__ == "__main__":
    sys.exit(main())
