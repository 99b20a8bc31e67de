"""Command-line driver: run one method, compare several, or execute the diagnostics.

Runspec files are TOML documents with ``[problem]``, ``[config]`` and ``[run]``
tables. ``[problem]`` either names a catalog entry (``name = "box_vip"``) or
defines operators inline with ``a1``, ``a2``, ``b`` and optional ``solution``
subtables. A compare matrix is an array of ``[[run.matrix]]`` tables, each
with a ``method`` and optionally its own ``x0``.

Exit codes: 0 success, 1 solver or check failure, 2 input error.
"""

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import diagnostics, problems
from .base import ConfigurationError, SepSplitError, as_vector
from .solvers import BASELINES, METHODS, SolverConfig, solve
from .trace import write_csv

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

CONFIG_FIELDS = {
    "theta": float,
    "delta": float,
    "delta_bar": float,
    "alpha_init": float,
    "gamma": float,
    "tol": float,
    "max_iter": int,
    "max_trials": int,
    "fixed_alpha": float,
}


class InputError(SepSplitError):
    """Malformed runspec, unknown names or invalid parameters."""


# --- runspec assembly ---------------------------------------------------------------


def load_file(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except tomllib.TOMLDecodeError as exc:
        # the decoder message carries the line and column
        raise InputError(f"{path}: {exc}") from None


def _table(doc, key, path):
    val = doc.get(key, {})
    if not isinstance(val, dict):
        raise InputError(f"{path}: [{key}] must be a table")
    return val


def build_problem(spec, where="problem"):
    """Catalog name or an inline definition (dict)."""
    if isinstance(spec, str):
        if spec.endswith(".toml"):
            doc = load_file(spec)
            return build_problem(_table(doc, "problem", spec), f"{spec}: [problem]")
        try:
            return problems.get_problem(spec)
        except (KeyError, ConfigurationError):
            raise InputError(f"{where}: unknown problem {spec!r}; catalog has {', '.join(problems.names())}") from None
    if not isinstance(spec, dict) or not spec:
        raise InputError(f"{where}: missing problem definition")
    if set(spec) == {"name"}:
        return build_problem(spec["name"], where)
    try:
        return problems.ProblemInstance.from_dict(spec)
    except (ConfigurationError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None


def build_config(table, overrides, where="config"):
    kwargs = {}
    for key, val in {**table, **overrides}.items():
        if val is None:
            continue
        if key not in CONFIG_FIELDS:
            raise InputError(f"{where}: unknown key {key!r}")
        try:
            kwargs[key] = CONFIG_FIELDS[key](val)
        except (TypeError, ValueError):
            raise InputError(f"{where}.{key}: expected a number, got {val!r}") from None
    return SolverConfig(**kwargs)


def parse_vector(text, where="x0"):
    if isinstance(text, str):
        try:
            text = [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
        except ValueError:
            raise InputError(f"{where}: cannot parse {text!r} as a comma-separated vector") from None
    try:
        return as_vector(text, name=where)
    except (ConfigurationError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None


def default_x0(problem, seed):
    return 2.0 * np.random.default_rng(seed).standard_normal(problem.dim)


def default_fixed_alpha(problem):
    """Constant stepsize for the baselines when none is given: 0.9 min(beta, 1/(2 L2))."""
    return diagnostics._fbhf_alpha(problem)


def gather(args):
    """Merge the runspec file (if any) with command-line flags; flags win."""
    doc, path = {}, "<command line>"
    if args.spec:
        path = args.spec
        doc = load_file(path)
        unknown = set(doc) - {"problem", "config", "run"}
        if unknown:
            raise InputError(f"{path}: unknown section(s) {sorted(unknown)}")
    run = _table(doc, "run", path)
    problem_spec = args.problem if args.problem is not None else _table(doc, "problem", path)
    problem = build_problem(problem_spec, f"{path}: [problem]" if args.problem is None else "--problem")
    overrides = {
        "theta": args.theta,
        "delta": args.delta,
        "delta_bar": args.delta_bar,
        "alpha_init": args.alpha_init,
        "gamma": args.gamma,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "fixed_alpha": args.fixed_alpha,
    }
    config_table = _table(doc, "config", path)
    config = build_config(config_table, overrides, f"{path}: [config]")
    seed = args.seed if args.seed is not None else run.get("seed", 0)
    if not isinstance(seed, int):
        raise InputError(f"{path}: [run].seed must be an integer")
    x0 = args.x0 if args.x0 is not None else run.get("x0")
    x0 = default_x0(problem, seed) if x0 is None else parse_vector(x0)
    return dict(
        problem=problem,
        config=config,
        seed=seed,
        x0=x0,
        run=run,
        config_table=config_table,
        trace_out=args.trace_out or run.get("trace_out"),
        report_out=args.report_out or run.get("report_out"),
        path=path,
    )


def method_config(config, method, problem):
    if method in BASELINES and config.fixed_alpha is None:
        return replace(config, fixed_alpha=default_fixed_alpha(problem))
    return config


def validate(config, problem, method, x0, where):
    bad = config.violations(problem, method)
    if x0.shape[0] != problem.dim:
        bad.append(f"x0: dimension {x0.shape[0]}, problem {problem.name!r} has dimension {problem.dim}")
    if bad:
        raise InputError(f"{where}: invalid runspec: " + "; ".join(bad))


# --- output -------------------------------------------------------------------------


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def summary(result, problem):
    out = {
        "problem": problem.name,
        "method": result.method,
        "status": result.status,
        "iterations": result.iterations,
        "residual": _num(result.residual),
        "final_x": [float(t) for t in result.final_x],
        "resolvent_calls": result.resolvent_calls,
        "a2_evals": result.a2_evals,
        "message": result.message,
    }
    if problem.solution is not None:
        out["dist_to_solution"] = float(np.linalg.norm(result.final_x - problem.solution.project(result.final_x)))
    return out


def write_trace(result, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_csv(result.trace, fh)


def write_json(obj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def print_summary(s, out):
    print(f"problem:    {s['problem']}", file=out)
    print(f"method:     {s['method']}", file=out)
    print(f"status:     {s['status']}", file=out)
    print(f"iterations: {s['iterations']}", file=out)
    print(f"residual:   {s['residual']}", file=out)
    print("final_x:    [" + ", ".join(f"{t:.10g}" for t in s["final_x"]) + "]", file=out)
    if "dist_to_solution" in s:
        print(f"dist_to_solution: {s['dist_to_solution']:.3e}", file=out)
    if s["message"]:
        print(f"message:    {s['message']}", file=out)


# --- commands -----------------------------------------------------------------------


def cmd_run(args, out=sys.stdout):
    rs = gather(args)
    method = args.method or rs["run"].get("method")
    if method is None:
        raise InputError(f"{rs['path']}: no method given (use --method or [run].method)")
    config = method_config(rs["config"], method, rs["problem"])
    validate(config, rs["problem"], method, rs["x0"], rs["path"])
    result = solve(rs["problem"], method, config, rs["x0"])
    if rs["trace_out"]:
        write_trace(result, rs["trace_out"])
    s = summary(result, rs["problem"])
    print_summary(s, out)
    if rs["report_out"]:
        write_json(s, rs["report_out"])
    return EXIT_OK if result.succeeded else EXIT_FAIL


def compare_matrix(args, rs):
    if args.method:
        entries = [{"method": m} for m in args.method]
    else:
        entries = rs["run"].get("matrix", [])
    if not isinstance(entries, list) or not entries:
        raise InputError(f"{rs['path']}: empty compare matrix")
    runs = []
    for i, e in enumerate(entries):
        where = f"{rs['path']}: matrix[{i}]"
        if not isinstance(e, dict) or "method" not in e:
            raise InputError(f"{where}: each entry needs a method")
        x0 = rs["x0"] if "x0" not in e or args.x0 is not None else parse_vector(e["x0"], f"{where}.x0")
        runs.append((e["method"], x0, where))
    dims = {x0.shape[0] for _, x0, _ in runs}
    if len(dims) > 1:
        raise InputError(f"{rs['path']}: compare matrix mixes dimensions {sorted(dims)}")
    return runs


def cmd_compare(args, out=sys.stdout):
    rs = gather(args)
    problem = rs["problem"]
    runs = compare_matrix(args, rs)
    # validate every member before running any
    planned = []
    for method, x0, where in runs:
        config = method_config(rs["config"], method, problem)
        validate(config, problem, method, x0, where)
        planned.append((method, config, x0))
    rows, status = [], EXIT_OK
    for i, (method, config, x0) in enumerate(planned):
        result = solve(problem, method, config, x0)
        if rs["trace_out"]:
            tag = method if sum(m == method for m, _, _ in planned) == 1 else f"{method}_{i}"
            write_trace(result, Path(rs["trace_out"]) / f"{problem.name}_{tag}.csv")
        rows.append(summary(result, problem))
        if not result.succeeded:
            status = EXIT_FAIL
    print(f"{'method':<10} {'status':<19} {'iterations':>10} {'resolvents':>10} {'A2 evals':>10} {'residual':>11}", file=out)
    for s in rows:
        res = s["residual"]
        res = f"{res:.3e}" if isinstance(res, float) else str(res)
        print(
            f"{s['method']:<10} {s['status']:<19} {s['iterations']:>10} {s['resolvent_calls']:>10} {s['a2_evals']:>10} {res:>11}",
            file=out,
        )
    if rs["report_out"]:
        write_json(rows, rs["report_out"])
    return status


def cmd_check(args, out=sys.stdout):
    rs = gather(args)
    config = rs["config"]
    if args.max_iter is None and "max_iter" not in rs["config_table"]:
        config = replace(config, max_iter=min(config.max_iter, 2000))
    bad = [v for m in ("Method1", "Method2") for v in config.violations(rs["problem"], m)]
    if bad:
        raise InputError(f"{rs['path']}: invalid runspec: " + "; ".join(sorted(set(bad))))
    x0 = rs["x0"] if (args.x0 is not None or "x0" in rs["run"]) else None
    reports, runs = diagnostics.run_checks(rs["problem"], config, seed=rs["seed"], x0=x0)
    for r in reports:
        print(r.line(), file=out)
    failed = [r for r in reports if r.passed is False]
    print(f"{len(reports) - len(failed)}/{len(reports)} checks without failure", file=out)
    if rs["report_out"]:
        rows = [
            {"check": r.name, "status": r.status, "value": _num(r.value), "tol": r.tol, "detail": r.detail} for r in reports
        ]
        write_json(rows, rs["report_out"])
    if rs["trace_out"]:
        for method, res in runs.items():
            write_trace(res, Path(rs["trace_out"]) / f"{rs['problem'].name}_{method}.csv")
    return EXIT_FAIL if failed else EXIT_OK


# --- argument parsing ---------------------------------------------------------------


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec", nargs="?", help="TOML runspec with [problem], [config] and [run] tables")
    common.add_argument("--problem", help="catalog name or a TOML file with a [problem] table")
    common.add_argument("--x0", help="starting point, comma separated (default: seeded normal draw)")
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", type=int)
    common.add_argument("--theta", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--delta-bar", type=float)
    common.add_argument("--alpha-init", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--fixed-alpha", type=float, help="constant stepsize of FB, FBF and FBHF")
    common.add_argument("--trace-out", help="trace CSV path (run) or output directory (compare, check)")
    common.add_argument("--report-out", help="JSON summary or check report path")
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="sepsplit", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run one method")
    p.add_argument("--method", choices=METHODS)
    p = sub.add_parser("compare", parents=[common], help="run several methods on one problem")
    p.add_argument("--method", choices=METHODS, action="append", help="repeat to build the matrix")
    sub.add_parser("check", parents=[common], help="run the diagnostics suite on a problem")
    return parser


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "check": cmd_check}


def main(argv=None, out=None):
    out = out or sys.stdout
    args = make_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SepSplitError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
