"""Command-line front end: ``rfim <command> [flags]``.

Every run emits one record. With ``--format json`` it is a single object
``{"spec", "payload", "version", "wall_time_s"}`` whose payload is
``{"columns": [...], "rows": [[...], ...]}``; with ``--format csv`` the
same payload is written as a header row plus data rows (reals with 17
significant digits, LF line endings).

Exit codes: 0 success, 1 verification failure, 2 invalid arguments,
3 numeric or resource error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
import time

import numpy as np

from . import __version__, exact, montecarlo, verify
from .core import ModelParams, MoritaParams
from .errors import (
    AmbiguousPhaseError,
    ConfigError,
    DomainError,
    NoSolutionError,
    NumericError,
    ResourceError,
)
from .solvers import (
    classify_landscape,
    compute_gap,
    naive_solution_at,
    neutral_curve_infimum,
    neutral_l_min,
    solve_naive_system,
    solve_quenched,
    trace_neutral_curve,
)

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
MAX_GRID_POINTS = 10**6
SWEEPABLE = {"beta": float, "eps": float, "h0": float, "lambda": float, "n": int, "seed": int}

# (flag, dest, type, default)
OPTIONS = [
    ("--beta", "beta", float, None),
    ("--eps", "eps", float, None),
    ("--h0", "h0", float, 0.0),
    ("--lambda", "lam", float, 0.0),
    ("--n", "n", int, None),
    ("--seed", "seed", int, 0),
    ("--l-min", "l_min", float, None),
    ("--l-max", "l_max", float, None),
    ("--points", "points", int, 200),
    ("--table", "table", str, "joint-law"),
    ("--conditioning", "conditioning", str, "none"),
    ("--bias", "bias", str, None),
    ("--target", "target", str, "morita"),
    ("--sweeps", "sweeps", int, 10000),
    ("--burn-in", "burn_in", int, 1000),
    ("--n-plus", "n_plus", int, None),
    ("--suite", "suite", str, "all"),
]
CHOICES = {
    "table": ("joint-law", "profile", "jump", "identities", "morita"),
    "conditioning": ("none", "positive-field-sum"),
    "target": (montecarlo.MORITA, montecarlo.QUENCHED),
    "suite": tuple(verify.SUITES),
}
COMMAND_OPTIONS = {
    "solve": ("beta", "eps", "h0"),
    "landscape": ("beta", "eps", "h0", "lam"),
    "neutral-set": ("beta", "eps", "l_min", "l_max", "points"),
    "gap": ("beta", "eps"),
    "finite-n": ("beta", "eps", "h0", "n", "table", "conditioning", "bias"),
    "mc": ("beta", "eps", "h0", "lam", "n", "seed", "target", "sweeps", "burn_in", "n_plus"),
    "verify": ("suite",),
}
REQUIRED = {
    "solve": ("beta", "eps"),
    "landscape": ("beta", "eps"),
    "neutral-set": ("beta", "eps"),
    "gap": ("beta", "eps"),
    "finite-n": ("beta", "eps", "n"),
    "mc": ("beta", "eps", "n"),
    "verify": (),
}


class UsageError(Exception):
    pass


def _flag(dest: str) -> str:
    return next(f for f, d, _, _ in OPTIONS if d == dest)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfim", allow_abbrev=False, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for command, dests in COMMAND_OPTIONS.items():
        p = sub.add_parser(command, allow_abbrev=False)
        for flag, dest, typ, _ in OPTIONS:
            if dest in dests:
                p.add_argument(flag, dest=dest, type=typ, default=None, choices=CHOICES.get(dest))
        p.add_argument("--config", default=None, help="flat key=value file supplying defaults")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
        if command != "verify":
            p.add_argument(
                "--sweep",
                action="append",
                default=[],
                metavar="NAME=START:STOP:COUNT",
                help="sweep a parameter over a range (or NAME=v1,v2,...); at most two",
            )
    return parser


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


def _resolve(args: argparse.Namespace) -> dict:
    dests = COMMAND_OPTIONS[args.command]
    by_key = {f.lstrip("-"): (d, t) for f, d, t, _ in OPTIONS if d in dests}
    config = read_config(args.config) if args.config else {}
    opts = {d: default for _, d, _, default in OPTIONS if d in dests}
    for key, value in config.items():
        if key not in by_key:
            raise UsageError(f"unknown key {key!r} in config file")
        dest, typ = by_key[key]
        try:
            opts[dest] = typ(value)
        except ValueError:
            raise UsageError(f"invalid value {value!r} for --{key} in config file") from None
        if dest in CHOICES and opts[dest] not in CHOICES[dest]:
            raise UsageError(f"invalid choice {value!r} for --{key}")
    for dest in dests:
        v = getattr(args, dest)
        if v is not None:
            opts[dest] = v
    return opts


def parse_sweep(text: str) -> tuple[str, list]:
    if "=" not in text:
        raise UsageError(f"--sweep: expected NAME=START:STOP:COUNT, got {text!r}")
    name, rng = text.split("=", 1)
    name = name.strip()
    if name not in SWEEPABLE:
        raise UsageError(f"--sweep: parameter {name!r} cannot be swept (choose from {', '.join(SWEEPABLE)})")
    typ = SWEEPABLE[name]
    try:
        if ":" in rng:
            start, stop, count = rng.split(":")
            start, stop, count = float(start), float(stop), int(count)
            if count < 2 or not start < stop:
                raise UsageError(f"--sweep {name}: need count >= 2 and start < stop")
            values = np.linspace(start, stop, count).tolist()
            if typ is int:
                values = [int(round(v)) for v in values]
        else:
            values = [typ(v) for v in rng.split(",")]
            if len(values) < 2:
                raise UsageError(f"--sweep {name}: need at least two values")
    except ValueError:
        raise UsageError(f"--sweep: malformed range {rng!r} for {name}") from None
    return name, values


def _dest_of(name: str) -> str:
    return "lam" if name == "lambda" else name


# --------------------------------------------------------------------------
# command handlers: opts -> (columns, rows)


def _require(opts: dict, command: str) -> None:
    for dest in REQUIRED[command]:
        if opts.get(dest) is None:
            raise UsageError(f"missing required parameter {_flag(dest)}")


def _model(opts) -> ModelParams:
    return ModelParams(opts["beta"], opts["eps"], opts.get("h0") or 0.0)


def cmd_solve(opts):
    p = _model(opts)
    roots = solve_quenched(p)
    rows = []
    for m in roots:
        s = naive_solution_at(m, p)
        rows.append([len(roots), s.m, s.lam, s.eos_residual, s.neutrality_residual, s.kind, s.metastable])
    return ["n_roots", "m", "lambda", "eos_residual", "neutrality_residual", "kind", "metastable"], rows


def cmd_landscape(opts):
    land = classify_landscape(MoritaParams(_model(opts), opts["lam"]))
    return ["m", "kind", "phi_hat", "curvature"], [[c.m, c.kind, c.phi, c.curvature] for c in land.points]


def cmd_neutral_set(opts):
    curve = trace_neutral_curve(_model(opts), opts["points"], opts.get("l_min"), opts.get("l_max"))
    return ["l", "lambda", "h0", "residual"], [[q.l, q.lam, q.h0, q.residual] for q in curve.points]


def cmd_gap(opts):
    p = _model(opts)
    return ["a", "l_min", "curve_infimum"], [[compute_gap(p), neutral_l_min(p.beta, p.eps), neutral_curve_infimum(p)]]


def _bias_grid(opts):
    if opts.get("bias") is None:
        return np.linspace(-0.2, 0.2, 21).tolist()
    try:
        return [float(x) for x in opts["bias"].split(",")]
    except ValueError:
        raise UsageError(f"--bias: expected comma-separated reals, got {opts['bias']!r}") from None


def cmd_finite_n(opts):
    p, n, table = _model(opts), opts["n"], opts["table"]
    if table == "joint-law":
        law = exact.true_joint_law(n, p, opts["conditioning"])
        return ["m_bar", "lambda_n", "probability"], [list(t) for t in law.support() if t[2] > 0.0]
    if table == "profile":
        prof = exact.discontinuity_profile(n, p, _bias_grid(opts))
        rows = [[e.field_bias, e.lambda_n, e.requested_bias, e.n_plus_rest] for e in prof.entries]
        return ["bias", "lambda_n", "requested_bias", "n_plus_rest"], rows
    if table == "jump":
        j = exact.lambda_jump(n, p)
        try:
            lam_star = solve_naive_system(p, "+").lam
        except NoSolutionError:
            lam_star = 0.0
        return (
            ["bias", "lambda_plus", "lambda_minus", "jump", "lambda_star"],
            [[j.bias, j.lambda_plus, j.lambda_minus, j.jump, lam_star]],
        )
    if table == "identities":
        r = exact.verify_consistency_identities(n, p)
        return (
            ["sigma_lhs", "sigma_rhs", "eta_rhs", "magnetization_residual", "neutrality_residual"],
            [[r.sigma_lhs, r.sigma_rhs, r.eta_rhs, r.magnetization_residual, r.neutrality_residual]],
        )
    law = exact.morita_law(n, MoritaParams(p, opts.get("lam", 0.0) or 0.0))
    rows = [[float(m), float(q), law.field_expectation] for m, q in zip(law.m_values, law.probabilities)]
    return ["m", "probability", "field_expectation"], rows


def cmd_mc(opts, run_spec):
    p, n = _model(opts), opts["n"]
    if opts["target"] == montecarlo.MORITA:
        cfg = montecarlo.McConfig(n, opts["sweeps"], opts["burn_in"], opts["seed"], montecarlo.MORITA, MoritaParams(p, opts["lam"]))
    else:
        cfg = montecarlo.McConfig.quenched(n, opts["sweeps"], opts["burn_in"], opts["seed"], p, n_plus=opts.get("n_plus"))
    est = montecarlo.sample(cfg)
    run_spec.setdefault("mc_config", []).append(cfg.echo())
    return (
        ["mean_spin_average", "mean_field_average", "std_error", "field_std_error", "n_samples"],
        [[est.mean_spin_average, est.mean_field_average, est.std_error, est.field_std_error, est.n_samples]],
    )


HANDLERS = {
    "solve": cmd_solve,
    "landscape": cmd_landscape,
    "neutral-set": cmd_neutral_set,
    "gap": cmd_gap,
    "finite-n": cmd_finite_n,
}


# --------------------------------------------------------------------------
# sweeping and emission


def sweep(command: str, opts: dict, sweeps: list[tuple[str, list]], run_spec: dict):
    """Evaluate ``command`` on the Cartesian grid, rows in row-major grid order."""
    if len(sweeps) > 2:
        raise UsageError("--sweep: at most two swept parameters")
    names = [n for n, _ in sweeps]
    if len(set(names)) != len(names):
        raise UsageError("--sweep: a parameter may be swept only once")
    size = int(np.prod([len(v) for _, v in sweeps])) if sweeps else 1
    if size > MAX_GRID_POINTS:
        raise ResourceError(f"grid of {size} points exceeds {MAX_GRID_POINTS}")
    columns, rows = None, []
    for point in itertools.product(*(v for _, v in sweeps)):
        local = dict(opts)
        for name, value in zip(names, point):
            local[_dest_of(name)] = value
        _require(local, command)
        if command == "mc":
            cols, sub = cmd_mc(local, run_spec)
        else:
            cols, sub = HANDLERS[command](local)
        columns = names + cols
        rows.extend(list(point) + r for r in sub)
    return columns, rows


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def to_json(run_spec, columns, rows, wall_time) -> str:
    record = {
        "spec": run_spec,
        "payload": {"columns": columns, "rows": [[_jsonable(v) for v in r] for r in rows]},
        "version": __version__,
        "wall_time_s": wall_time,
    }
    return json.dumps(record, allow_nan=False) + "\n"


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def run(argv=None) -> int:
    """Entry point; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        opts = _resolve(args)
        run_spec = {"command": args.command, "params": {k: v for k, v in sorted(opts.items())}, "format": args.fmt}
        status = EXIT_OK
        if args.command == "verify":
            def report(r):
                print(r.line(), file=sys.stderr, flush=True)

            results = verify.run_suite(opts["suite"], report)
            columns, rows = ["check", "passed", "detail"], [[r.name, r.passed, r.detail] for r in results]
            if not all(r.passed for r in results):
                status = EXIT_VERIFY_FAILED
        else:
            sweeps = [parse_sweep(s) for s in args.sweep]
            run_spec["grid"] = {name: values for name, values in sweeps}
            columns, rows = sweep(args.command, opts, sweeps, run_spec)
    except UsageError as exc:
        print(f"rfim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceError, NumericError, NoSolutionError, AmbiguousPhaseError) as exc:
        print(f"rfim: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ConfigError) as exc:
        print(f"rfim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"rfim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    wall = time.perf_counter() - started
    text = to_csv(columns, rows) if args.fmt == "csv" else to_json(run_spec, columns, rows, wall)
    _emit(text, args.out)
    return status


def main() -> None:
    sys.exit(run())
