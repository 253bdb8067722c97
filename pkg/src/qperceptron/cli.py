"""Command-line entry point: ``qperceptron <command> [options]``.

Commands
--------
capacity       point evaluation of the storage capacity (JSON)
curve          capacity along a one-parameter sweep (CSV or JSON)
asymptote      full solver against the large-bias asymptotes (CSV or JSON)
mc             finite-N feasibility transition (CSV plus JSON summary)
circuit-check  Gaussian circuit against the analytic output distribution (JSON)

Exit codes: 0 ok, 1 usage, 2 infeasible bias, 3 convergence or fit failure,
4 circuit agreement failure.
"""

import argparse
import csv
import io
import json
import math
import pathlib
import sys

import numpy as np

from . import __version__
from .asymptotics import convergence_diagnostic, tail_grid
from .capacity import ModelParams, capacity_curve, effective_threshold, storage_capacity
from .circuit import CircuitSpec, output_marginal, run_perceptron_circuit
from .errors import (ConvergenceError, DomainError, FitError, InfeasibleBias,
                     OverflowGuard)
from .montecarlo import McConfig, _rows_from, capacity_crossing, decision_matrix, rows_to_csv
from .rng import stream

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_CONVERGENCE, EXIT_AGREEMENT = 0, 1, 2, 3, 4

CURVE_COLUMNS = ("sweep_value", "m_in", "m_out", "kappa", "sigma", "epsilon",
                 "kappa_tilde", "M", "alpha_c", "status")
ASYMPTOTE_COLUMNS = ("bias", "alpha_full", "alpha_asymptote", "ratio", "M", "status")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x):
    """Number formatted with 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def num(x):
    """JSON-safe number rounded to 12 significant digits (None for non-finite)."""
    if x is None or not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def parse_grid(text):
    """``start:stop:step`` (last point snapped to ``stop``) or a comma list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise UsageError(f"bad range {text!r}")
            n = int(math.floor((stop - start) / step + 0.5))
            values = [start + i * step for i in range(n)] + [stop]
            if n == 0:
                values = [start] if stop - start < 0.5 * step else [start, stop]
            return [float(f"{v:.12g}") for v in values]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None


def _add_model_flags(p, defaults=None):
    d = {"m_in": 0.0, "m_out": 0.0, "kappa": 0.0, "sigma": 0.0, "epsilon": 0.01}
    d.update(defaults or {})
    p.add_argument("--m-in", type=float, default=d["m_in"])
    p.add_argument("--m-out", type=float, default=d["m_out"])
    p.add_argument("--kappa", type=float, default=d["kappa"])
    p.add_argument("--sigma", type=float, default=d["sigma"])
    p.add_argument("--epsilon", type=float, default=d["epsilon"])
    p.add_argument("--kappa-tilde", type=float, default=None,
                   help="effective threshold; overrides --kappa/--sigma")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", type=pathlib.Path, default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)


def _model(args):
    if args.kappa_tilde is not None:
        if args.kappa_tilde < 0:
            raise DomainError("--kappa-tilde must be >= 0")
        return ModelParams(args.m_in, args.m_out, kappa=args.kappa_tilde, sigma=0.0,
                           epsilon=args.epsilon)
    return ModelParams(args.m_in, args.m_out, kappa=args.kappa, sigma=args.sigma,
                       epsilon=args.epsilon)


def _params_dict(params):
    return {k: num(getattr(params, k)) for k in ("m_in", "m_out", "kappa", "sigma", "epsilon")}


def _header(command, **items):
    parts = [f"qperceptron {__version__}", command]
    parts += [f"{k}={fmt(v) if isinstance(v, (int, float)) else v}" for k, v in items.items()]
    return " ".join(parts)


def _emit(args, text):
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)


def _csv(columns, rows, header):
    buf = io.StringIO()
    buf.write(f"# {header}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def _error(code, kind, message):
    json.dump({"error": kind, "message": message}, sys.stdout)
    sys.stdout.write("\n")
    return code


def cmd_capacity(args):
    params = _model(args)
    kt = effective_threshold(params)
    try:
        sol = storage_capacity(params)
    except InfeasibleBias as exc:
        return _error(EXIT_INFEASIBLE, "infeasible-bias", str(exc))
    except (ConvergenceError, OverflowGuard) as exc:
        return _error(EXIT_CONVERGENCE, "no-convergence", str(exc))
    record = {
        "version": __version__,
        "params": _params_dict(params),
        "kappa_tilde": num(kt),
        "M": num(sol.M),
        "alpha_c": num(sol.alpha_c),
        "residual": num(sol.residual),
        "iterations": sol.iterations,
        "warnings": list(sol.warnings),
    }
    _emit(args, json.dumps(record) + "\n")
    return EXIT_OK


def cmd_curve(args):
    template = _model(args)
    grid = parse_grid(args.range)
    variable = args.vary.replace("-", "_")
    rows = capacity_curve(template, variable, grid)
    header = _header("curve", vary=variable, range=args.range,
                     kappa_tilde=effective_threshold(template), **_params_dict(template))
    table = []
    for r in rows:
        p = r.params
        fields = [p.m_in, p.m_out, p.kappa, p.sigma, p.epsilon] if p else [math.nan] * 5
        table.append([fmt(r.value)] + [fmt(v) for v in fields]
                     + [fmt(r.kappa_tilde), fmt(r.M), fmt(r.alpha_c), r.status])
    if args.format == "json":
        records = [dict(zip(CURVE_COLUMNS, row)) for row in table]
        _emit(args, json.dumps({"header": header, "rows": records}) + "\n")
    else:
        _emit(args, _csv(CURVE_COLUMNS, table, header))
    return EXIT_OK


def cmd_asymptote(args):
    regime = args.regime.replace("-", "_")
    if regime == "joint":
        regime = "joint_bias"
    template = _model(args)
    k_min = args.k_min if args.k_min is not None else (2 if regime == "output_bias" else 3)
    k_max = args.k_max if args.k_max is not None else (10 if regime == "output_bias" else 8)
    rows = convergence_diagnostic(template, regime, tail_grid(k_min, k_max))
    header = _header("asymptote", regime=regime, k_min=k_min, k_max=k_max,
                     kappa_tilde=effective_threshold(template), **_params_dict(template))
    table = [[fmt(r.bias), fmt(r.alpha_full), fmt(r.alpha_asymptote), fmt(r.ratio),
              fmt(r.M), r.status] for r in rows]
    if args.format == "json":
        records = [dict(zip(ASYMPTOTE_COLUMNS, row)) for row in table]
        _emit(args, json.dumps({"header": header, "rows": records}) + "\n")
    else:
        _emit(args, _csv(ASYMPTOTE_COLUMNS, table, header))
    return EXIT_OK


def cmd_mc(args):
    model = _model(args)
    config = McConfig(N=args.n, alphas=tuple(parse_grid(args.alpha)), trials_per_alpha=args.trials,
                      model=model, tolerance=args.tolerance, restarts=args.restarts,
                      base_seed=args.seed, bootstrap=args.bootstrap, workers=args.threads)
    header = _header("mc", n=args.n, alpha=args.alpha, trials=args.trials, seed=args.seed,
                     tolerance=args.tolerance, bootstrap=args.bootstrap,
                     kappa_tilde=config.kappa_tilde, **_params_dict(model))
    decisions = decision_matrix(config)
    try:
        result = capacity_crossing(config, decisions)
    except FitError as exc:
        _write_mc(args, rows_to_csv(_rows_from(config, decisions), header), None)
        sys.stderr.write(json.dumps({"error": "fit-failed", "message": str(exc)}) + "\n")
        return EXIT_CONVERGENCE
    summary = result.summary()
    summary["header"] = header
    for key in ("crossing_estimate", "width", "alpha_theory", "kappa_tilde"):
        summary[key] = num(summary[key])
    summary["crossing_band"] = [num(v) for v in summary["crossing_band"]]
    summary.pop("config")
    summary["params"] = _params_dict(model)
    _write_mc(args, rows_to_csv(result.rows, header), json.dumps(summary, sort_keys=True))
    return EXIT_OK


def _write_mc(args, csv_text, summary_text):
    if args.out is not None:
        args.out.write_text(csv_text)
        if summary_text is not None:
            args.out.with_suffix(".json").write_text(summary_text + "\n")
    elif args.format == "json":
        sys.stdout.write(json.dumps({"summary": json.loads(summary_text) if summary_text else None,
                                     "csv": csv_text}) + "\n")
    else:
        sys.stdout.write(csv_text)
        if summary_text is not None:
            sys.stderr.write(summary_text + "\n")


def cmd_circuit_check(args):
    cases = []
    if args.weights is not None:
        weights = parse_grid(args.weights)
        x = parse_grid(args.x) if args.x is not None else [1.0] * len(weights)
        sigma = args.sigma if args.sigma is not None else 0.5
        cases.append((weights, x, sigma))
    else:
        rng = stream(args.seed)
        for _ in range(args.cases):
            magnitude = rng.uniform(0.2, 2.0, size=args.n)
            weights = magnitude * rng.choice([-1.0, 1.0], size=args.n)
            x = rng.choice([-1.0, 1.0], size=args.n)
            sigma = args.sigma if args.sigma is not None else float(rng.uniform(0.05, 1.0))
            cases.append((list(weights), list(x), sigma))
    mean_dev = var_dev = 0.0
    for weights, x, sigma in cases:
        spec = CircuitSpec(tuple(weights), sigma)
        mean, var = output_marginal(run_perceptron_circuit(x, spec))
        w = np.asarray(weights)
        mean_dev = max(mean_dev, abs(mean - float(w @ np.asarray(x))))
        var_dev = max(var_dev, abs(var - float(w @ w) * sigma**2))
    ok = max(mean_dev, var_dev) <= args.tolerance
    report = {"version": __version__, "cases": len(cases), "n": len(cases[0][0]),
              "max_mean_deviation": mean_dev, "max_variance_deviation": var_dev,
              "tolerance": args.tolerance, "pass": ok}
    if len(cases) == 1:
        weights, x, sigma = cases[0]
        mean, var = output_marginal(run_perceptron_circuit(x, CircuitSpec(tuple(weights), sigma)))
        report["marginal"] = {"mean": mean, "variance": var}
    _emit(args, json.dumps(report) + "\n")
    return EXIT_OK if ok else EXIT_AGREEMENT


def build_parser():
    parser = _Parser(prog="qperceptron", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("capacity", help="storage capacity at one parameter point")
    _add_model_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("curve", help="capacity along a sweep")
    _add_model_flags(p)
    _add_common(p)
    p.add_argument("--vary", required=True,
                   choices=("m-in", "m-out", "m", "kappa", "sigma", "epsilon", "kappa-tilde",
                            "m_in", "m_out", "kappa_tilde"))
    p.add_argument("--range", required=True, help="start:stop:step or comma list")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("asymptote", help="full solver against large-bias asymptotes")
    _add_model_flags(p)
    _add_common(p)
    p.add_argument("--regime", required=True, choices=("output-bias", "joint"))
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.set_defaults(func=cmd_asymptote)

    p = sub.add_parser("mc", help="Monte Carlo feasibility transition")
    _add_model_flags(p)
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", required=True, help="start:stop:step or comma list")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--bootstrap", type=int, default=1000)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("circuit-check", help="circuit against analytic marginal")
    _add_common(p)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--weights", default=None, help="comma list; single explicit case")
    p.add_argument("--x", default=None, help="comma list pattern for --weights")
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.set_defaults(func=cmd_circuit_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, UsageError) as exc:
        sys.stderr.write(f"qperceptron: error: {exc}\n")
        return EXIT_USAGE
    except ConvergenceError as exc:
        sys.stderr.write(f"qperceptron: error: {exc}\n")
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
