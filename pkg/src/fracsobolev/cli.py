"""Command-line front end: ``fracsobolev {norm,kfunc,verify,bem} ...``.

Exit codes: 0 when every asserted check passes, 1 when a check fails or a
computation breaks down, 2 on usage errors (bad flags or malformed input).
Data errors are written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .errors import FracSobolevError
from .funcspec import interpolate_p1, parse_expr
from .interpnorm import interp_norm_sq, k_curve
from .mesh import Interval, align_partition, uniform_mesh
from .slobodetskij import tilde_norm_sq

CSV_HELP = """\
CSV output: RFC-4180, '.' decimal point, floats with 17 significant digits.
Columns: experiment_id, the run parameters, the observables, pass,
tolerance_used. Columns are only ever appended, never renamed.
"""

VERIFY_HELP = CSV_HELP + """
suites:
  scaling         s, tau, interp_sq, tilde_sq, fitted exponents
  partition       lhs, rhs_zero_ext, rhs_local and the three orderings
  support         norm_sq_outer, norm_sq_inner, ratio against sqrt(5)
  counterexample  per-eps norms, log_weighted_quadrature, log_weighted_closed_form
  kstrict         t, K, K1, gap, leakage; then the K <= K1 ordering suite
  kernel          value and bound of the tail integral, n = 1 and n = 2
  all             every suite above, in that order
"""

BEM_HELP = CSV_HELP + """
runs:
  condition  M, precond, lambda_min, lambda_max, kappa, kappa_precond, cg_iters
  solve      M, n_sub, precond, cg_iters, kappa_precond, bound_holds, sqrt_bound_holds
  decompose  C1, C2, spectrum of the Schwarz operator, subdomain norm table,
             energy/interpolation-norm ratios, Galerkin energies
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _domain(text) -> Interval:
    vals = _floats(text) if isinstance(text, str) else [float(v) for v in text]
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("domain must be 'left,right'")
    try:
        return Interval(*vals)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path; .json for JSON, anything else for CSV")
    common.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
    common.add_argument("--tol", type=float, default=None, help="override the run's main tolerance")
    common.add_argument("--mesh", type=int, default=None, help="number of mesh elements")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--config", help="JSON file with flag values; explicit flags win")

    parser = _Parser(prog="fracsobolev", description="Fractional Sobolev norm toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("norm", parents=[common], help="tilde-norm and interpolation norm of an expression",
                       description="Prints a JSON report with seminorm_sq, weighted_sq, tilde_sq, interp_sq.")
    p.add_argument("--expr", default="family:hat", help="expression or family:name(...)")
    p.add_argument("--domain", type=_domain, default=Interval(0.0, 1.0), help="'left,right'")
    p.add_argument("--s", type=float, default=0.5, help="smoothness order in (0, 1)")

    p = sub.add_parser("kfunc", parents=[common], help="K-functional curve as CSV",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       description="Columns: t, K, and with --breakpoints also K1 and leakage.")
    p.add_argument("--expr", default="family:hat(0,0.5)")
    p.add_argument("--domain", type=_domain, default=Interval(0.0, 1.0))
    p.add_argument("--breakpoints", type=_floats, default=None, help="subdomain cuts, e.g. 0.5")
    p.add_argument("--subdomain", type=int, default=0, help="subdomain index for K1")
    p.add_argument("--t-range", type=_floats, default=[1e-2, 1e2, 41], help="t_min,t_max,count (log spaced)")
    p.add_argument("--lumped", action="store_true", help="lumped mass matrix")

    p = sub.add_parser("verify", parents=[common], help="run experiment suites",
                       formatter_class=argparse.RawDescriptionHelpFormatter, description=VERIFY_HELP)
    p.add_argument("suite", choices=[*ex.SUITES, "all"])
    p.add_argument("--eps", type=_floats, default=None, help="eps values for the counterexample suite")

    p = sub.add_parser("bem", parents=[common], help="boundary element runs",
                       formatter_class=argparse.RawDescriptionHelpFormatter, description=BEM_HELP)
    p.add_argument("run", choices=["condition", "solve", "decompose"])
    p.add_argument("--m-list", type=_ints, default=[16, 32, 64, 128, 256, 512], help="unknown counts")
    p.add_argument("--n-sub", type=int, default=8, help="number of subdomains")
    p.add_argument("--trials", type=int, default=100)
    parser.subcommands = dict(sub.choices)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    ns = parser.parse_args(argv)
    if not ns.config:
        return ns
    try:
        config = json.loads(Path(ns.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {ns.config}: {exc}") from exc
    if not isinstance(config, dict):
        raise UsageError("config must be a JSON object")
    config = {k.replace("-", "_"): _as_flag_text(v) for k, v in config.items()}
    unknown = set(config) - set(vars(ns))
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    # config values become defaults, so flags given on the command line win;
    # argparse runs string defaults through the flag's type converter
    parser.subcommands[ns.command].set_defaults(**config)
    return parser.parse_args(argv)


def _as_flag_text(value):
    """Lists in a config file are written the way the flag expects them."""
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    return value


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_records(records, out: str | None, summary: dict):
    if out and out.endswith(".json"):
        payload = {"summary": summary, "records": [r.row() for r in records]}
        _write(json.dumps(payload, indent=2, default=_json_default) + "\n", out)
    else:
        _write(ex.records_to_csv(records), out)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _report_lines(summary: dict):
    for name, s in summary["experiments"].items():
        status = "PASS" if s["failed"] == 0 else "FAIL"
        print(f"{status} {name}: {s['passed']}/{s['records']} records pass", file=sys.stderr)


def _cmd_norm(ns) -> int:
    expr = parse_expr(ns.expr).on(ns.domain)
    report = tilde_norm_sq(expr, ns.domain, ns.s)
    mesh = uniform_mesh(ns.domain, ns.mesh or 512)
    report.interp_sq = interp_norm_sq(interpolate_p1(expr, mesh, dirichlet=True), ns.s)
    data = report.as_dict()
    data.update({"expr": ns.expr, "mesh": mesh.n_elems})
    _write(json.dumps(data, indent=2, default=_json_default) + "\n", ns.out)
    return 0


def _cmd_kfunc(ns) -> int:
    if len(ns.t_range) != 3:
        raise UsageError("--t-range needs t_min,t_max,count")
    t = np.logspace(np.log10(ns.t_range[0]), np.log10(ns.t_range[1]), int(ns.t_range[2]))
    mesh = uniform_mesh(ns.domain, ns.mesh or 1024)
    u = interpolate_p1(parse_expr(ns.expr), mesh, dirichlet=True)
    part = align_partition(mesh, ns.breakpoints) if ns.breakpoints else None
    curve = k_curve(u, t, part, ns.subdomain if part else None, lumped=ns.lumped)
    records = []
    for i, ti in enumerate(curve.t_values):
        obs = {"K": curve.K[i]}
        if curve.K1 is not None:
            obs.update({"K1": curve.K1[i], "leakage": curve.leakage[i]})
        ok = True if curve.K1 is None else bool(curve.K[i] <= curve.K1[i] * (1 + 1e-12))
        records.append(ex.ExperimentRecord("kfunc", {"t": ti}, obs, ok, 1e-12))
    summary = ex.summary({"kfunc": records})
    _emit_records(records, ns.out, summary)
    return 0 if summary["all_passed"] else 1


def _cmd_verify(ns) -> int:
    names = list(ex.SUITES) if ns.suite == "all" else [ns.suite]
    results = {}
    for name in names:
        kwargs = {"eps_list": ns.eps} if name == "counterexample" and ns.eps else {}
        results[name] = ex.run_suite(name, ns.seed, tol=ns.tol, mesh=ns.mesh, jobs=ns.jobs, **kwargs)
    summary = ex.summary(results)
    summary["seed"] = ns.seed
    records = [r for name in names for r in results[name]]
    _emit_records(records, ns.out, summary)
    _report_lines(summary)
    return 0 if summary["all_passed"] else 1


def _cmd_bem(ns) -> int:
    if ns.run == "condition":
        records = ex.run_bem_condition(ns.m_list, seed=ns.seed)
    elif ns.run == "solve":
        records = ex.run_bem_solve(ns.mesh or 256, ns.n_sub, seed=ns.seed,
                                   tol=1e-10 if ns.tol is None else ns.tol)
    else:
        records = ex.run_bem_decompose(ns.mesh or 256, trials=ns.trials, seed=ns.seed)
    summary = ex.summary({f"bem_{ns.run}": records})
    _emit_records(records, ns.out, summary)
    _report_lines(summary)
    return 0 if summary["all_passed"] else 1


COMMANDS = {"norm": _cmd_norm, "kfunc": _cmd_kfunc, "verify": _cmd_verify, "bem": _cmd_bem}


def _error_json(exc: Exception, kind: str) -> str:
    return json.dumps({"error": type(exc).__name__, "kind": kind, "message": str(exc)})


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ns = _apply_config(parser, argv)
        return COMMANDS[ns.command](ns)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        print(f"fracsobolev: error: {exc}", file=sys.stderr)
        return 2
    except FracSobolevError as exc:
        usage = isinstance(exc, ValueError)
        print(_error_json(exc, "input" if usage else "computation"), file=sys.stderr)
        return 2 if usage else 1
    except ValueError as exc:
        print(_error_json(exc, "input"), file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
