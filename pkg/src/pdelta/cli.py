"""Command line: ``pdelta {check,solve,ladder,parabolic}``.

Exit codes: 0 success, 1 failed property checks, 2 configuration or usage
errors, 3 solver failures.  Errors are reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import checks, reports
from .config import Config, load_config, preload_files
from .continuation import check_uniform_bounds, run_a_ladder, run_delta_ladder
from .errors import ConfigError, MollificationFailure, PDeltaError, SolverError
from .grid import Field, l2_norm_sq
from .operator import build_a_approx
from .parabolic import builtin_initial, run_parabolic, scaled_load, time_profile
from .solver import MANUFACTURED, builtin_load, manufactured_load_p2, solve_steady

log = logging.getLogger("pdelta")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so run_cli returns codes."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdelta", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="{check,solve,ladder,parabolic}",
                                parser_class=_Parser)
    sub.required = True
    helps = {"check": "run the seeded property suites",
             "solve": "steady Newton solve for one A",
             "ladder": "A-ladder (A_schedule) or delta-ladder (delta_schedule)",
             "parabolic": "implicit Euler run with mollified initial data"}
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", type=Path, required=name != "check",
                        help="JSON run configuration")
        sp.add_argument("--seed", type=int, help="overrides the config seed")
        sp.add_argument("--output", type=Path, help="output directory (overrides config)")
    return parser


def _setup_logging():
    level = os.environ.get("PDELTA_LOG", "error").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    if level not in LOG_LEVELS:
        log.error("unknown PDELTA_LOG=%r, using 'error'", level)


def _emit_error(kind: str, **payload):
    sys.stderr.write(json.dumps({"error": kind, **payload}) + "\n")


def _out_dir(args, cfg: Optional[Config]) -> Path:
    if args.output is not None:
        return args.output
    return Path(cfg.output) if cfg is not None else Path("pdelta_out")


def _load(cfg: Config, mesh, key, files):
    spec = getattr(cfg, key)
    if spec.file is not None:
        return Field(mesh, spec.amplitude * files[key].values)
    if key == "load":
        return Field(mesh, spec.amplitude * builtin_load(mesh, spec.builtin).values)
    return builtin_initial(mesh, spec.builtin, spec.amplitude)


# -- subcommands -----------------------------------------------------------

def cmd_check(args, cfg: Optional[Config]) -> int:
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    results = checks.run_all(seed)
    failed = [r for r in results if not r.passed]
    lines = [r.line() for r in results]
    lines.append(f"{len(results) - len(failed)}/{len(results)} checks passed (seed={seed})")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    out = _out_dir(args, cfg)
    reports.atomic_write_text(out / "check_report.txt", text)
    reports.write_json(out / "check_report.json",
                       {"seed": seed, "passed": not failed,
                        "results": [{"suite": r.suite, "name": r.name,
                                     "passed": r.passed, "detail": r.detail}
                                    for r in results],
                        "failures": [f"{r.suite}.{r.name}" for r in failed]})
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


def cmd_solve(args, cfg: Config) -> int:
    mesh = cfg.build_mesh()
    files = preload_files(cfg)
    f = _load(cfg, mesh, "load", files)
    ap = build_a_approx(cfg.params, cfg.A)
    sol = solve_steady(mesh, ap, f, cfg.solver)
    row = {"p": cfg.params.p, "delta": cfg.params.delta, "A": cfg.A,
           "dim": mesh.dim, "n": mesh.n, "L": mesh.L,
           "load": cfg.load.builtin or cfg.load.file,
           "newton_iters": sol.newton_iters,
           "final_gradient_norm": sol.final_gradient_norm,
           "energy": sol.energy_history[-1]}
    if (cfg.params.p == 2.0 and cfg.load.builtin in MANUFACTURED
            and cfg.load.amplitude == 1.0):
        exact = manufactured_load_p2(mesh, cfg.load.builtin)[0]
        err = float(np.sqrt(l2_norm_sq(mesh, sol.u.values - exact.values)))
        ref = float(np.sqrt(l2_norm_sq(mesh, exact)))
        row["l2_error"] = err
        row["l2_error_rel"] = err / ref if ref > 0 else None
    row.update(sol.diagnostics.as_dict())
    out = _out_dir(args, cfg)
    reports.write_csv(out / "solve.csv", "solve", [row])
    reports.write_json(out / "solve.json",
                       {"config": cfg.as_dict(), "result": row,
                        "energy_history": sol.energy_history,
                        "energy_decrements": sol.energy_decrements,
                        "gradient_history": sol.gradient_history,
                        "field": sol.u.to_json()})
    print(f"solve: {sol.newton_iters} Newton steps, |g|={sol.final_gradient_norm:.3e}, "
          f"max|Du|={sol.diagnostics.max_Du:.6g}")
    return EXIT_OK


def cmd_ladder(args, cfg: Config) -> int:
    mesh = cfg.build_mesh()
    files = preload_files(cfg)
    f = _load(cfg, mesh, "load", files)
    if cfg.delta_schedule is not None:
        report = run_delta_ladder(mesh, cfg.params.p, f, cfg.delta_schedule,
                                  cfg.ladder.A_policy, cfg.solver, cfg.ladder.growth_tol,
                                  cfg.ladder.warm_start)
    else:
        sched = cfg.A_schedule or tuple(2.0 ** k for k in range(11))
        report = run_a_ladder(mesh, cfg.params, f, sched, cfg.solver,
                              cfg.ladder.stabilization_tol, cfg.ladder.warm_start)
    verdict = None
    if len(report.diagnostics) >= 3:
        verdict = check_uniform_bounds(report, cfg.ladder.ratio_tol)
    out = _out_dir(args, cfg)
    reports.write_csv(out / "ladder.csv", "ladder", reports.ladder_rows(report))
    summary = reports.ladder_summary(report, verdict)
    summary["config"] = cfg.as_dict()
    reports.write_json(out / "ladder.json", summary)
    print(f"{report.kind}-ladder: {len(report.schedule)} steps, "
          f"stabilization_index={report.stabilization_index}")
    if verdict is not None:
        print(verdict.table())
    for flag in report.growth_flags:
        print(f"growth flag: {flag}")
    return EXIT_OK


def cmd_parabolic(args, cfg: Config) -> int:
    mesh = cfg.build_mesh()
    files = preload_files(cfg)
    base = _load(cfg, mesh, "load", files)
    u0 = _load(cfg, mesh, "initial", files)
    f = scaled_load(base, time_profile(cfg.time.profile))
    run = run_parabolic(mesh, cfg.params, cfg.A, u0, f, cfg.time.T, cfg.time.dt,
                        cfg.solver)
    out = _out_dir(args, cfg)
    reports.write_csv(out / "parabolic.csv", "parabolic", reports.parabolic_rows(run))
    summary = reports.parabolic_summary(run)
    summary["config"] = cfg.as_dict()
    reports.write_json(out / "parabolic.json", summary)
    print(f"parabolic: {run.steps} steps, bound_ratio={run.bound_ratio:.6g}")
    return EXIT_OK


COMMANDS = {"check": cmd_check, "solve": cmd_solve, "ladder": cmd_ladder,
            "parabolic": cmd_parabolic}


def run_cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _emit_error("usage", message=str(exc))
        return EXIT_CONFIG
    except SystemExit as exc:        # --help
        return int(exc.code or 0)
    _setup_logging()
    cfg = None
    try:
        if args.config is not None:
            cfg = load_config(args.config)
        if args.command != "check":
            if args.command == "parabolic" and cfg.problem != "parabolic":
                raise ConfigError([("problem", "parabolic command needs problem 'parabolic'")])
            if args.command in ("solve", "ladder") and cfg.problem != "steady":
                raise ConfigError([("problem", f"{args.command} needs problem 'steady'")])
            if args.seed is not None:
                cfg = _with_seed(cfg, args.seed)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        _emit_error("config", errors=[{"field": f, "message": m} for f, m in exc.errors],
                    line=exc.line)
        return EXIT_CONFIG
    except (SolverError, MollificationFailure) as exc:
        payload = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, SolverError):
            payload["tag"] = exc.tag
            payload["history"] = exc.history
        else:
            payload["achieved"] = exc.achieved
        _emit_error("solver", **payload)
        return EXIT_SOLVER
    except PDeltaError as exc:
        _emit_error("input", type=type(exc).__name__, message=str(exc))
        return EXIT_CONFIG


def _with_seed(cfg: Config, seed: int) -> Config:
    return replace(cfg, seed=seed)


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
