"""Command-line entry point ``sgfem``.

Every subcommand prints a JSON summary to stdout and exits 0. Failures print
``{"error": ..., "message": ...}`` to stderr and exit 1 (2 for usage errors).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .harness import (PULLOUT, SHEAR_PROBLEMS, RunConfig, convergence_study,
                      run_benchmark, unit_stations, write_bench_csv, write_convergence_csv,
                      write_field_csv, write_newton_csv, write_profile_csv)
from .mesh import quad_mesh
from .mixed2d import solve_shear_mixed_2d
from .shear import analytic_shear

FAMILIES = ("lagrange", "hermite", "bspline", "mixed")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _elements(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad element list {text!r}") from exc
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("element counts must be positive integers")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON RunConfig")
    common.add_argument("--case", choices=("D", "T"), default="D")
    common.add_argument("--family", choices=FAMILIES)
    common.add_argument("--degree", type=int)
    common.add_argument("--elements", type=_elements)
    common.add_argument("--out", type=Path, default=Path("out"))
    common.add_argument("--samples", type=int)
    common.add_argument("--penalty", type=float)
    common.add_argument("--seed", type=int, default=0,
                        help="recorded in the summary; solves are deterministic")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="sgfem", description="Strain-gradient finite elements")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("shear-analytic", parents=[common], help="closed-form shear profile CSV")
    p = sub.add_parser("shear-solve", parents=[common], help="discrete shear profile CSV")
    p.add_argument("--plate", type=_elements, metavar="NX,NY",
                   help="solve the periodic 2-D mixed plate instead of the 1-D reduction")
    p = sub.add_parser("pullout-solve", parents=[common], help="pull-out profile and Newton log")
    p.add_argument("--measure", choices=("r", "1"), default="r")
    p = sub.add_parser("converge", parents=[common], help="h-convergence CSV")
    p.add_argument("--problem", choices=(*SHEAR_PROBLEMS, PULLOUT))
    p = sub.add_parser("bench", parents=[common], help="run-time table CSV")
    p.add_argument("--problem", choices=(*SHEAR_PROBLEMS, PULLOUT), default=PULLOUT)
    return parser


def _config(args, problem: str) -> RunConfig:
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = {"problem": problem}
    if args.family:
        data["families"] = [{"family": args.family, "degree": args.degree}]
    if args.elements:
        data["elements"] = args.elements
    if args.samples is not None:
        data["samples"] = args.samples
    if args.penalty is not None:
        data["penalty"] = args.penalty
    if getattr(args, "measure", None) and problem == PULLOUT:
        data.setdefault("geometry", {})["measure"] = args.measure
    return RunConfig.from_dict(data)


def _shear_problem(args) -> str:
    return "shear" + args.case


def cmd_shear_analytic(args):
    cfg = _config(args, _shear_problem(args))
    case = cfg.shear_case()
    cf = analytic_shear(case, cfg.params())
    y = case.H * unit_stations(cfg.samples)
    path = write_profile_csv(args.out / f"shear_analytic_{case.tag}.csv", y, cf.u(y), cf.du(y))
    return {"csv": str(path), "q": [cf.q1, cf.q2, cf.q3, cf.q4], "r": cf.r}


def cmd_shear_solve(args):
    from .harness import solve_profile
    cfg = _config(args, _shear_problem(args))
    case = cfg.shear_case()
    if args.plate:
        if len(args.plate) != 2:
            raise UsageError("--plate takes NX,NY")
        nx, ny = args.plate
        sol = solve_shear_mixed_2d(quad_mesh(3.0 * case.H, case.H, nx, ny, True), case,
                                   cfg.params())
        path = write_field_csv(sol, args.out / f"plate_{case.tag}_{nx}x{ny}.csv")
        return {"csv": str(path), "row_spread": sol.row_spread(),
                "constraint_rms": sol.constraint_rms()}
    fam = cfg.families[0] if args.family else {"family": "hermite"}
    n = cfg.elements[-1]
    _, dofs, sol, _ = solve_profile(cfg, fam["family"], fam.get("degree"), n)
    y = case.H * unit_stations(cfg.samples)
    path = write_profile_csv(args.out / f"shear_{case.tag}_{sol.label}_{n}.csv", y,
                             sol.evaluate(y), sol.evaluate(y, 1))
    return {"csv": str(path), "dofs": int(dofs), "family": sol.label}


def cmd_pullout_solve(args):
    from .harness import solve_profile
    cfg = _config(args, PULLOUT)
    dom = cfg.pullout_domain()
    fam = cfg.families[0] if args.family else {"family": "hermite"}
    n = cfg.elements[-1] if args.elements else 50
    _, dofs, sol, report = solve_profile(cfg, fam["family"], fam.get("degree"), n)
    r = dom.r_in + (dom.R - dom.r_in) * unit_stations(cfg.samples)
    stem = f"pullout_{sol.label}_{n}"
    prof = write_profile_csv(args.out / f"{stem}.csv", r, sol.evaluate(r), coordinate="r")
    newton = write_newton_csv(report, args.out / f"{stem}_newton.csv")
    return {"csv": str(prof), "newton_csv": str(newton), "dofs": int(dofs),
            "iterations": report.iterations, "converged": report.converged}


def cmd_converge(args):
    problem = args.problem or (PULLOUT if args.family == "lagrange" else _shear_problem(args))
    cfg = _config(args, problem)
    records = convergence_study(cfg)
    target = cfg.output.get("convergence") or args.out / f"convergence_{cfg.problem}.csv"
    path = write_convergence_csv(records, target, cfg.samples)
    return {"csv": str(path), "records": len(records)}


def cmd_bench(args):
    cfg = _config(args, args.problem)
    rows = run_benchmark(cfg)
    target = cfg.output.get("bench") or args.out / f"bench_{cfg.problem}.csv"
    path = write_bench_csv(rows, target)
    return {"csv": str(path), "rows": [[r.family, r.dofs, r.runtime_s] for r in rows]}


COMMANDS = {
    "shear-analytic": cmd_shear_analytic,
    "shear-solve": cmd_shear_solve,
    "pullout-solve": cmd_pullout_solve,
    "converge": cmd_converge,
    "bench": cmd_bench,
}


def _fail(kind: str, exc: BaseException, code: int) -> int:
    json.dump({"error": kind, "message": str(exc)}, sys.stderr)
    sys.stderr.write("\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        summary = COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except Exception as exc:  # reported as JSON, never as a traceback
        return _fail(type(exc).__name__, exc, 1)
    summary.update(command=args.command, seed=args.seed)
    json.dump(summary, sys.stdout, default=lambda o: np.asarray(o).tolist())
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
