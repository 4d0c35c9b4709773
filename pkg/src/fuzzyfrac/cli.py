"""Command-line interface.

Subcommands: solve, check, transversality, sweep, validate-fuzzy. Exit
codes are 0 (success), 2 (computation ran but something failed a check
or did not converge), 1 (hard error). All emitted files are byte-stable
across runs with identical inputs.
"""

import argparse
import os
import sys

import numpy as np

from .config import (ConfigError, build_free_problem, build_problem,
                     effective_orders, load_config, solver_config)
from .csvio import (CsvFormatError, read_fuzzy_number, read_solution,
                    write_residual_report, write_solution)
from .expressions import ExpressionError
from .fuzzy_core import validate_stacking
from .solver import solve_classical_limit, solve_ffvp
from .transversality import (BracketError, el_residuals_free,
                             solve_free_endpoint, transversality_residual)
from .variational import (FuzzyTrajectory, el_residuals, natural_bc_residuals,
                          subinterval_residuals)

__all__ = ["main"]


def _fail(msg):
    print("error: %s" % msg, file=sys.stderr)
    return 1


def _ensure_outdir(path):
    os.makedirs(path, exist_ok=True)
    probe = os.path.join(path, ".write-probe")
    with open(probe, "w") as fh:
        fh.write("")
    os.remove(probe)


def _print_report(report):
    print("%-22s %6s %12s %12s %s" % ("equation", "r", "max_abs", "l2", "pass"))
    for row in report.rows:
        print("%-22s %6.3f %12.4e %12.4e %s"
              % (row.equation_id, row.r, row.max_abs, row.l2,
                 "ok" if row.passed else "FAIL"))


def _solution_meta(cfg, alpha, beta, p, tolerance):
    meta = {"kind": cfg.kind, "alpha": float(alpha), "beta": float(beta),
            "nodes": p.xgrid.n, "rlevels": p.rgrid.n,
            "a": float(p.xgrid.a), "b": float(p.xgrid.b),
            "tolerance": float(tolerance)}
    if cfg.name:
        meta["problem"] = cfg.name
    return meta


def _write_meta(path, entries):
    with open(path, "w", newline="\n") as fh:
        for key in sorted(entries):
            fh.write("%s=%s\n" % (key, entries[key]))


def cmd_solve(args):
    cfg = load_config(args.config)
    alpha, beta = effective_orders(cfg, args.alpha)
    p = build_problem(cfg, alpha=alpha, beta=beta, rlevels=args.rlevels,
                      nodes=args.nodes)
    scfg = solver_config(cfg, nodes=args.nodes, tolerance=args.tolerance)
    _ensure_outdir(args.out)
    if alpha == 1.0:
        res = solve_classical_limit(p, scfg)
    else:
        res = solve_ffvp(p, scfg)
    traj = res.trajectory
    meta = _solution_meta(cfg, alpha, beta, p, scfg.tolerance)
    write_solution(os.path.join(args.out, "solution.csv"),
                   p.rgrid.values, p.xgrid.nodes, traj.lower, traj.upper,
                   meta=meta)
    write_residual_report(os.path.join(args.out, "residuals.csv"),
                          res.final_residuals, meta=meta)
    info = dict(meta)
    info["all_converged"] = int(res.all_converged())
    info["stacking_ok"] = int(res.stacking_ok)
    info["levels_converged"] = sum(1 for v in res.converged.values() if v)
    _write_meta(os.path.join(args.out, "meta.txt"), info)
    return 0 if res.all_converged() else 2


def cmd_check(args):
    cfg = load_config(args.config)
    alpha, beta = effective_orders(cfg, args.alpha)
    p = build_problem(cfg, alpha=alpha, beta=beta, rlevels=args.rlevels,
                      nodes=args.nodes)
    _, levels, xnodes, lower, upper = read_solution(args.trajectory)
    scale = max(1.0, abs(p.xgrid.a), abs(p.xgrid.b))
    if levels.size != p.rgrid.n or np.abs(levels - p.rgrid.values).max() > 1e-12:
        return _fail("trajectory r-levels do not match the configured r-grid")
    if xnodes.size != p.xgrid.n or np.abs(xnodes - p.xgrid.nodes).max() > 1e-12 * scale:
        return _fail("trajectory x-nodes do not match the configured grid")
    traj = FuzzyTrajectory(p.xgrid, p.rgrid, lower, upper, check=False)
    tol = args.tolerance if args.tolerance is not None else 1e-6
    if p.inner is not None:
        report = subinterval_residuals(p, traj, tol=tol)
    else:
        report = el_residuals(p, traj, tol=tol)
        report.rows.extend(natural_bc_residuals(p, traj, tol=tol).rows)
    _print_report(report)
    return 0 if report.passed() else 2


def cmd_transversality(args):
    cfg = load_config(args.config)
    alpha, _ = effective_orders(cfg, args.alpha)
    prob = build_free_problem(cfg, alpha=alpha)
    scfg = solver_config(cfg, nodes=args.nodes, tolerance=args.tolerance)
    _ensure_outdir(args.out)
    rl = None
    if args.rlevels is not None:
        rl = np.linspace(0.0, 1.0, int(args.rlevels))
    res = solve_free_endpoint(prob, rlevels=rl, cfg=scfg)
    meta = {"kind": cfg.kind, "alpha": float(alpha),
            "nodes": res.xgrid.n, "rlevels": res.levels.size,
            "a": float(prob.a), "b_star": res.b_star}
    if cfg.name:
        meta["problem"] = cfg.name
    write_solution(os.path.join(args.out, "solution.csv"),
                   res.levels, res.xgrid.nodes, res.lower, res.upper,
                   meta=meta)
    traj = res.trajectory()
    report = el_residuals_free(prob, traj)
    report.rows.extend(transversality_residual(prob, traj).rows)
    write_residual_report(os.path.join(args.out, "residuals.csv"),
                          report, meta=meta)
    info = dict(meta)
    info["all_converged"] = int(res.all_converged())
    info["flat_residual"] = int(res.flat_residual)
    _write_meta(os.path.join(args.out, "meta.txt"), info)
    print("b_star=%r" % res.b_star)
    return 0 if res.all_converged() else 2


def cmd_sweep(args):
    alphas = [tok for tok in (args.alphas or "").split(",") if tok.strip()]
    if not alphas:
        print("usage: sweep needs --alphas a1,a2,... (a nonempty list)",
              file=sys.stderr)
        return 1
    cfg = load_config(args.config)
    values = [float(tok) for tok in alphas]
    _ensure_outdir(args.out)
    scfg = solver_config(cfg, nodes=args.nodes, tolerance=args.tolerance)
    all_ok = True
    summary = []
    for tok, val in zip(alphas, values):
        _, beta = effective_orders(cfg, val)
        p = build_problem(cfg, alpha=val, beta=beta, rlevels=args.rlevels,
                          nodes=args.nodes)
        if val == 1.0:
            res = solve_classical_limit(p, scfg)
        else:
            res = solve_ffvp(p, scfg)
        traj = res.trajectory
        meta = _solution_meta(cfg, val, beta, p, scfg.tolerance)
        name = "solution_%s.csv" % tok.strip() if len(alphas) > 1 else "solution.csv"
        write_solution(os.path.join(args.out, name),
                       p.rgrid.values, p.xgrid.nodes, traj.lower, traj.upper,
                       meta=meta)
        all_ok = all_ok and res.all_converged()
        dist = float("nan")
        if p.closed_form is not None:
            worst = 0.0
            for k, r in enumerate(p.rgrid.values):
                lo, up = p.closed_form(r, p.xgrid.nodes)
                worst = max(worst, float(np.abs(traj.lower[k] - lo).max()),
                            float(np.abs(traj.upper[k] - up).max()))
            dist = worst
        summary.append((val, dist))
    with open(os.path.join(args.out, "sweep_summary.csv"), "w",
              newline="\n") as fh:
        fh.write("alpha,sup_distance\n")
        for val, dist in summary:
            fh.write("%r,%r\n" % (val, dist))
    return 0 if all_ok else 2


def cmd_validate_fuzzy(args):
    fn = read_fuzzy_number(args.table)
    tol = args.tolerance if args.tolerance is not None else 0.0
    report = validate_stacking(fn, tol=tol)
    print("valid=%s" % ("yes" if report.valid else "no"))
    if report.failed:
        print("failed_conditions=%s" % ",".join(report.failed))
    print("unverified_conditions=%s" % ",".join(report.unverified))
    return 0 if report.valid else 2


def _add_common(sp, config=True, out=False):
    if config:
        sp.add_argument("--config", required=True, help="problem TOML file")
    if out:
        sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--tolerance", type=float, default=None,
                    help="tolerance override")
    sp.add_argument("--nodes", type=int, default=None, help="x-grid size")
    sp.add_argument("--rlevels", type=int, default=None, help="r-grid size")
    sp.add_argument("--alpha", type=float, default=None,
                    help="order override (1 selects the classical path)")


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="fuzzyfrac",
        description="Numerical toolkit for fuzzy fractional variational problems")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve a fixed-interval problem")
    _add_common(sp, out=True)
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("check", help="evaluate residuals of a trajectory CSV")
    _add_common(sp)
    sp.add_argument("trajectory", help="solution CSV to check")
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("transversality",
                        help="solve a free-terminal-point problem")
    _add_common(sp, out=True)
    sp.set_defaults(fn=cmd_transversality)

    sp = sub.add_parser("sweep", help="re-solve across a list of orders")
    _add_common(sp, out=True)
    sp.add_argument("--alphas", default="",
                    help="comma-separated order values")
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("validate-fuzzy",
                        help="stacking checks on an r,lower,upper CSV")
    sp.add_argument("table", help="level table CSV")
    sp.add_argument("--tolerance", type=float, default=None,
                    help="endpoint comparison tolerance")
    sp.set_defaults(fn=cmd_validate_fuzzy)
    return ap


def main(argv=None):
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except BracketError as exc:
        return _fail(str(exc))
    except (ConfigError, ExpressionError, CsvFormatError) as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(str(exc))
    except ValueError as exc:
        return _fail(str(exc))


def _entry():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
