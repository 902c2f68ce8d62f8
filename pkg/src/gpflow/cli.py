"""Command-line front end: gpflow <subcommand> --config <path> [options].

Subcommands: solve, convergence, eigengap, compare, verify.  Each writes
CSV next to the configured output prefix; exit code 0 on success, 2 on
non-convergence or failed checks, 1 on configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .analysis import (convergence_study, eigengap_study, exact_case,
                       convexity_check, dense_Au, m_matrix_check,
                       monotonicity_oracle, perron_check, rate_fit)
from .config import ConfigError, RunConfig, parse_config
from .energy import (Problem, State, eigenvalue_from_energy, energy,
                     eigenvalue_estimate, retract)
from .flows import (FlowConfig, FlowKind, RunReport, StopRule,
                    default_initial_state, run)
from .grids import GridSpec, Scheme, TensorOperator
from .linalg import FastSolver, SolverError

FMT = "%.16e"  # 17 significant digits


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FMT % float(x)


def _write_csv(path, header, rows, created):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(x) for x in row) + "\n")
    created.append(path)


def _write_trace(prefix, report: RunReport, created, tag=""):
    path = f"{prefix}{tag}_trace.csv"
    rows = [(r.index, r.energy, r.residual, r.eigenvalue, r.step_size)
            for r in report.records]
    _write_csv(path, ["iter", "energy", "residual", "lambda", "step"], rows, created)


def _write_summary(prefix, report: RunReport, problem, created):
    state = report.final_state
    rows = [(eigenvalue_estimate(state, problem), energy(state, problem),
             report.iterations, report.wall_seconds)]
    _write_csv(f"{prefix}_summary.csv",
               ["lambda", "energy", "iterations", "wall_seconds"], rows, created)


def _build(cfg: RunConfig):
    disc = TensorOperator(cfg.grid)
    V = np.asarray(cfg.potential_fn(disc.node_coordinates()), dtype=float)
    problem = Problem(V, cfg.beta, cfg.flow.effective_alpha)
    return disc, problem


def _initial(cfg: RunConfig, disc, problem) -> State:
    return default_initial_state(disc, cfg.initial, problem)


def run_solve(cfg: RunConfig, created) -> int:
    disc, problem = _build(cfg)
    report = run(cfg.flow, problem, _initial(cfg, disc, problem), cfg.stop)
    _write_trace(cfg.prefix, report, created)
    _write_summary(cfg.prefix, report, problem, created)
    return 0 if report.converged else 2


def run_convergence(cfg: RunConfig, created) -> int:
    levels = cfg.study_levels or [cfg.grid.cells_per_dim, 2 * cfg.grid.cells_per_dim]
    schemes = cfg.study_schemes or [(cfg.grid.scheme, cfg.grid.degree)]
    table = convergence_study(schemes, levels, cfg.grid.dim, cfg.beta,
                              alpha=cfg.flow.alpha,
                              tau=getattr(cfg.flow.step, "tau", 1.0),
                              initial=cfg.initial)
    rows = []
    ok = True
    for name, scheme_rows in table.items():
        for r in scheme_rows:
            ok &= r.converged
            rows.append((name, r.label, r.h, r.lambda_err, r.lambda_order,
                         r.energy_err, r.energy_order, r.sup_err, r.sup_order,
                         r.iterations, int(r.converged)))
    path = f"{cfg.prefix}_table.csv"
    with open(path, "w") as f:
        f.write("scheme,grid,h,lambda_err,lambda_order,energy_err,"
                "energy_order,sup_err,sup_order,iterations,converged\n")
        for row in rows:
            f.write(",".join(x if isinstance(x, str) else _fmt(x) for x in row) + "\n")
    created.append(path)
    return 0 if ok else 2


def run_eigengap(cfg: RunConfig, created) -> int:
    levels = cfg.study_levels or [cfg.grid.cells_per_dim, 2 * cfg.grid.cells_per_dim]
    specs = [GridSpec(cfg.grid.half_width, cfg.grid.dim, c,
                      cfg.grid.scheme, cfg.grid.degree) for c in levels]

    def problem_for(disc):
        V = np.asarray(cfg.potential_fn(disc.node_coordinates()), dtype=float)
        return Problem(V, cfg.beta, cfg.flow.effective_alpha)

    rows = eigengap_study(specs, problem_for, alpha=cfg.flow.alpha,
                          tau=getattr(cfg.flow.step, "tau", 1.0), stop=cfg.stop)
    _write_csv(f"{cfg.prefix}_table.csv", ["h", "lambda0", "lambda1", "gap"],
               [(r.h, r.lambda0, r.lambda1, r.gap) for r in rows], created)
    return 0 if all(r.gap > 0 for r in rows) else 2


def run_compare(cfg: RunConfig, created) -> int:
    """One trace per flow kind with an identical column schema."""
    disc, problem = _build(cfg)
    kinds = [FlowKind.MODIFIED_H1, FlowKind.BFSP, FlowKind.L2,
             FlowKind.A0, FlowKind.AU]
    u0 = _initial(cfg, disc, problem)
    summary = []
    status = 0
    for kind in kinds:
        flow = FlowConfig(kind=kind, alpha=cfg.flow.alpha, step=cfg.flow.step,
                          dt=cfg.flow.dt)
        report = run(flow, problem, u0, cfg.stop)
        _write_trace(cfg.prefix, report, created, tag=f"_{kind.value}")
        state = report.final_state
        summary.append((kind.value, eigenvalue_estimate(state, problem),
                        energy(state, problem), report.iterations,
                        report.wall_seconds))
        if not report.converged:
            status = 2
    path = f"{cfg.prefix}_summary.csv"
    with open(path, "w") as f:
        f.write("flow,lambda,energy,iterations,wall_seconds\n")
        for row in summary:
            f.write(",".join(x if isinstance(x, str) else _fmt(x) for x in row) + "\n")
    created.append(path)
    return status


def run_verify(cfg: RunConfig, created, seed=0) -> int:
    """Structural checks on the configured problem; prints pass counts."""
    rng = np.random.default_rng(seed)
    disc, problem = _build(cfg)
    checks: list[tuple[str, bool]] = []

    report = run(cfg.flow, problem, _initial(cfg, disc, problem), cfg.stop)
    checks.append(("flow converged", report.converged))
    state = report.final_state
    checks.append(("energy monotone decreasing",
                   bool(np.all(np.diff(report.energies) <= 1e-12))))
    lam = eigenvalue_estimate(state, problem)
    checks.append(("eigenvalue identity lambda = 2E + (beta/2)<u^2,u^2>",
                   abs(lam - eigenvalue_from_energy(state, problem)) <= 1e-10 * max(1, abs(lam))))

    monotone = cfg.grid.scheme is Scheme.FD2 or (
        cfg.grid.scheme is Scheme.SEM and cfg.grid.degree == 1)
    if monotone:
        checks.append(("converged state entrywise positive",
                       bool(np.min(state.coeffs) > 0)))
    if disc.ndof <= 200:
        A = dense_Au(state, problem)
        Ah = A * disc.weights[:, None]  # <., .>_h-symmetric form
        if monotone:
            mm = m_matrix_check(Ah)
            checks.append(("A_u M-matrix sufficient condition", mm.passes_sufficient))
            checks.append(("A_u inverse nonnegative", monotonicity_oracle(A)))
        cv = convexity_check(disc, problem, samples=5, rng=rng)
        if cv.supported:
            checks.append(("E(sqrt(v)) Hessian PSD", cv.hessian_psd))
            checks.append(("E(u) >= E(|u|)", cv.abs_value_inequality))
        shift = max(float(np.min(problem.potential)), 1e-2)
        pre = FastSolver(disc, shift)
        from .energy import apply_Au
        pr = perron_check(lambda w: apply_Au(state, problem, w), disc,
                          solve_inner=pre.solve)
        checks.append(("ground-state eigenvalue simple (gap > 0)", pr.positive_gap))
        checks.append(("lowest eigenvector positive", pr.positive_eigenvector))
    if report.iterations >= 11:
        fit = rate_fit(report, 0.5)
        checks.append(("geometric residual decay (rate < 1)", fit.rate < 1.0))

    passed = sum(ok for _, ok in checks)
    for name, ok in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    print(f"{passed}/{len(checks)} checks passed")
    path = f"{cfg.prefix}_table.csv"
    with open(path, "w") as f:
        f.write("check,passed\n")
        for name, ok in checks:
            f.write(f"{name},{int(ok)}\n")
    created.append(path)
    return 0 if passed == len(checks) else 2


_COMMANDS = {
    "solve": run_solve,
    "convergence": run_convergence,
    "eigengap": run_eigengap,
    "compare": run_compare,
    "verify": run_verify,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gpflow",
                                     description="Gross-Pitaevskii ground states "
                                     "by Riemannian Sobolev gradient descent")
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to an INI run config")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--out", default=None, help="override the output prefix")
    args = parser.parse_args(argv)

    if args.threads is not None:
        try:
            import threadpoolctl
            threadpoolctl.threadpool_limits(args.threads)
        except ImportError:
            os.environ["OMP_NUM_THREADS"] = str(args.threads)

    try:
        with open(args.config) as f:
            cfg = parse_config(f.read())
    except (OSError, ConfigError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1

    if args.out is not None:
        cfg.prefix = args.out
    outdir = os.path.dirname(cfg.prefix)
    if outdir:
        os.makedirs(outdir, exist_ok=True)

    created: list[str] = []
    try:
        if args.subcommand == "verify":
            return run_verify(cfg, created, seed=args.seed)
        return _COMMANDS[args.subcommand](cfg, created)
    except (SolverError, RuntimeError, ValueError) as e:
        for path in created:
            try:
                os.unlink(path)
            except OSError:
                pass
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
